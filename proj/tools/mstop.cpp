#include "mstop/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return mstop::cli::run(argc, argv, std::cout, std::cerr);
}
