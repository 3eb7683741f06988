#pragma once

#include <iosfwd>

namespace mstop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitVerification = 4;

/// Entry point of the `mstop` tool. Reports go to `out` (or to --output),
/// help text to `out`, and error JSON to `err`. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mstop::cli
