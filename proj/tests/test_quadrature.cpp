#include "helpers.hpp"

#include "mstop/error.hpp"
#include "mstop/finite.hpp"
#include "mstop/infinite.hpp"
#include "mstop/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mstop;
using mstop::testing::rel_diff;

TEST_CASE("adaptive integration") {
    const auto r = adaptive_integrate([](double x) { return std::exp(x); }, 0.0, 1.0, {});
    CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
    const auto kink = adaptive_integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, {});
    CHECK(kink.value == doctest::Approx(0.045 + 0.245).epsilon(1e-9));
    CHECK_THROWS_AS(adaptive_integrate([](double x) { return 1.0 / std::sqrt(std::abs(x)); }, -1.0,
                                       1.0, QuadSpec{1e-14, 1e-16, 12}),
                    QuadratureError);
}

TEST_CASE("resolvent of constants and powers") {
    const GbmModel m = reference_model();
    CHECK(quad_resolvent([](double) { return 1.0; }, m, m.rate, 1.0).value ==
          doctest::Approx(20.0).epsilon(1e-9));
    CHECK(quad_resolvent([](double y) { return y; }, m, m.rate, 2.0).value ==
          doctest::Approx(47.619047619047619).epsilon(1e-9));
}

TEST_CASE("quadrature agrees with the algebra on V^1") {
    const GbmModel m = reference_model();
    const auto v1 = solve_single(m);
    const double q = m.rate + m.lambda;
    const auto exact = resolvent_apply(v1.value, m, q);
    for (double x : {1.0, v1.threshold, 5.0})
        CHECK(rel_diff(quad_resolvent(v1.value, m, q, x).value, exact(x)) < 1e-7);
}

TEST_CASE("divergent tails are reported") {
    const GbmModel m = reference_model();
    const double b = derive_exponents(m).b;
    CHECK_THROWS_AS(
        quad_resolvent([b](double y) { return std::pow(y, b + 0.5); }, m, m.rate, 1.0),
        QuadratureError);
}

TEST_CASE("bad QuadSpec") {
    const GbmModel m = reference_model();
    auto one = [](double) { return 1.0; };
    CHECK_THROWS_AS(quad_resolvent(one, m, m.rate, 1.0, QuadSpec{0.0, 1e-12, 50}),
                    std::invalid_argument);
    CHECK_THROWS_AS(quad_resolvent(one, m, m.rate, 1.0, QuadSpec{1e-9, 1e-12, 5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(quad_resolvent(one, m, m.rate, -1.0), std::domain_error);
}

TEST_CASE("oracle equivalence on random power sums") {
    std::mt19937_64 rng(11);
    const GbmModel m = reference_model();
    const auto grid = log_grid(0.2, 20.0, 20);
    const QuadSpec tight{1e-11, 1e-15, 50};
    for (int trial = 0; trial < 10; ++trial) {
        const double q = trial % 2 ? m.rate : m.rate + m.lambda;
        const auto f = mstop::testing::random_power_sum(rng, harmonic_pair(m, q));
        const auto exact = resolvent_apply(f, m, q);
        for (double x : grid) CHECK(rel_diff(quad_resolvent(f, m, q, x, tight).value, exact(x)) < 1e-6);
    }
}

TEST_CASE("quadrature ladder matches the algebra") {
    const GbmModel m = reference_model();
    const auto algebra = solve_ladder(m, 5);
    const auto quad = solve_ladder_quadrature(m, 5, 2.0);
    REQUIRE(quad.values_at_x0.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(rel_diff(quad.values_at_x0[i], algebra.values[i](2.0)) < 1e-6);
        CHECK(std::abs(quad.thresholds[i] - algebra.thresholds[i]) < 1e-6);
    }
    CHECK(rel_diff(quad.v_inf_at_x0, solve_infinite(m).v_inf(2.0)) < 1e-6);
}
