#include "helpers.hpp"

#include "mstop/error.hpp"
#include "mstop/infinite.hpp"
#include "mstop/json_io.hpp"
#include "mstop/powerfn.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace mstop;
using mstop::testing::rel_diff;

TEST_CASE("evaluation") {
    CHECK(PiecewisePowerSum::constant(1.0)(7.0) == 1.0);
    const PiecewisePowerSum f({2.0}, {{{1.0, 1.0, 0}}, {{2.0, 0.0, 0}}});
    CHECK(f(2.0) == 2.0);
    CHECK(f(1.5) == 1.5);
    CHECK(f(2.5) == 2.0);
    CHECK_THROWS_AS(f(0.0), std::domain_error);
    CHECK_THROWS_AS(f(-1.0), std::domain_error);
}

TEST_CASE("constructor rejects malformed input") {
    using P = PiecewisePowerSum;
    CHECK_THROWS_AS(P({2.0, 1.0}, {{}, {}, {}}), std::invalid_argument);
    CHECK_THROWS_AS(P({1.0}, {{}}), std::invalid_argument);
    CHECK_THROWS_AS(P({-1.0}, {{}, {}}), std::invalid_argument);
    CHECK_THROWS_AS(P({std::numeric_limits<double>::infinity()}, {{}, {}}),
                    std::invalid_argument);
}

TEST_CASE("canonical pieces") {
    const auto f = PiecewisePowerSum::from_terms({{1.0, 2.0, 0}, {3.0, 1.0, 0}, {-1.0, 2.0, 0}});
    REQUIRE(f.pieces().front().size() == 1);
    CHECK(f.pieces().front()[0].exponent == 1.0);
    CHECK(f.pieces().front()[0].coef == 3.0);
}

TEST_CASE("linear combination") {
    const auto x = PiecewisePowerSum::power(1.0, 1.0);
    CHECK(combine(x, x, 1.0, -1.0).is_zero());
    const auto two_x = x + x;
    REQUIRE(two_x.pieces().front().size() == 1);
    CHECK(two_x.pieces().front()[0].coef == 2.0);

    const PiecewisePowerSum f({2.0}, {{{1.0, 0.0, 0}}, {{2.0, 0.0, 0}}});
    const PiecewisePowerSum g({3.0}, {{{1.0, 1.0, 0}}, {{0.0, 0.0, 0}}});
    const auto h = f + g;
    CHECK(h.breakpoints() == std::vector<double>{2.0, 3.0});
    for (double x : {0.5, 2.0, 2.5, 3.0, 3.5, 10.0}) CHECK(h(x) == doctest::Approx(f(x) + g(x)));
}

TEST_CASE("ratio derivative") {
    const double b = derive_exponents(reference_model()).b;
    CHECK(ratio_derivative(PiecewisePowerSum::power(1.0, b), b).is_zero());
    const auto d = ratio_derivative(PiecewisePowerSum::power(1.0, 1.0), b);
    REQUIRE(d.pieces().front().size() == 1);
    CHECK(d.pieces().front()[0].coef == doctest::Approx(1.0 - b));
    CHECK(d.pieces().front()[0].exponent == doctest::Approx(-b));

    // First-order condition of (x - K)/x^b at bK/(b - 1).
    const double x1 = b * 2.0 / (b - 1.0);
    const auto dh = ratio_derivative(call_payoff(2.0), b);
    CHECK(std::abs(dh(x1)) < 1e-14);
}

TEST_CASE("derivative matches finite differences") {
    const PiecewisePowerSum f({1.5}, {{{2.0, 1.7, 0}, {-0.5, 0.3, 1}}, {{1.0, -0.4, 2}}});
    const auto df = derivative(f);
    for (double x : {0.3, 0.9, 2.0, 7.0}) {
        const double h = 1e-6 * x;
        CHECK(df(x) == doctest::Approx((f(x + h) - f(x - h)) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("splice") {
    const auto s = splice(PiecewisePowerSum::constant(1.0), PiecewisePowerSum::constant(2.0), 3.0);
    CHECK(s(3.0) == 1.0);
    CHECK(s(3.0001) == 2.0);
    CHECK(s.breakpoints() == std::vector<double>{3.0});
}

TEST_CASE("exact integration") {
    const auto f = PiecewisePowerSum::power(1.0, -2.0);
    CHECK(integrate(f, 1.0, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));
    CHECK(integrate(PiecewisePowerSum::power(1.0, -1.0), 1.0, std::exp(2.0)) ==
          doctest::Approx(2.0));
    CHECK(integrate(PiecewisePowerSum::power(3.0, 2.0), 0.0, 2.0) == doctest::Approx(8.0));
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0), ResolventError);
    CHECK_THROWS_AS(integrate(PiecewisePowerSum::power(1.0, -1.0), 1.0,
                              std::numeric_limits<double>::infinity()),
                    ResolventError);
    // int_0^1 ln y dy = -1
    CHECK(integrate(PiecewisePowerSum::from_terms({{1.0, 0.0, 1}}), 0.0, 1.0) ==
          doctest::Approx(-1.0));
}

TEST_CASE("generator of a power term") {
    const GbmModel m = reference_model();
    const auto af = generator_apply(PiecewisePowerSum::power(1.0, 2.3), m);
    CHECK(af(1.7) == doctest::Approx(m.theta(2.3) * std::pow(1.7, 2.3)));
}

TEST_CASE("resolvent examples") {
    const GbmModel m = reference_model();
    const auto e = derive_exponents(m);

    const auto one = resolvent_apply(PiecewisePowerSum::constant(1.0), m, m.rate);
    for (double x : {0.1, 1.0, 9.0}) CHECK(one(x) == doctest::Approx(1.0 / m.rate).epsilon(1e-13));

    const auto lin = resolvent_apply(PiecewisePowerSum::power(1.0, 1.0), m, m.rate);
    REQUIRE(lin.pieces().front().size() == 1);
    CHECK(lin.pieces().front()[0].coef == doctest::Approx(1.0 / 0.042).epsilon(1e-13));
    CHECK(lin(2.0) == doctest::Approx(47.619047619047619).epsilon(1e-13));

    // lambda R_{r+lambda} x^b = x^b
    const auto harm = resolvent_apply(PiecewisePowerSum::power(1.0, e.b), m, m.rate + m.lambda);
    for (double x : {0.5, 2.0, 6.0})
        CHECK(m.lambda * harm(x) == doctest::Approx(std::pow(x, e.b)).epsilon(1e-12));
}

TEST_CASE("resolvent rejects divergent and resonant inputs") {
    const GbmModel m = reference_model();
    const auto e = derive_exponents(m);
    try {
        resolvent_apply(PiecewisePowerSum::power(1.0, e.b), m, m.rate);
        FAIL("expected ResolventError");
    } catch (const ResolventError& err) {
        CHECK(err.kind() == ResolventErrorKind::Resonance);
    }
    try {
        resolvent_apply(PiecewisePowerSum::power(1.0, e.b + 1.0), m, m.rate);
        FAIL("expected ResolventError");
    } catch (const ResolventError& err) {
        CHECK(err.kind() == ResolventErrorKind::Divergence);
    }
    CHECK_THROWS_AS(resolvent_apply(PiecewisePowerSum::power(1.0, e.a - 0.5), m, m.rate),
                    ResolventError);
}

TEST_CASE("resonant exponent on a bounded piece produces a log term") {
    const GbmModel m = reference_model();
    const auto e = derive_exponents(m);
    const double q = m.rate + m.lambda;
    // x^beta on (0, 3], zero above: resonant with psi_{r+lambda} but integrable.
    const PiecewisePowerSum f({3.0}, {{{1.0, e.beta, 0}}, {}});
    const auto rf = resolvent_apply(f, m, q);
    bool has_log = false;
    for (const auto& piece : rf.pieces())
        for (const auto& t : piece) has_log = has_log || t.log_power > 0;
    CHECK(has_log);
    // (q - A) R_q f = f away from the breakpoint.
    const auto lhs = combine(rf, generator_apply(rf, m), q, -1.0);
    for (double x : {0.5, 1.0, 2.9, 3.1, 8.0}) CHECK(std::abs(lhs(x) - f(x)) < 1e-9 * (1 + f(x)));
}

TEST_CASE("resolvent inverts q - A on random power sums") {
    std::mt19937_64 rng(7);
    const GbmModel m = reference_model();
    const auto grid = log_grid(0.1, 50.0, 100);
    for (int trial = 0; trial < 30; ++trial) {
        const double q = trial % 2 ? m.rate : m.rate + m.lambda;
        const auto f = mstop::testing::random_power_sum(rng, harmonic_pair(m, q));
        const auto rf = resolvent_apply(f, m, q);
        const auto back = combine(rf, generator_apply(rf, m), q, -1.0);
        for (double x : grid) {
            bool at_break = false;
            for (double bp : f.breakpoints()) at_break = at_break || std::abs(x - bp) < 1e-12;
            if (at_break) continue;
            const double scale = std::max({1.0, std::abs(f(x)), q * std::abs(rf(x))});
            CHECK(std::abs(back(x) - f(x)) <= 1e-9 * scale);
        }
        // R_q f is C^1 across breakpoints.
        const auto d = derivative(rf);
        for (std::size_t k = 0; k < rf.breakpoints().size(); ++k) {
            const double bp = rf.breakpoints()[k];
            CHECK(rel_diff(rf.eval_piece(k, bp), rf.eval_piece(k + 1, bp)) < 1e-9);
            const double scale = std::max(1.0, std::abs(d.eval_piece(k, bp)));
            CHECK(std::abs(d.eval_piece(k, bp) - d.eval_piece(k + 1, bp)) < 1e-8 * scale);
        }
    }
}

TEST_CASE("json round trip") {
    const PiecewisePowerSum f({1.25, 4.0},
                              {{{0.1, 2.5, 0}}, {{-3.0, 0.5, 0}, {1e-7, -1.25, 1}}, {{2.0, 0.0, 0}}});
    const auto j = to_json(f);
    const auto back = power_sum_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.breakpoints() == f.breakpoints());
    REQUIRE(back.piece_count() == f.piece_count());
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        REQUIRE(back.pieces()[i].size() == f.pieces()[i].size());
        for (std::size_t k = 0; k < f.pieces()[i].size(); ++k) {
            CHECK(back.pieces()[i][k].coef == f.pieces()[i][k].coef);
            CHECK(back.pieces()[i][k].exponent == f.pieces()[i][k].exponent);
            CHECK(back.pieces()[i][k].log_power == f.pieces()[i][k].log_power);
        }
    }
    CHECK(j["pieces"][0][0].contains("coef"));
    CHECK(j["pieces"][0][0].contains("exp"));
    CHECK_FALSE(j["pieces"][0][0].contains("log"));
}
