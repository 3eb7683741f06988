#include "mstop/finite.hpp"

#include "mstop/error.hpp"
#include "mstop/infinite.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace mstop {

namespace {

std::string describe(const char* what, std::size_t index, double detail) {
    std::ostringstream os;
    os.precision(17);
    os << "ladder invariant violated at i = " << index << ": " << what << " (" << detail << ")";
    return os.str();
}

double x_hat_inf_of(const GbmModel& model, const Exponents& e) {
    return e.beta / (e.beta - 1.0) * model.strike;
}

}  // namespace

SingleSolution solve_single(const GbmModel& model) {
    validate(model, true);
    const double b = derive_exponents(model).b;
    const double x1 = b / (b - 1.0) * model.strike;
    const double c1 = (x1 - model.strike) / std::pow(x1, b);
    auto g = call_payoff(model.strike);
    auto v = splice(PiecewisePowerSum::power(c1, b), g, x1);
    return {x1, std::move(v), std::move(g)};
}

PiecewisePowerSum continuation_value(const GbmModel& model, const PiecewisePowerSum& v_prev) {
    const auto resolved = resolvent_apply(v_prev, model, model.rate + model.lambda);
    return combine(call_payoff(model.strike), resolved, 1.0, model.lambda);
}

double delta(const GbmModel& model, const PiecewisePowerSum& h_prev, double x_star_prev) {
    const auto e = derive_exponents(model);
    const auto integrand = times_power(ratio_derivative(h_prev, e.b), -e.kappa);
    double integral = 0.0;
    try {
        integral = integrate(integrand, x_star_prev, std::numeric_limits<double>::infinity());
    } catch (const ResolventError& err) {
        throw SolverError(std::string("delta: non-integrable tail of H_prev: ") + err.what());
    }
    const double d = e.kappa * e.gamma / (e.kappa + e.gamma) * integral;
    if (d > 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "delta: expected a nonpositive value, got " << d;
        throw SolverError(os.str());
    }
    return d;
}

double solve_threshold(const GbmModel& model, double delta_value) {
    const auto e = derive_exponents(model);
    const double K = model.strike;
    const double x1 = e.b / (e.b - 1.0) * K;
    if (delta_value == 0.0) return x1;

    // x - b (x - K) + delta x^beta, written around x1 to avoid cancelling two
    // O(x) terms; for small lambda the root sits within 1e-13 of x_hat_inf.
    auto f = [&](double x) { return (1.0 - e.b) * (x - x1) + delta_value * std::pow(x, e.beta); };
    const double lo = x_hat_inf_of(model, e);
    const double hi = x1;
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_hi == 0.0) return hi;
    // For very small lambda the root can sit within a few ulps of x_hat_inf,
    // where the sign of f(lo) is decided by rounding in delta.
    const double slope = std::abs((1.0 - e.b) + e.beta * delta_value * std::pow(lo, e.beta - 1.0));
    const double ulp = std::nextafter(lo, hi) - lo;
    if (f_lo < 0.0 && f_lo >= -4.0 * ulp * slope && f_hi < 0.0) return lo;
    if (!(f_lo >= 0.0 && f_hi <= 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "threshold bracket has no sign change: f(" << lo << ") = " << f_lo << ", f(" << hi
           << ") = " << f_hi;
        throw SolverError(os.str());
    }
    if (f_lo == 0.0) return lo;

    std::uintmax_t max_iter = 200;
    // Near-degenerate ladders (tiny lambda) put consecutive roots ~1e-13
    // apart, so the bracket is shrunk to a few ulps.
    auto tol = [](double a, double b) {
        return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * b;
    };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, max_iter);
    if (max_iter >= 200) throw SolverError("threshold root solve did not converge");
    return 0.5 * (a + b);
}

ThresholdLadder solve_ladder(const GbmModel& model, std::size_t n) {
    if (n == 0) throw std::invalid_argument("solve_ladder needs at least one right");
    validate(model, true);
    const auto e = derive_exponents(model);
    const double x_hat = x_hat_inf_of(model, e);
    const auto g = call_payoff(model.strike);

    auto single = solve_single(model);
    ThresholdLadder L;
    L.n = n;
    L.thresholds.push_back(single.threshold);
    L.c_stars.push_back(single.value.eval_piece(0, 1.0));
    L.values.push_back(std::move(single.value));
    L.h_funcs.push_back(std::move(single.h_func));

    for (std::size_t i = 2; i <= n; ++i) {
        auto h = continuation_value(model, L.values.back());
        const double d = delta(model, L.h_funcs.back(), L.thresholds.back());
        const double x_star = solve_threshold(model, d);
        const double c_star = h(x_star) / std::pow(x_star, e.b);
        L.deltas.push_back(d);
        L.thresholds.push_back(x_star);
        L.c_stars.push_back(c_star);
        L.values.push_back(splice(PiecewisePowerSum::power(c_star, e.b), h, x_star));
        L.h_funcs.push_back(std::move(h));
    }

    // Invariants.
    const double x1 = L.thresholds.front();
    for (std::size_t i = 0; i < n; ++i) {
        const double xs = L.thresholds[i];
        const bool collapsed = xs == x_hat;
        if (collapsed) {
            std::ostringstream os;
            os << "x*_" << (i + 1) << " coincides with x_hat_inf to double precision";
            L.warnings.push_back(os.str());
        }
        if (!(xs > x_hat) && !collapsed) throw SolverError(describe("x*_i > x_hat_inf", i + 1, xs));
        if (i > 0 && !(xs < L.thresholds[i - 1]) && !(collapsed && L.thresholds[i - 1] == x_hat))
            throw SolverError(describe("x*_i < x*_{i-1}", i + 1, xs));
        if (i > 0 && !(L.deltas[i - 1] < 0.0))
            throw SolverError(describe("Delta_{i-1} < 0", i + 1, L.deltas[i - 1]));
    }

    auto grid = log_grid(x_hat / 10.0, 10.0 * x1, 200);
    grid.insert(grid.end(), L.thresholds.begin(), L.thresholds.end());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = L.values[i];
        const auto& h = L.h_funcs[i];
        const double xs = L.thresholds[i];
        const std::size_t at = v.piece_index(xs);
        const double left = v.eval_piece(at, xs);
        const double right = v.eval_piece(at + 1, xs);
        if (!(std::abs(left - right) <= 1e-10 * std::max(1.0, std::abs(left))))
            throw SolverError(describe("V^i continuous at x*_i", i + 1, left - right));

        const auto dv = derivative(v);
        const double gap = std::abs(dv.eval_piece(at, xs) - dv.eval_piece(at + 1, xs));
        L.smooth_fit_gaps.push_back(gap);
        if (gap > 1e-7) {
            std::ostringstream os;
            os << "smooth fit gap " << gap << " at x*_" << (i + 1);
            L.warnings.push_back(os.str());
        }

        for (double x : grid) {
            const double vx = v(x);
            const double tol = 1e-9 * std::max(1.0, std::abs(vx));
            if (vx < h(x) - tol) throw SolverError(describe("V^i >= H^i", i + 1, x));
            if (h(x) < g(x) - tol) throw SolverError(describe("H^i >= g", i + 1, x));
            if (i > 0 && L.values[i - 1](x) > vx + tol)
                throw SolverError(describe("V^{i-1} <= V^i", i + 1, x));
        }
    }
    return L;
}

MonotonicityReport check_ratio_monotonicity(const GbmModel& model, const PiecewisePowerSum& v_prev,
                                            std::size_t points) {
    const auto e = derive_exponents(model);
    const double x_hat = x_hat_inf_of(model, e);
    const double x1 = e.b / (e.b - 1.0) * model.strike;
    const auto resolved = resolvent_apply(v_prev, model, model.rate + model.lambda);
    const auto grid = log_grid(x_hat / 10.0, 10.0 * x1, points);

    std::vector<double> ratio(grid.size());
    MonotonicityReport rep;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ratio[i] = model.lambda * resolved(grid[i]) / std::pow(grid[i], e.b);
        rep.scale = std::max(rep.scale, std::abs(ratio[i]));
    }
    rep.worst_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double inc = ratio[i] - ratio[i - 1];
        if (inc > rep.worst_increase) {
            rep.worst_increase = inc;
            rep.at_x = grid[i];
        }
    }
    rep.ok = rep.worst_increase <= 1e-10 * rep.scale;
    return rep;
}

}  // namespace mstop
