#pragma once

#include "mstop/model.hpp"
#include "mstop/powerfn.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace mstop {

/// Optimal thresholds and value functions for 1..n exercise rights.
/// Index i - 1 holds the quantities for i rights remaining.
struct ThresholdLadder {
    std::size_t n = 0;
    std::vector<double> thresholds;  // x*_1 > x*_2 > ... > x*_n
    std::vector<double> c_stars;     // H^i(x*_i) / x*_i^b
    std::vector<PiecewisePowerSum> values;   // V^1 .. V^n
    std::vector<PiecewisePowerSum> h_funcs;  // H^1 .. H^n
    std::vector<double> deltas;              // Delta_1 .. Delta_{n-1}
    /// |V^i'(x*_i+) - V^i'(x*_i-)| per right; observed, not enforced.
    std::vector<double> smooth_fit_gaps;
    std::vector<std::string> warnings;
};

struct SingleSolution {
    double threshold = 0.0;
    PiecewisePowerSum value;
    PiecewisePowerSum h_func;
};

/// Classical perpetual call: x*_1 = bK/(b-1), V^1 = c*_1 x^b below, x - K above.
SingleSolution solve_single(const GbmModel& model);

/// H^i = g + lambda R_{r+lambda} V^{i-1}.
PiecewisePowerSum continuation_value(const GbmModel& model, const PiecewisePowerSum& v_prev);

/// kappa gamma / (kappa + gamma) * int_{x*_prev}^inf y^{-kappa} d/dy(H_prev(y) / y^b) dy,
/// evaluated exactly. Throws SolverError if the result is positive.
double delta(const GbmModel& model, const PiecewisePowerSum& h_prev, double x_star_prev);

/// Unique root of x - b (x - K) + delta x^beta on (x_hat_inf, x*_1].
/// Returns x_hat_inf itself when the root lies closer to it than rounding can
/// resolve (tiny lambda). Throws SolverError when the bracket shows no sign change.
double solve_threshold(const GbmModel& model, double delta_value);

/// Full recursion for n >= 1 rights; ladder invariants are asserted and a
/// violation throws SolverError naming the failing index. Thresholds that
/// collapse onto x_hat_inf in double precision are allowed and reported in
/// `warnings`.
ThresholdLadder solve_ladder(const GbmModel& model, std::size_t n);

struct MonotonicityReport {
    bool ok = false;
    double worst_increase = 0.0;  // largest successive increase of the ratio
    double at_x = 0.0;            // grid point where it occurs
    double scale = 0.0;
};

/// Checks that x -> lambda (R_{r+lambda} v_prev)(x) / x^b is nonincreasing on
/// a log grid spanning [x_hat_inf / 10, 10 x*_1]. Successive increases up to
/// 1e-10 * max|ratio| are tolerated.
MonotonicityReport check_ratio_monotonicity(const GbmModel& model, const PiecewisePowerSum& v_prev,
                                            std::size_t points = 500);

}  // namespace mstop
