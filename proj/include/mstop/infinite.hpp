#pragma once

#include "mstop/model.hpp"
#include "mstop/powerfn.hpp"

#include <span>
#include <vector>

namespace mstop {

/// Single stopping problem for the call discounted at r + lambda.
struct AuxiliarySolution {
    double x_hat_inf = 0.0;
    PiecewisePowerSum v_hat;
};

/// V_inf = c1 x + c2 + c3 x^a above x_hat_inf and c4 x^b below.
struct InfiniteCoefficients {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
};

struct InfiniteSolution {
    double x_hat_inf = 0.0;
    PiecewisePowerSum sigma_density;
    PiecewisePowerSum v_inf;
    InfiniteCoefficients coeffs;
    PiecewisePowerSum v_hat;
};

AuxiliarySolution solve_auxiliary(const GbmModel& model);

/// (r + lambda - A) g on [x_hat_inf, inf), zero below:
/// (r + lambda - mu) x - K (r + lambda).
PiecewisePowerSum riesz_density(const GbmModel& model, double x_hat_inf);

/// Closed-form c1..c4 obtained by integrating the density against the
/// resolvent kernel at discount r.
InfiniteCoefficients closed_form_coefficients(const GbmModel& model, double x_hat_inf);

/// V_inf = R_r sigma, computed with the power algebra and reconciled against
/// closed_form_coefficients (relative 1e-9). Throws SolverError on mismatch.
InfiniteSolution solve_infinite(const GbmModel& model);

/// Per-point slack of v(x) - g(x) - lambda (R_{r+lambda} v)(x).
struct VerificationReport {
    std::vector<double> grid;
    std::vector<double> slack;
    double min_slack = 0.0;
    /// Largest |slack| over grid points in the stopping set [x_hat_inf, inf).
    double max_stopping_gap = 0.0;
    /// Grid points below x_hat_inf whose slack is not strictly positive.
    std::size_t non_strict_below = 0;
    bool ok = false;
};

inline constexpr double kVerificationSlackTol = 1e-9;
inline constexpr double kVerificationEqualityTol = 1e-8;

/// ok iff slack >= -1e-9 everywhere and |slack| <= 1e-8 on the stopping set.
VerificationReport check_verification(const PiecewisePowerSum& v, const GbmModel& model,
                                      std::span<const double> grid);

/// n points log-spaced on [lo, hi], endpoints exact.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace mstop
