#pragma once

#include <string>
#include <vector>

namespace mstop {

/// Geometric Brownian motion dX = mu X dt + sigma X dW, discounted at `rate`,
/// with Exp(lambda) refraction periods and call payoff (x - strike)^+.
struct GbmModel {
    double mu = 0.0;
    double sigma = 0.0;
    double rate = 0.0;
    double lambda = 0.0;
    double strike = 0.0;

    double net_drift() const { return mu - 0.5 * sigma * sigma; }

    /// Exponent of the speed density m'(y) = (2/sigma^2) y^{2mu/sigma^2 - 2}.
    double speed_exponent() const { return 2.0 * mu / (sigma * sigma) - 2.0; }
    double speed_coefficient() const { return 2.0 / (sigma * sigma); }

    /// theta(p) = sigma^2 p (p - 1) / 2 + mu p, so that A x^p = theta(p) x^p.
    double theta(double p) const { return 0.5 * sigma * sigma * p * (p - 1.0) + mu * p; }
};

/// Returns every violated constraint; empty when the model is usable.
/// The net-drift condition mu - sigma^2/2 > 0 is only checked when
/// `requires_positive_net_drift` is set (finite ladder and Monte Carlo).
std::vector<std::string> check(const GbmModel& model, bool requires_positive_net_drift);

/// Throws ValidationError listing all violated constraints.
void validate(const GbmModel& model, bool requires_positive_net_drift);

/// Increasing and decreasing solutions x^psi_exp, x^phi_exp of A u = q u,
/// together with the Wronskian B_q = psi_exp - phi_exp.
struct HarmonicPair {
    double discount = 0.0;
    double psi_exp = 0.0;
    double phi_exp = 0.0;
    double wronskian = 0.0;
};

HarmonicPair harmonic_pair(const GbmModel& model, double discount);

/// Closed-form exponents for discount r (b, a) and r + lambda (beta, alpha).
struct Exponents {
    double b = 0.0;
    double a = 0.0;
    double beta = 0.0;
    double alpha = 0.0;
    double kappa = 0.0;  // beta - b
    double gamma = 0.0;  // s_{r+lambda} + s_r
    double wronskian_r = 0.0;
    double wronskian_rl = 0.0;
};

Exponents derive_exponents(const GbmModel& model);

/// Reference configuration (r = 0.05, mu = 0.008, sigma = 0.125, lambda = 0.1, K = 2)
/// behind the published threshold table.
GbmModel reference_model();

}  // namespace mstop
