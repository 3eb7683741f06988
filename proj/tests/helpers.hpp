#pragma once

#include "mstop/model.hpp"
#include "mstop/powerfn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace mstop::testing {

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Model with mu < r and positive net drift.
inline GbmModel random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GbmModel m;
    m.rate = 0.02 + 0.08 * u(rng);
    m.sigma = std::sqrt(2.0 * m.rate * (0.1 + 0.7 * u(rng)));
    const double floor = 0.5 * m.sigma * m.sigma;
    m.mu = floor + (m.rate - floor) * (0.1 + 0.8 * u(rng));
    m.lambda = std::exp(std::log(0.01) + u(rng) * std::log(100.0));
    m.strike = 0.5 + 4.5 * u(rng);
    return m;
}

/// Random power sum admissible for R_q: exponents on the outer pieces stay
/// at least `margin` inside (phi_q, psi_q).
inline PiecewisePowerSum random_power_sum(std::mt19937_64& rng, const HarmonicPair& kernel,
                                          double margin = 0.3) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n_breaks = static_cast<int>(rng() % 3);
    std::vector<double> bps;
    for (int i = 0; i < n_breaks; ++i) bps.push_back(0.4 + 5.0 * u(rng));
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    std::vector<PiecewisePowerSum::Piece> pieces(bps.size() + 1);
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        const bool first = j == 0;
        const bool last = j + 1 == pieces.size();
        const double lo = first ? kernel.phi_exp + margin : -4.0;
        const double hi = last ? kernel.psi_exp - margin : 4.0;
        const int terms = 1 + static_cast<int>(rng() % 3);
        for (int t = 0; t < terms; ++t)
            pieces[j].push_back({-2.0 + 4.0 * u(rng), lo + (hi - lo) * u(rng), 0});
    }
    return PiecewisePowerSum(std::move(bps), std::move(pieces));
}

}  // namespace mstop::testing
