#pragma once

#include "mstop/finite.hpp"
#include "mstop/model.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace mstop {

/// Counter-based SplitMix64 stream. Each (seed, path, stage) triple gets an
/// independent substream, so results do not depend on how paths are split
/// across workers or on how many draws other stages consumed.
class PathRng {
public:
    using result_type = std::uint64_t;

    PathRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stage);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

private:
    std::uint64_t state_;
};

/// Threshold policy: thresholds[i - 1] is the exercise level while i rights
/// remain, so a policy with N thresholds starts at thresholds[N - 1].
struct PolicySpec {
    std::vector<double> thresholds;
    double x0 = 0.0;
    /// Rights still unexercised once accumulated time passes the cap are abandoned.
    std::optional<double> horizon_cap;
};

void validate(const PolicySpec& policy);

struct McEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    /// exercised_counts[k] = number of paths that exercised exactly k rights.
    std::vector<std::size_t> exercised_counts;
    /// Payoffs whose discount factor overflowed and were clamped to 0.
    std::size_t clamped = 0;
};

/// Exact first passage time of X (GBM, net drift nu = mu - sigma^2/2 > 0)
/// from x up to level: inverse Gaussian with mean d / nu and shape d^2 / sigma^2,
/// d = ln(level / x), sampled by the Michael-Schucany-Haas transformation.
/// Returns 0 when x == level; throws std::invalid_argument when x > level or nu <= 0.
double sample_first_passage(const GbmModel& model, double x, double level, PathRng& rng);

/// Discounted payoff of every path, ordered by path index.
std::vector<double> simulate_path_values(const GbmModel& model, const PolicySpec& policy,
                                         std::size_t n_paths, std::uint64_t seed,
                                         unsigned workers = 1,
                                         std::vector<std::size_t>* exercised_counts = nullptr,
                                         std::size_t* clamped = nullptr);

/// Expected discounted total payoff of the policy. Exercise happens at the
/// threshold when it is reached from below, immediately when the state is
/// already above it; after every exercise but the last an Exp(lambda)
/// refraction period passes and the state moves lognormally.
/// Bit-identical for fixed (seed, n_paths) regardless of `workers`.
McEstimate simulate_policy(const GbmModel& model, const PolicySpec& policy, std::size_t n_paths,
                           std::uint64_t seed, unsigned workers = 1);

/// Paired comparison on common random numbers.
struct PolicyComparison {
    double mean_base = 0.0;
    double mean_alt = 0.0;
    double diff = 0.0;     // mean_alt - mean_base
    double diff_se = 0.0;  // standard error of the paired difference
};

PolicyComparison compare_policies(const GbmModel& model, const PolicySpec& base,
                                  const PolicySpec& alt, std::size_t n_paths, std::uint64_t seed,
                                  unsigned workers = 1);

struct DominanceVariant {
    std::size_t rights = 0;  // which threshold was shifted (1-based, rights remaining)
    int direction = 0;       // +1 or -1
    std::vector<double> thresholds;
    double mean = 0.0;
    double diff = 0.0;  // variant - optimal
    double diff_se = 0.0;
    bool beats_optimal = false;  // diff > 3 diff_se
};

struct DominanceReport {
    McEstimate optimal;
    double perturbation = 0.0;
    std::vector<DominanceVariant> variants;
    bool ok = false;
};

/// Shifts each threshold by +-perturbation (relative) and compares against the
/// ladder's policy on common random numbers. A variant that beats the ladder
/// by more than 3 joint standard errors is reported, not thrown.
DominanceReport policy_dominance_scan(const GbmModel& model, const ThresholdLadder& ladder,
                                      double x0, double perturbation, std::size_t n_paths,
                                      std::uint64_t seed, unsigned workers = 1);

}  // namespace mstop
