#include "mstop/mc.hpp"

#include "mstop/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace mstop {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct PathOutcome {
    double value = 0.0;
    std::size_t exercised = 0;
    bool clamped = false;
};

PathOutcome run_path(const GbmModel& m, const PolicySpec& policy, std::uint64_t seed,
                     std::uint64_t path) {
    const double nu = m.net_drift();
    const std::size_t n = policy.thresholds.size();
    double state = policy.x0;
    double t = 0.0;
    PathOutcome out;
    for (std::size_t remaining = n; remaining >= 1; --remaining) {
        PathRng rng(seed, path, n - remaining);
        const double level = policy.thresholds[remaining - 1];
        if (state < level) {
            t += sample_first_passage(m, state, level, rng);
            state = level;
        }
        if (policy.horizon_cap && t > *policy.horizon_cap) break;

        const double discount = std::exp(-m.rate * t);
        const double payoff = std::max(state - m.strike, 0.0) * discount;
        if (std::isfinite(payoff)) {
            out.value += payoff;
        } else {
            out.clamped = true;
        }
        ++out.exercised;

        if (remaining > 1) {
            std::exponential_distribution<double> refraction(m.lambda);
            std::normal_distribution<double> normal;
            const double u = refraction(rng);
            t += u;
            state *= std::exp(nu * u + m.sigma * std::sqrt(u) * normal(rng));
        }
    }
    return out;
}

struct Moments {
    double mean = 0.0;
    double std_err = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments out;
    if (v.empty()) return out;
    double sum = 0.0;
    for (double x : v) sum += x;
    out.mean = sum / static_cast<double>(v.size());
    if (v.size() < 2) return out;
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    out.std_err = std::sqrt(var / static_cast<double>(v.size()));
    return out;
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stage)
    : state_(mix64(mix64(seed + kGolden) ^ mix64(path * 2 + 1) ^ mix64((stage + 1) * kGolden))) {}

PathRng::result_type PathRng::operator()() {
    state_ += kGolden;
    return mix64(state_);
}

double PathRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

void validate(const PolicySpec& policy) {
    std::vector<std::string> v;
    if (policy.thresholds.empty()) v.emplace_back("policy needs at least one threshold");
    for (double t : policy.thresholds)
        if (!(t > 0.0) || !std::isfinite(t)) {
            v.emplace_back("thresholds must be positive and finite");
            break;
        }
    if (!(policy.x0 > 0.0) || !std::isfinite(policy.x0)) v.emplace_back("x0 > 0 violated");
    if (policy.horizon_cap && !(*policy.horizon_cap >= 0.0))
        v.emplace_back("horizon_cap must be nonnegative");
    if (!v.empty()) throw ValidationError(std::move(v));
}

double sample_first_passage(const GbmModel& model, double x, double level, PathRng& rng) {
    if (x > level) throw std::invalid_argument("first passage: state already above level");
    const double nu = model.net_drift();
    if (!(nu > 0.0)) throw std::invalid_argument("first passage: net drift must be positive");
    if (x == level) return 0.0;

    const double d = std::log(level / x);
    const double mean = d / nu;
    const double shape = d * d / (model.sigma * model.sigma);

    std::normal_distribution<double> normal;
    const double z = normal(rng);
    const double w = mean * z * z / (2.0 * shape);
    // mean * (1 + w - sqrt(w^2 + 2w)), rewritten without cancellation.
    const double candidate = mean / (1.0 + w + std::sqrt(w * w + 2.0 * w));
    const double u = rng.uniform();
    return u <= mean / (mean + candidate) ? candidate : mean * mean / candidate;
}

std::vector<double> simulate_path_values(const GbmModel& model, const PolicySpec& policy,
                                         std::size_t n_paths, std::uint64_t seed,
                                         unsigned workers,
                                         std::vector<std::size_t>* exercised_counts,
                                         std::size_t* clamped) {
    validate(model, true);
    validate(policy);
    if (n_paths == 0) throw std::invalid_argument("n_paths must be at least 1");

    std::vector<double> values(n_paths);
    std::vector<unsigned char> exercised(n_paths);
    std::vector<unsigned char> clamp_flags(n_paths);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const auto o = run_path(model, policy, seed, p);
            values[p] = o.value;
            exercised[p] = static_cast<unsigned char>(std::min<std::size_t>(o.exercised, 255));
            clamp_flags[p] = o.clamped ? 1 : 0;
        }
    };

    workers = std::max(1u, workers);
    if (workers == 1 || n_paths < 2 * workers) {
        work(0, n_paths);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n_paths + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n_paths, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }

    if (exercised_counts) {
        exercised_counts->assign(policy.thresholds.size() + 1, 0);
        for (auto e : exercised) ++(*exercised_counts)[e];
    }
    if (clamped) *clamped = static_cast<std::size_t>(std::count(clamp_flags.begin(), clamp_flags.end(), 1));
    return values;
}

McEstimate simulate_policy(const GbmModel& model, const PolicySpec& policy, std::size_t n_paths,
                           std::uint64_t seed, unsigned workers) {
    McEstimate est;
    const auto values =
        simulate_path_values(model, policy, n_paths, seed, workers, &est.exercised_counts, &est.clamped);
    const auto mom = moments(values);
    est.mean = mom.mean;
    est.std_err = mom.std_err;
    est.n_paths = n_paths;
    est.seed = seed;
    return est;
}

PolicyComparison compare_policies(const GbmModel& model, const PolicySpec& base,
                                  const PolicySpec& alt, std::size_t n_paths, std::uint64_t seed,
                                  unsigned workers) {
    const auto vb = simulate_path_values(model, base, n_paths, seed, workers);
    auto va = simulate_path_values(model, alt, n_paths, seed, workers);
    PolicyComparison c;
    c.mean_base = moments(vb).mean;
    c.mean_alt = moments(va).mean;
    for (std::size_t i = 0; i < n_paths; ++i) va[i] -= vb[i];
    const auto d = moments(va);
    c.diff = d.mean;
    c.diff_se = d.std_err;
    return c;
}

DominanceReport policy_dominance_scan(const GbmModel& model, const ThresholdLadder& ladder,
                                      double x0, double perturbation, std::size_t n_paths,
                                      std::uint64_t seed, unsigned workers) {
    if (!(perturbation > 0.0 && perturbation <= 0.2))
        throw std::invalid_argument("perturbation must lie in (0, 0.2]");

    const PolicySpec optimal{ladder.thresholds, x0, std::nullopt};
    DominanceReport rep;
    rep.perturbation = perturbation;
    const auto base = simulate_path_values(model, optimal, n_paths, seed, workers,
                                           &rep.optimal.exercised_counts, &rep.optimal.clamped);
    const auto mb = moments(base);
    rep.optimal.mean = mb.mean;
    rep.optimal.std_err = mb.std_err;
    rep.optimal.n_paths = n_paths;
    rep.optimal.seed = seed;

    rep.ok = true;
    for (std::size_t i = 0; i < ladder.thresholds.size(); ++i) {
        for (int dir : {+1, -1}) {
            DominanceVariant var;
            var.rights = i + 1;
            var.direction = dir;
            var.thresholds = ladder.thresholds;
            var.thresholds[i] *= 1.0 + dir * perturbation;
            auto values = simulate_path_values(model, PolicySpec{var.thresholds, x0, std::nullopt},
                                               n_paths, seed, workers);
            var.mean = moments(values).mean;
            for (std::size_t p = 0; p < n_paths; ++p) values[p] -= base[p];
            const auto d = moments(values);
            var.diff = d.mean;
            var.diff_se = d.std_err;
            var.beats_optimal = var.diff > 3.0 * var.diff_se;
            rep.ok = rep.ok && !var.beats_optimal;
            rep.variants.push_back(std::move(var));
        }
    }
    return rep;
}

}  // namespace mstop
