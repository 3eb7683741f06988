#include "mstop/quadrature.hpp"

#include "mstop/error.hpp"
#include "mstop/infinite.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

namespace mstop {

namespace {

// Kronrod 15-point nodes (non-negative half) and weights; the embedded
// 7-point Gauss rule uses the odd-indexed nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    int depth;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const RealFunction& h, double a, double b, int depth) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = h(mid);
    double kronrod = kKronrod[7] * fc;
    double gauss = kGauss[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kNodes[static_cast<std::size_t>(i)];
        const double pair = h(mid - dx) + h(mid + dx);
        kronrod += kKronrod[static_cast<std::size_t>(i)] * pair;
        if (i % 2 == 1) gauss += kGauss[static_cast<std::size_t>(i / 2)] * pair;
    }
    kronrod *= half;
    gauss *= half;
    if (!std::isfinite(kronrod)) throw QuadratureError("non-finite integrand value");
    return {a, b, kronrod, std::abs(kronrod - gauss), depth};
}

constexpr double kMaxLogSpan = 120.0;  // |u - ln x| cut-off; y^5 stays finite
constexpr double kChunk = 4.0;

// Integral of h over a tail starting at `start` and running in `dir` (+1 to
// +inf, -1 to -inf), split at `hints`. The tail beyond the last chunk is
// bounded by |h(cut)| / rate with the local exponential decay rate of h.
QuadResult tail_integral(const RealFunction& h, double start, int dir, std::vector<double> hints,
                         const QuadSpec& spec) {
    std::erase_if(hints, [&](double u) { return dir * (u - start) <= 0.0; });
    std::sort(hints.begin(), hints.end(), [dir](double l, double r) { return dir * l < dir * r; });
    const double last_hint = hints.empty() ? start : hints.back();

    QuadResult total;
    double cut = start;
    std::size_t next_hint = 0;
    while (true) {
        const double target = cut + dir * kChunk;
        // Split the chunk at any hints it contains.
        double from = cut;
        while (next_hint < hints.size() && dir * (hints[next_hint] - target) < 0.0) {
            const auto r = adaptive_integrate(h, std::min(from, hints[next_hint]),
                                              std::max(from, hints[next_hint]), spec);
            total.value += r.value;
            total.error_estimate += r.error_estimate;
            from = hints[next_hint++];
        }
        const auto r = adaptive_integrate(h, std::min(from, target), std::max(from, target), spec);
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        cut = target;

        if (dir * (cut - last_hint) >= 0.0) {
            const double h_cut = std::abs(h(cut));
            const double h_in = std::abs(h(cut - dir * 0.5));
            double bound;
            if (h_cut == 0.0 && h_in == 0.0) {
                bound = 0.0;
            } else {
                const double rate = std::log(h_in / h_cut) / 0.5;
                bound = rate > 1e-3 ? 2.0 * h_cut / rate : std::numeric_limits<double>::infinity();
            }
            const double tol = std::max(spec.abs_tol, 0.1 * spec.rel_tol * std::abs(total.value));
            if (bound <= tol) {
                total.error_estimate += bound;
                return total;
            }
        }
        if (std::abs(cut - start) > kMaxLogSpan) {
            std::ostringstream os;
            os << "resolvent quadrature: integrand tail does not decay (cut at u = " << cut << ")";
            throw QuadratureError(os.str());
        }
    }
}

double x_hat_inf_of_model(const GbmModel& model, const Exponents& e) {
    return e.beta / (e.beta - 1.0) * model.strike;
}

}  // namespace

QuadResult adaptive_integrate(const RealFunction& h, double a, double b, const QuadSpec& spec) {
    if (!(b > a)) return {};
    std::priority_queue<Segment> heap;
    heap.push(gauss_kronrod(h, a, b, 0));
    double value = heap.top().value;
    double error = heap.top().error;
    constexpr std::size_t kMaxSegments = 20000;
    while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
        const Segment worst = heap.top();
        if (worst.depth >= spec.max_depth || heap.size() >= kMaxSegments) {
            std::ostringstream os;
            os.precision(17);
            os << "adaptive quadrature: tolerance not reached on [" << a << ", " << b
               << "], error estimate " << error;
            throw QuadratureError(os.str());
        }
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = gauss_kronrod(h, worst.a, mid, worst.depth + 1);
        const Segment right = gauss_kronrod(h, mid, worst.b, worst.depth + 1);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of incremental updates.
    value = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error};
}

QuadResult quad_resolvent(const RealFunction& f, const GbmModel& model, double discount, double x,
                          const QuadSpec& spec, std::span<const double> breakpoints) {
    if (!(x > 0.0)) throw std::domain_error("quad_resolvent needs x > 0");
    if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0) || spec.max_depth < 10)
        throw std::invalid_argument("QuadSpec needs positive tolerances and max_depth >= 10");

    const auto kernel = harmonic_pair(model, discount);
    const double speed = model.speed_exponent();
    // dy = y du, so the integrands pick up one extra power of y.
    const double k_psi = kernel.psi_exp + speed + 1.0;
    const double k_phi = kernel.phi_exp + speed + 1.0;
    auto lower = [&](double u) { return std::exp(k_psi * u) * f(std::exp(u)); };
    auto upper = [&](double u) { return std::exp(k_phi * u) * f(std::exp(u)); };

    std::vector<double> hints;
    for (double bp : breakpoints)
        if (bp > 0.0) hints.push_back(std::log(bp));

    const double ux = std::log(x);
    const auto lo = tail_integral(lower, ux, -1, hints, spec);
    const auto hi = tail_integral(upper, ux, +1, hints, spec);

    const double scale = model.speed_coefficient() / kernel.wronskian;
    const double w_lo = scale * std::pow(x, kernel.phi_exp);
    const double w_hi = scale * std::pow(x, kernel.psi_exp);
    return {w_lo * lo.value + w_hi * hi.value,
            std::abs(w_lo) * lo.error_estimate + std::abs(w_hi) * hi.error_estimate};
}

QuadResult quad_resolvent(const PiecewisePowerSum& f, const GbmModel& model, double discount,
                          double x, const QuadSpec& spec) {
    return quad_resolvent([&f](double y) { return f(y); }, model, discount, x, spec,
                          f.breakpoints());
}

QuadratureLadder solve_ladder_quadrature(const GbmModel& model, std::size_t n, double x0,
                                         const QuadSpec& spec) {
    if (!(x0 > 0.0)) throw std::domain_error("x0 must be positive");
    const auto ladder = solve_ladder(model, n);
    const auto e = derive_exponents(model);
    const auto g = call_payoff(model.strike);
    const double q = model.rate + model.lambda;
    const double x_hat = x_hat_inf_of_model(model, e);

    QuadratureLadder out;
    for (std::size_t i = 1; i <= n; ++i) {
        RealFunction h = [&g](double x) { return g(x); };
        if (i > 1) {
            const auto& v_prev = ladder.values[i - 2];
            h = [&, v_prev_ptr = &v_prev](double x) {
                return g(x) + model.lambda * quad_resolvent(*v_prev_ptr, model, q, x, spec).value;
            };
        }
        double x_star;
        if (i == 1) {
            x_star = e.b / (e.b - 1.0) * model.strike;
        } else {
            // Maximise H^i(x) / x^b over the admissible threshold range.
            const double hi = ladder.thresholds.front();
            auto neg_ratio = [&](double x) { return -h(x) / std::pow(x, e.b); };
            const auto best = boost::math::tools::brent_find_minima(neg_ratio, x_hat, hi, 40);
            x_star = best.first;
            out.deltas.push_back((e.b * (x_star - model.strike) - x_star) / std::pow(x_star, e.beta));
        }
        out.thresholds.push_back(x_star);
        const double value = x0 < x_star ? h(x_star) * std::pow(x0 / x_star, e.b) : h(x0);
        out.values_at_x0.push_back(value);
    }
    const auto density = riesz_density(model, x_hat);
    out.v_inf_at_x0 = quad_resolvent(density, model, model.rate, x0, spec).value;
    return out;
}

}  // namespace mstop
