#include "mstop/powerfn.hpp"

#include "mstop/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Antiderivative of y^s (ln y)^k, as power-log terms in y.
PiecewisePowerSum::Piece antiderivative(double s, int k) {
    PiecewisePowerSum::Piece out;
    if (std::abs(s + 1.0) < kLogSnapTol) {
        out.push_back({1.0 / (k + 1), 0.0, k + 1});
        return out;
    }
    const double up = s + 1.0;
    double c = 1.0 / up;
    for (int j = k; j >= 0; --j) {
        out.push_back({c, up, j});
        c *= -static_cast<double>(j) / up;
    }
    return out;
}

double eval_terms(const PiecewisePowerSum::Piece& terms, double x) {
    double sum = 0.0;
    for (const auto& t : terms) sum += eval_term(t, x);
    return sum;
}

// int_lo^hi y^s (ln y)^k dy with lo possibly 0 and hi possibly +inf.
double definite_power_integral(double s, int k, double lo, double hi) {
    const bool log_case = std::abs(s + 1.0) < kLogSnapTol;
    if (lo == 0.0) {
        if (log_case)
            throw ResolventError(ResolventErrorKind::Resonance, s,
                                 "log-divergent power integral at 0 (y^" + fmt(s) + ")");
        if (s + 1.0 < 0.0)
            throw ResolventError(ResolventErrorKind::Divergence, s,
                                 "power integral diverges at 0 (y^" + fmt(s) + ")");
    }
    if (std::isinf(hi)) {
        if (log_case)
            throw ResolventError(ResolventErrorKind::Resonance, s,
                                 "log-divergent power integral at infinity (y^" + fmt(s) + ")");
        if (s + 1.0 > 0.0)
            throw ResolventError(ResolventErrorKind::Divergence, s,
                                 "power integral diverges at infinity (y^" + fmt(s) + ")");
    }
    if (!(hi > lo)) return 0.0;
    const auto anti = antiderivative(s, k);
    const double upper = std::isinf(hi) ? 0.0 : eval_terms(anti, hi);
    const double lower = lo == 0.0 ? 0.0 : eval_terms(anti, lo);
    return upper - lower;
}

// Sum of c * int_lo^hi y^{e+shift} (ln y)^k over the terms of a piece.
double piece_integral(const PiecewisePowerSum::Piece& piece, double shift, double lo,
                      double hi) {
    double sum = 0.0;
    for (const auto& t : piece)
        sum += t.coef * definite_power_integral(t.exponent + shift, t.log_power, lo, hi);
    return sum;
}

}  // namespace

double eval_term(const PowerTerm& t, double x) {
    double v = t.coef * std::pow(x, t.exponent);
    if (t.log_power != 0) v *= std::pow(std::log(x), t.log_power);
    return v;
}

PiecewisePowerSum::Piece canonicalize(PiecewisePowerSum::Piece terms) {
    PiecewisePowerSum::Piece out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
        auto it = std::find_if(out.begin(), out.end(), [&](const PowerTerm& o) {
            return o.log_power == t.log_power &&
                   std::abs(o.exponent - t.exponent) <= kExponentMergeTol;
        });
        if (it == out.end())
            out.push_back(t);
        else
            it->coef += t.coef;
    }
    std::erase_if(out, [](const PowerTerm& t) { return !(std::abs(t.coef) >= kCoefFloor); });
    std::sort(out.begin(), out.end(), [](const PowerTerm& l, const PowerTerm& r) {
        if (l.exponent != r.exponent) return l.exponent < r.exponent;
        return l.log_power < r.log_power;
    });
    return out;
}

PiecewisePowerSum::PiecewisePowerSum() : pieces_(1) {}

PiecewisePowerSum::PiecewisePowerSum(std::vector<double> breakpoints, std::vector<Piece> pieces)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    if (pieces_.size() != breakpoints_.size() + 1)
        throw std::invalid_argument("piecewise power sum needs breakpoints.size() + 1 pieces");
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        const double x = breakpoints_[i];
        if (!std::isfinite(x) || !(x > 0.0))
            throw std::invalid_argument("breakpoints must be finite and positive");
        if (i > 0 && !(x > breakpoints_[i - 1]))
            throw std::invalid_argument("breakpoints must be strictly increasing");
    }
    for (auto& piece : pieces_) {
        for (const auto& t : piece) {
            if (!std::isfinite(t.coef) || !std::isfinite(t.exponent) || t.log_power < 0)
                throw std::invalid_argument("power terms must be finite with log_power >= 0");
        }
        piece = canonicalize(std::move(piece));
    }
}

PiecewisePowerSum PiecewisePowerSum::constant(double c) { return from_terms({{c, 0.0, 0}}); }

PiecewisePowerSum PiecewisePowerSum::power(double coef, double exponent) {
    return from_terms({{coef, exponent, 0}});
}

PiecewisePowerSum PiecewisePowerSum::from_terms(Piece terms) {
    return PiecewisePowerSum({}, {std::move(terms)});
}

std::size_t PiecewisePowerSum::piece_index(double x) const {
    return static_cast<std::size_t>(
        std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x) - breakpoints_.begin());
}

double PiecewisePowerSum::operator()(double x) const {
    if (!(x > 0.0)) throw std::domain_error("power sum evaluated at x <= 0 (x = " + fmt(x) + ")");
    return eval_terms(pieces_[piece_index(x)], x);
}

double PiecewisePowerSum::eval_piece(std::size_t index, double x) const {
    return eval_terms(pieces_.at(index), x);
}

bool PiecewisePowerSum::is_zero() const noexcept {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const Piece& p) { return p.empty(); });
}

PiecewisePowerSum combine(const PiecewisePowerSum& f, const PiecewisePowerSum& g, double cf,
                          double cg) {
    std::vector<double> merged;
    std::set_union(f.breakpoints().begin(), f.breakpoints().end(), g.breakpoints().begin(),
                   g.breakpoints().end(), std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    std::vector<PiecewisePowerSum::Piece> pieces(merged.size() + 1);
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        const std::size_t fi = j < merged.size() ? f.piece_index(merged[j]) : f.piece_count() - 1;
        const std::size_t gi = j < merged.size() ? g.piece_index(merged[j]) : g.piece_count() - 1;
        auto& out = pieces[j];
        for (auto t : f.pieces()[fi]) out.push_back({cf * t.coef, t.exponent, t.log_power});
        for (auto t : g.pieces()[gi]) out.push_back({cg * t.coef, t.exponent, t.log_power});
    }
    return PiecewisePowerSum(std::move(merged), std::move(pieces));
}

PiecewisePowerSum operator+(const PiecewisePowerSum& f, const PiecewisePowerSum& g) {
    return combine(f, g, 1.0, 1.0);
}

PiecewisePowerSum operator-(const PiecewisePowerSum& f, const PiecewisePowerSum& g) {
    return combine(f, g, 1.0, -1.0);
}

PiecewisePowerSum operator*(double c, const PiecewisePowerSum& f) {
    return combine(f, PiecewisePowerSum(), c, 0.0);
}

namespace {

// d/dx of c x^e L^k = c x^{e-1} (e L^k + k L^{k-1}).
template <class TermMap>
PiecewisePowerSum map_terms(const PiecewisePowerSum& f, TermMap&& map) {
    std::vector<PiecewisePowerSum::Piece> pieces;
    pieces.reserve(f.piece_count());
    for (const auto& piece : f.pieces()) {
        PiecewisePowerSum::Piece out;
        for (const auto& t : piece) map(t, out);
        pieces.push_back(std::move(out));
    }
    return PiecewisePowerSum(f.breakpoints(), std::move(pieces));
}

}  // namespace

PiecewisePowerSum derivative(const PiecewisePowerSum& f) {
    return ratio_derivative(f, 0.0);
}

PiecewisePowerSum ratio_derivative(const PiecewisePowerSum& f, double p) {
    return map_terms(f, [p](const PowerTerm& t, PiecewisePowerSum::Piece& out) {
        const double e = t.exponent - p;
        out.push_back({t.coef * e, e - 1.0, t.log_power});
        if (t.log_power > 0) out.push_back({t.coef * t.log_power, e - 1.0, t.log_power - 1});
    });
}

PiecewisePowerSum times_power(const PiecewisePowerSum& f, double p) {
    return map_terms(f, [p](const PowerTerm& t, PiecewisePowerSum::Piece& out) {
        out.push_back({t.coef, t.exponent + p, t.log_power});
    });
}

PiecewisePowerSum generator_apply(const PiecewisePowerSum& f, const GbmModel& m) {
    const double half_s2 = 0.5 * m.sigma * m.sigma;
    return map_terms(f, [&](const PowerTerm& t, PiecewisePowerSum::Piece& out) {
        const double e = t.exponent;
        const int k = t.log_power;
        // x^2 u'' = x^e [e(e-1) L^k + k(2e-1) L^{k-1} + k(k-1) L^{k-2}],  x u' = x^e [e L^k + k L^{k-1}]
        out.push_back({t.coef * (half_s2 * e * (e - 1.0) + m.mu * e), e, k});
        if (k >= 1) out.push_back({t.coef * k * (half_s2 * (2.0 * e - 1.0) + m.mu), e, k - 1});
        if (k >= 2) out.push_back({t.coef * half_s2 * k * (k - 1), e, k - 2});
    });
}

PiecewisePowerSum splice(const PiecewisePowerSum& lower, const PiecewisePowerSum& upper,
                         double at) {
    const auto& lb = lower.breakpoints();
    const auto& ub = upper.breakpoints();
    const auto below = static_cast<std::size_t>(std::lower_bound(lb.begin(), lb.end(), at) - lb.begin());
    const auto above = static_cast<std::size_t>(std::upper_bound(ub.begin(), ub.end(), at) - ub.begin());

    std::vector<double> bps(lb.begin(), lb.begin() + static_cast<std::ptrdiff_t>(below));
    bps.push_back(at);
    bps.insert(bps.end(), ub.begin() + static_cast<std::ptrdiff_t>(above), ub.end());

    std::vector<PiecewisePowerSum::Piece> pieces(lower.pieces().begin(),
                                                 lower.pieces().begin() + static_cast<std::ptrdiff_t>(below) + 1);
    pieces.insert(pieces.end(), upper.pieces().begin() + static_cast<std::ptrdiff_t>(above),
                  upper.pieces().end());
    return PiecewisePowerSum(std::move(bps), std::move(pieces));
}

double integrate(const PiecewisePowerSum& f, double lo, double hi) {
    if (!(lo >= 0.0) || !(hi >= lo)) throw std::invalid_argument("integrate needs 0 <= lo <= hi");
    const auto& bps = f.breakpoints();
    double sum = 0.0;
    for (std::size_t j = 0; j < f.piece_count(); ++j) {
        const double left = j == 0 ? 0.0 : bps[j - 1];
        const double right = j < bps.size() ? bps[j] : kInf;
        const double a = std::max(left, lo);
        const double b = std::min(right, hi);
        if (!(b > a)) continue;
        sum += piece_integral(f.pieces()[j], 0.0, a, b);
    }
    return sum;
}

PiecewisePowerSum resolvent_apply(const PiecewisePowerSum& f, const HarmonicPair& kernel,
                                  const GbmModel& model) {
    const double psi = kernel.psi_exp;
    const double phi = kernel.phi_exp;
    const double speed = model.speed_exponent();
    const double scale = model.speed_coefficient() / kernel.wronskian;

    const auto& front = f.pieces().front();
    for (const auto& t : front) {
        const double gap = t.exponent - phi;
        if (std::abs(gap) < kLogSnapTol)
            throw ResolventError(ResolventErrorKind::Resonance, t.exponent,
                                 "resonant exponent " + fmt(t.exponent) +
                                     " equals phi_q exponent on the leftmost piece");
        if (gap < 0.0)
            throw ResolventError(ResolventErrorKind::Divergence, t.exponent,
                                 "exponent " + fmt(t.exponent) + " <= phi_q exponent " +
                                     fmt(phi) + " on the leftmost piece");
    }
    for (const auto& t : f.pieces().back()) {
        const double gap = psi - t.exponent;
        if (std::abs(gap) < kLogSnapTol)
            throw ResolventError(ResolventErrorKind::Resonance, t.exponent,
                                 "resonant exponent " + fmt(t.exponent) +
                                     " equals psi_q exponent on the rightmost piece");
        if (gap < 0.0)
            throw ResolventError(ResolventErrorKind::Divergence, t.exponent,
                                 "exponent " + fmt(t.exponent) + " >= psi_q exponent " +
                                     fmt(psi) + " on the rightmost piece");
    }

    // Integrands: psi_q f m' ~ y^{e + psi + speed}, phi_q f m' ~ y^{e + phi + speed}.
    const double shift_psi = psi + speed;
    const double shift_phi = phi + speed;
    const auto& bps = f.breakpoints();
    const std::size_t n = f.piece_count();
    auto left_of = [&](std::size_t j) { return j == 0 ? 0.0 : bps[j - 1]; };
    auto right_of = [&](std::size_t j) { return j < bps.size() ? bps[j] : kInf; };

    // Only bounded pieces enter the constants: full_psi is never needed on the
    // last piece and full_phi never on the first, where they may diverge.
    std::vector<double> full_psi(n), full_phi(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (j + 1 < n)
            full_psi[j] = piece_integral(f.pieces()[j], shift_psi, left_of(j), right_of(j));
        if (j > 0)
            full_phi[j] = piece_integral(f.pieces()[j], shift_phi, left_of(j), right_of(j));
    }

    std::vector<PiecewisePowerSum::Piece> pieces(n);
    for (std::size_t J = 0; J < n; ++J) {
        const auto& src = f.pieces()[J];
        auto& out = pieces[J];
        const double left = left_of(J);
        const double right = right_of(J);

        // Variable-limit parts phi(x) F_psi(x) - psi(x) F_phi(x). Exponents
        // recombine to e exactly since psi + phi + speed + 1 = 0.
        for (const auto& t : src) {
            for (const auto& a : antiderivative(t.exponent + shift_psi, t.log_power))
                out.push_back({scale * t.coef * a.coef, t.exponent, a.log_power});
            for (const auto& a : antiderivative(t.exponent + shift_phi, t.log_power))
                out.push_back({-scale * t.coef * a.coef, t.exponent, a.log_power});
        }

        double lower_const = 0.0;
        for (std::size_t j = 0; j < J; ++j) lower_const += full_psi[j];
        if (J > 0) {
            for (const auto& t : src)
                for (const auto& a : antiderivative(t.exponent + shift_psi, t.log_power))
                    lower_const -= t.coef * eval_term(a, left);
        }
        double upper_const = 0.0;
        for (std::size_t j = J + 1; j < n; ++j) upper_const += full_phi[j];
        if (J + 1 < n) {
            for (const auto& t : src)
                for (const auto& a : antiderivative(t.exponent + shift_phi, t.log_power))
                    upper_const += t.coef * eval_term(a, right);
        }
        out.push_back({scale * lower_const, phi, 0});
        out.push_back({scale * upper_const, psi, 0});
    }
    return PiecewisePowerSum(bps, std::move(pieces));
}

PiecewisePowerSum resolvent_apply(const PiecewisePowerSum& f, const GbmModel& model,
                                  double discount) {
    return resolvent_apply(f, harmonic_pair(model, discount), model);
}

PiecewisePowerSum call_payoff(double strike) {
    return PiecewisePowerSum({strike}, {{}, {{1.0, 1.0, 0}, {-strike, 0.0, 0}}});
}

double max_abs_coef(const PiecewisePowerSum& f) {
    double m = 0.0;
    for (const auto& piece : f.pieces())
        for (const auto& t : piece) m = std::max(m, std::abs(t.coef));
    return m;
}

}  // namespace mstop
