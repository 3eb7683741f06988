#include "mstop/infinite.hpp"

#include "mstop/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mstop {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("log grid needs 0 < lo < hi and at least 2 points");
    std::vector<double> out(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
    out.front() = lo;
    out.back() = hi;
    return out;
}

AuxiliarySolution solve_auxiliary(const GbmModel& model) {
    validate(model, false);
    const double beta = derive_exponents(model).beta;
    const double x_hat = beta / (beta - 1.0) * model.strike;
    const double c = (x_hat - model.strike) / std::pow(x_hat, beta);
    auto v_hat = splice(PiecewisePowerSum::power(c, beta), call_payoff(model.strike), x_hat);
    return {x_hat, std::move(v_hat)};
}

PiecewisePowerSum riesz_density(const GbmModel& model, double x_hat_inf) {
    const double q = model.rate + model.lambda;
    return PiecewisePowerSum({x_hat_inf},
                             {{}, {{q - model.mu, 1.0, 0}, {-model.strike * q, 0.0, 0}}});
}

InfiniteCoefficients closed_form_coefficients(const GbmModel& model, double x_hat_inf) {
    const auto e = derive_exponents(model);
    const double r = model.rate;
    const double q = r + model.lambda;
    const double K = model.strike;
    const double drift_ratio = 2.0 * model.mu / (model.sigma * model.sigma);
    const double front = model.speed_coefficient() / e.wronskian_r;

    // Both coefficients come from int y^p sigma(y) m'(y) dy evaluated at
    // x_hat_inf with p = b (for c3) or p = a (for c4).
    auto boundary_term = [&](double p) {
        return front * std::pow(x_hat_inf, p + drift_ratio - 1.0) *
               (-(q - model.mu) / (p + drift_ratio) * x_hat_inf +
                K * q / (p + drift_ratio - 1.0));
    };
    return InfiniteCoefficients{
        .c1 = (q - model.mu) / (r - model.mu),
        .c2 = -K * q / r,
        .c3 = boundary_term(e.b),
        .c4 = boundary_term(e.a),
    };
}

namespace {

double coef_of(const PiecewisePowerSum::Piece& piece, double exponent) {
    for (const auto& t : piece)
        if (t.log_power == 0 && std::abs(t.exponent - exponent) <= kExponentMergeTol) return t.coef;
    return 0.0;
}

// `scale` is the size the coefficient has to be judged against; c3 and c4
// can be tiny differences of O(1) terms (small lambda).
void reconcile(const char* name, double algebra, double closed, double scale = 0.0) {
    const double tol = 1e-9 * std::max({std::abs(closed), std::abs(algebra), scale});
    if (!(std::abs(algebra - closed) <= tol)) {
        std::ostringstream os;
        os.precision(17);
        os << "infinite solution: " << name << " mismatch (algebra " << algebra
           << ", closed form " << closed << ")";
        throw SolverError(os.str());
    }
}

}  // namespace

InfiniteSolution solve_infinite(const GbmModel& model) {
    auto aux = solve_auxiliary(model);
    const auto e = derive_exponents(model);
    auto sigma = riesz_density(model, aux.x_hat_inf);
    auto v = resolvent_apply(sigma, model, model.rate);
    const auto coeffs = closed_form_coefficients(model, aux.x_hat_inf);

    const auto& lower = v.pieces().front();
    const auto& upper = v.pieces().back();
    reconcile("c1", coef_of(upper, 1.0), coeffs.c1);
    reconcile("c2", coef_of(upper, 0.0), coeffs.c2);
    // Compare c3 x^a and c4 x^b at x_hat_inf against the affine part there.
    const double xh = aux.x_hat_inf;
    const double affine = std::abs(coeffs.c1) * xh + std::abs(coeffs.c2);
    reconcile("c3", coef_of(upper, e.a), coeffs.c3, affine / std::pow(xh, e.a));
    reconcile("c4", coef_of(lower, e.b), coeffs.c4, affine / std::pow(xh, e.b));
    if (upper.size() != 3 || lower.size() != 1)
        throw SolverError("infinite solution: unexpected terms in V_inf");

    return InfiniteSolution{aux.x_hat_inf, std::move(sigma), std::move(v), coeffs,
                            std::move(aux.v_hat)};
}

VerificationReport check_verification(const PiecewisePowerSum& v, const GbmModel& model,
                                      std::span<const double> grid) {
    const double x_hat = solve_auxiliary(model).x_hat_inf;
    const auto continuation = resolvent_apply(v, model, model.rate + model.lambda);
    const auto g = call_payoff(model.strike);

    VerificationReport rep;
    rep.grid.assign(grid.begin(), grid.end());
    rep.slack.reserve(grid.size());
    rep.min_slack = std::numeric_limits<double>::infinity();
    for (double x : grid) {
        const double s = v(x) - g(x) - model.lambda * continuation(x);
        rep.slack.push_back(s);
        rep.min_slack = std::min(rep.min_slack, s);
        if (x >= x_hat)
            rep.max_stopping_gap = std::max(rep.max_stopping_gap, std::abs(s));
        else if (!(s > 0.0))
            ++rep.non_strict_below;
    }
    rep.ok = rep.min_slack >= -kVerificationSlackTol &&
             rep.max_stopping_gap <= kVerificationEqualityTol;
    return rep;
}

}  // namespace mstop
