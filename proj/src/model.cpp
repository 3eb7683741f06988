#include "mstop/model.hpp"

#include "mstop/error.hpp"

#include <cmath>
#include <sstream>

namespace mstop {

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::invalid_argument([&] {
          std::string msg = "invalid parameters:";
          for (const auto& v : violations) msg += " [" + v + "]";
          return msg;
      }()),
      violations_(std::move(violations)) {}

ResolventError::ResolventError(ResolventErrorKind kind, double exponent, const std::string& what)
    : std::domain_error(what), kind_(kind), exponent_(exponent) {}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

// s_q = sqrt((1/2 - mu/sigma^2)^2 + 2q/sigma^2)
double root_spread(const GbmModel& m, double q) {
    const double s2 = m.sigma * m.sigma;
    const double shift = 0.5 - m.mu / s2;
    return std::sqrt(shift * shift + 2.0 * q / s2);
}

}  // namespace

std::vector<std::string> check(const GbmModel& m, bool requires_positive_net_drift) {
    std::vector<std::string> out;
    for (auto [name, v] : {std::pair{"mu", m.mu}, {"sigma", m.sigma}, {"rate", m.rate},
                           {"lambda", m.lambda}, {"strike", m.strike}}) {
        if (!std::isfinite(v)) out.push_back(std::string(name) + " must be finite");
    }
    if (!out.empty()) return out;
    if (!(m.sigma > 0.0)) out.push_back("sigma > 0 violated (sigma = " + fmt(m.sigma) + ")");
    if (!(m.rate > 0.0)) out.push_back("r > 0 violated (r = " + fmt(m.rate) + ")");
    if (!(m.lambda > 0.0)) out.push_back("lambda > 0 violated (lambda = " + fmt(m.lambda) + ")");
    if (!(m.strike > 0.0)) out.push_back("strike > 0 violated (K = " + fmt(m.strike) + ")");
    if (!(m.mu < m.rate))
        out.push_back("mu < r violated (" + fmt(m.mu) + " >= " + fmt(m.rate) + ")");
    if (requires_positive_net_drift && !(m.net_drift() > 0.0)) {
        out.push_back("mu - sigma^2/2 > 0 violated (" + fmt(m.mu) + " <= " +
                      fmt(0.5 * m.sigma * m.sigma) + ")");
    }
    return out;
}

void validate(const GbmModel& model, bool requires_positive_net_drift) {
    auto v = check(model, requires_positive_net_drift);
    if (!v.empty()) throw ValidationError(std::move(v));
}

HarmonicPair harmonic_pair(const GbmModel& m, double discount) {
    const double shift = 0.5 - m.mu / (m.sigma * m.sigma);
    const double spread = root_spread(m, discount);
    return HarmonicPair{discount, shift + spread, shift - spread, 2.0 * spread};
}

Exponents derive_exponents(const GbmModel& m) {
    const double s2 = m.sigma * m.sigma;
    const double shift = 0.5 - m.mu / s2;
    const double s_r = root_spread(m, m.rate);
    const double s_rl = root_spread(m, m.rate + m.lambda);

    Exponents e;
    e.b = shift + s_r;
    e.a = shift - s_r;
    e.beta = shift + s_rl;
    e.alpha = shift - s_rl;
    e.gamma = s_rl + s_r;
    // s_rl^2 - s_r^2 = 2 lambda / sigma^2; avoids cancellation for small lambda.
    e.kappa = (2.0 * m.lambda / s2) / e.gamma;
    e.wronskian_r = 2.0 * s_r;
    e.wronskian_rl = 2.0 * s_rl;
    return e;
}

GbmModel reference_model() {
    return GbmModel{.mu = 0.008, .sigma = 0.125, .rate = 0.05, .lambda = 0.1, .strike = 2.0};
}

}  // namespace mstop
