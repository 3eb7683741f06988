#include "mstop/json_io.hpp"

namespace mstop {

nlohmann::json to_json(const PiecewisePowerSum& f) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& piece : f.pieces()) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : piece) {
            nlohmann::json term{{"coef", t.coef}, {"exp", t.exponent}};
            if (t.log_power != 0) term["log"] = t.log_power;
            terms.push_back(std::move(term));
        }
        pieces.push_back(std::move(terms));
    }
    return {{"breakpoints", f.breakpoints()}, {"pieces", std::move(pieces)}};
}

PiecewisePowerSum power_sum_from_json(const nlohmann::json& j) {
    auto bps = j.at("breakpoints").get<std::vector<double>>();
    std::vector<PiecewisePowerSum::Piece> pieces;
    for (const auto& jp : j.at("pieces")) {
        PiecewisePowerSum::Piece piece;
        for (const auto& jt : jp)
            piece.push_back({jt.at("coef").get<double>(), jt.at("exp").get<double>(),
                             jt.value("log", 0)});
        pieces.push_back(std::move(piece));
    }
    return PiecewisePowerSum(std::move(bps), std::move(pieces));
}

nlohmann::json to_json(const GbmModel& m) {
    return {{"mu", m.mu}, {"sigma", m.sigma}, {"rate", m.rate}, {"lambda", m.lambda},
            {"strike", m.strike}};
}

nlohmann::json to_json(const Exponents& e) {
    return {{"b", e.b},
            {"a", e.a},
            {"beta", e.beta},
            {"alpha", e.alpha},
            {"kappa", e.kappa},
            {"gamma", e.gamma},
            {"wronskian_r", e.wronskian_r},
            {"wronskian_rl", e.wronskian_rl}};
}

}  // namespace mstop
