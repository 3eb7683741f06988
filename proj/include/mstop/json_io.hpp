#pragma once

#include "mstop/model.hpp"
#include "mstop/powerfn.hpp"

#include <json.hpp>

namespace mstop {

/// {"breakpoints":[...],"pieces":[[{"coef":c,"exp":p},...],...]}
/// Terms with a log factor additionally carry "log":k.
nlohmann::json to_json(const PiecewisePowerSum& f);
PiecewisePowerSum power_sum_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GbmModel& m);
nlohmann::json to_json(const Exponents& e);

}  // namespace mstop
