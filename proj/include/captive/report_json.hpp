#pragma once

#include <json.hpp>

#include "captive/boundary.hpp"
#include "captive/coefficients.hpp"
#include "captive/corridors.hpp"
#include "captive/simulator.hpp"

namespace captive {

using Json = nlohmann::ordered_json;

Json to_json(const PairReport& r);
Json to_json(const ConditionCheck& c);
Json to_json(const AdmissibilityReport& r);
Json to_json(const MonotoneReport& r);
Json to_json(const ValidationReport& r);
Json to_json(const CorridorReport& r);

}  // namespace captive
