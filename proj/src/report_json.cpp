#include "captive/report_json.hpp"

namespace captive {

namespace {

Json counterexample(const Counterexample& c) {
  return Json{{"index", c.index}, {"time", c.time},   {"x", c.x},
              {"value", c.value}, {"bound", c.bound}, {"detail", c.detail}};
}

}  // namespace

Json to_json(const PairReport& r) {
  Json j{{"ok", r.ok}, {"max_snap_distance", r.max_snap_distance}};
  if (r.violation) {
    const PairViolation& v = *r.violation;
    j["violation"] = Json{{"index", v.index}, {"time", v.time},
                          {"lower", v.lower}, {"upper", v.upper},
                          {"left_limit", v.left_limit}};
  } else {
    j["violation"] = nullptr;
  }
  return j;
}

Json to_json(const ConditionCheck& c) {
  Json j{{"name", c.name}, {"passed", c.passed}};
  j["counterexample"] = c.first ? counterexample(*c.first) : Json(nullptr);
  return j;
}

Json to_json(const AdmissibilityReport& r) {
  return Json{{"family", r.family},
              {"ok", r.ok()},
              {"conditions", Json::array({to_json(r.parameters), to_json(r.drift),
                                          to_json(r.vol), to_json(r.jump)})},
              {"grid_points", r.grid_points},
              {"x_samples", r.x_samples},
              {"vol_tolerance", r.vol_tolerance},
              {"drift_slack", r.drift_slack}};
}

Json to_json(const MonotoneReport& r) {
  Json j{{"applies", r.applies}, {"ok", r.ok}};
  j["counterexample"] = r.first ? counterexample(*r.first) : Json(nullptr);
  return j;
}

Json to_json(const ValidationReport& r) {
  Json j{{"ok", r.ok()}};
  j["config_error"] = r.config_error ? Json(*r.config_error) : Json(nullptr);
  j["pair"] = to_json(r.pair);
  j["admissibility"] = to_json(r.admissibility);
  j["monotone_bounds"] = to_json(r.monotone);
  return j;
}

Json to_json(const CorridorReport& r) {
  Json j{{"ok", r.ok()}};
  j["config_error"] = r.config_error ? Json(*r.config_error) : Json(nullptr);
  j["conditions"] = Json::array({to_json(r.ordering), to_json(r.drift)});
  j["grid_points"] = r.grid_points;
  return j;
}

}  // namespace captive
