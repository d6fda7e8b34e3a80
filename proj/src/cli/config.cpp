#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "captive/cli.hpp"
#include "captive/transforms.hpp"

namespace captive::cli {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where, std::string("missing '") + key + "'");
  return j.at(key);
}

double num(const Json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(where, "expected a finite number");
  return v;
}

double num_or(const Json& j, const char* key, double def, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return def;
  return num(j.at(key), where + "." + key);
}

std::uint64_t count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) bad(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::uint64_t count_or(const Json& j, const char* key, std::uint64_t def, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return def;
  return count(j.at(key), where + "." + key);
}

std::string str(const Json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

std::string str_or(const Json& j, const char* key, const std::string& def, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return def;
  return str(j.at(key), where + "." + key);
}

BoundaryKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "lower") return BoundaryKind::lower_admissible;
  if (s == "upper") return BoundaryKind::upper_admissible;
  if (s == "continuous") return BoundaryKind::continuous;
  bad(where, "kind must be lower, upper or continuous");
}

Segment parse_segment(const Json& j, double horizon, const std::string& where) {
  Segment s;
  s.start = num_or(j, "start", 0.0, where);
  s.end = num_or(j, "end", horizon, where);
  const std::string shape = str(need(j, "shape", where), where + ".shape");
  if (shape == "constant") {
    s.shape = shape::Constant{num(need(j, "value", where), where + ".value")};
  } else if (shape == "linear") {
    s.shape = shape::Linear{num(need(j, "value", where), where + ".value"),
                            num(need(j, "slope", where), where + ".slope")};
  } else if (shape == "sinusoid") {
    s.shape = shape::Sinusoid{num_or(j, "amplitude", 0.0, where), num_or(j, "frequency", 0.0, where),
                              num_or(j, "phase", 0.0, where), num_or(j, "offset", 0.0, where)};
  } else if (shape == "table") {
    shape::Table t;
    const Json& times = need(j, "times", where);
    const Json& values = need(j, "values", where);
    if (!times.is_array() || !values.is_array()) bad(where, "table times/values must be arrays");
    for (std::size_t i = 0; i < times.size(); ++i) t.times.push_back(num(times[i], where + ".times"));
    for (std::size_t i = 0; i < values.size(); ++i) t.values.push_back(num(values[i], where + ".values"));
    s.shape = std::move(t);
  } else {
    bad(where, "unknown shape '" + shape + "'");
  }
  return s;
}

BoundaryFn parse_boundary(const Json& j, double horizon, const std::string& where) {
  if (j.is_number()) return BoundaryFn::constant(num(j, where), horizon);
  if (!j.is_object()) bad(where, "boundary must be a number or an object");
  const BoundaryKind kind = parse_kind(str_or(j, "kind", "continuous", where), where + ".kind");
  const double h = num_or(j, "horizon", horizon, where);
  std::vector<Segment> segs;
  if (j.contains("constant")) {
    segs.push_back({0.0, h, shape::Constant{num(j.at("constant"), where + ".constant")}});
  } else if (j.contains("linear")) {
    const Json& l = j.at("linear");
    segs.push_back({0.0, h, shape::Linear{num(need(l, "value", where), where + ".linear.value"),
                                          num(need(l, "slope", where), where + ".linear.slope")}});
  } else {
    const Json& arr = need(j, "segments", where);
    if (!arr.is_array() || arr.empty()) bad(where, "segments must be a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      segs.push_back(parse_segment(arr[i], h, where + ".segments[" + std::to_string(i) + "]"));
    }
  }
  std::vector<BoundaryJump> jumps;
  if (j.contains("jumps")) {
    const Json& arr = j.at("jumps");
    if (!arr.is_array()) bad(where, "jumps must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = where + ".jumps[" + std::to_string(i) + "]";
      jumps.push_back({num(need(arr[i], "time", w), w + ".time"), num(need(arr[i], "delta", w), w + ".delta")});
    }
  }
  return BoundaryFn(std::move(segs), std::move(jumps), kind);
}

ThetaSpec parse_theta(const Json& parent, const std::string& where) {
  if (!parent.is_object() || !parent.contains("theta")) return ThetaSpec::none();
  const Json& j = parent.at("theta");
  const std::string w = where + ".theta";
  const std::string kind = str(need(j, "kind", w), w + ".kind");
  ThetaSpec t;
  if (kind == "none") {
    t = ThetaSpec::none();
  } else if (kind == "uniform") {
    t = ThetaSpec::uniform(num_or(j, "lo", -1.0, w), num_or(j, "hi", 1.0, w));
  } else if (kind == "constant") {
    t = ThetaSpec::constant(num(need(j, "value", w), w + ".value"));
  } else {
    bad(w, "theta kind must be none, uniform or constant");
  }
  t.validate();
  return t;
}

JumpSpec parse_jump(const Json& j, const std::string& where) {
  JumpSpec s;
  if (j.is_null()) return s;
  s.intensity = num_or(j, "intensity", 0.0, where);
  const std::string c = str_or(j, "correlation", "independent", where);
  if (c == "independent") {
    s.correlation = JumpCorrelation::independent;
  } else if (c == "common") {
    s.correlation = JumpCorrelation::common;
  } else if (c == "thinned") {
    s.correlation = JumpCorrelation::thinned;
  } else {
    bad(where + ".correlation", "must be independent, common or thinned");
  }
  s.share = num_or(j, "share", 1.0, where);
  s.validate();
  return s;
}

BoundaryFn param(const Json& j, const char* key, double def, const RunConfig& rc, double horizon,
                 const std::string& where) {
  if (!j.contains(key)) return BoundaryFn::constant(def, horizon);
  const Json& v = j.at(key);
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    const auto it = rc.boundaries.find(name);
    if (it == rc.boundaries.end()) bad(where + "." + key, "unknown boundary '" + name + "'");
    return it->second;
  }
  return BoundaryFn::constant(num(v, where + "." + key), horizon);
}

CoefficientSet parse_coefficients(const Json& j, const RunConfig& rc, double horizon) {
  const std::string w = "coefficients";
  const std::string fam = str(need(j, "family", w), w + ".family");
  if (fam == "mean_reverting") {
    return CoefficientSet::mean_reverting(param(j, "kappa", 1.0, rc, horizon, w),
                                          param(j, "beta", 0.0, rc, horizon, w),
                                          param(j, "alpha", 1.0, rc, horizon, w),
                                          parse_theta(j, w));
  }
  if (fam == "trigonometric") return CoefficientSet::trigonometric(str_or(j, "variant", "sin", w));
  if (fam == "bounded") {
    return captive_from_bounded(
        std::make_shared<const BoundedMap>(builtin_bounded_map(str(need(j, "map", w), w + ".map"))));
  }
  if (fam == "pure_jump") return CoefficientSet::pure_jump(parse_theta(j, w));
  if (fam == "zero") return CoefficientSet::zero();
  bad(w + ".family", "unknown family '" + fam + "'");
}

PolarCoordinate parse_coordinate(const Json& j, PolarCoordinate def, const std::string& w) {
  PolarCoordinate c = def;
  c.lo = num_or(j, "lo", def.lo, w);
  c.hi = num_or(j, "hi", def.hi, w);
  c.beta = num_or(j, "beta", 0.5 * (c.lo + c.hi), w);
  c.kappa = num_or(j, "kappa", def.kappa, w);
  c.alpha = num_or(j, "alpha", def.alpha, w);
  if (j.contains("theta")) c.theta = parse_theta(j, w);
  if (j.contains("jump")) c.jumps = parse_jump(j.at("jump"), w + ".jump");
  return c;
}

}  // namespace

RunConfig parse_config(Json doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig rc;
  rc.doc = doc;
  const Json& sim = need(doc, "simulation", "config");
  const std::string sw = "simulation";
  rc.sim.dt = num(need(sim, "dt", sw), sw + ".dt");
  rc.sim.horizon = num(need(sim, "T", sw), sw + ".T");
  rc.sim.n_paths = count_or(sim, "n_paths", 1, sw);
  rc.sim.seed = count_or(sim, "seed", 0, sw);
  rc.sim.x0 = num_or(sim, "x0", 0.0, sw);
  rc.sim.clamp_tolerance = num_or(sim, "clamp_tolerance", 1e-9, sw);
  rc.sim.record_stride = count_or(sim, "record_stride", 1, sw);
  rc.keep_paths = count_or(sim, "keep_paths", 10, sw);
  (void)rc.sim.grid();
  const double T = rc.sim.horizon;

  if (doc.contains("boundaries")) {
    const Json& b = doc.at("boundaries");
    if (!b.is_object()) bad("boundaries", "must be an object of named boundaries");
    for (const auto& [name, v] : b.items()) {
      rc.boundaries.emplace(name, parse_boundary(v, T, "boundaries." + name));
    }
  }
  auto boundary = [&](const Json& j, const std::string& where) -> const BoundaryFn& {
    const std::string name = str(j, where);
    const auto it = rc.boundaries.find(name);
    if (it == rc.boundaries.end()) bad(where, "unknown boundary '" + name + "'");
    return it->second;
  };

  rc.jump = doc.contains("jump") ? parse_jump(doc.at("jump"), "jump") : JumpSpec{};

  if (doc.contains("coefficients") || doc.contains("model")) {
    const Json& m = need(doc, "model", "config");
    CoefficientSet cs = parse_coefficients(need(doc, "coefficients", "config"), rc, T);
    rc.model = CaptiveModel{std::move(cs), boundary(need(m, "lower", "model"), "model.lower"),
                            boundary(need(m, "upper", "model"), "model.upper"), rc.jump};
  }

  if (doc.contains("corridors")) {
    const Json& c = doc.at("corridors");
    const std::string w = "corridors";
    const Json& stack = need(c, "stack", w);
    if (!stack.is_array()) bad(w + ".stack", "must be an array");
    std::vector<StackBoundary> sb;
    for (std::size_t i = 0; i < stack.size(); ++i) {
      const std::string ew = w + ".stack[" + std::to_string(i) + "]";
      const Json& e = stack[i];
      StackBoundary s{boundary(need(e, "boundary", ew), ew + ".boundary")};
      s.start = num_or(e, "start", 0.0, ew);
      s.end = e.contains("end") ? num(e.at("end"), ew + ".end") : s.end;
      sb.push_back(std::move(s));
    }
    std::vector<double> weights;
    const Json& wj = need(c, "weights", w);
    if (!wj.is_array()) bad(w + ".weights", "must be an array");
    for (std::size_t i = 0; i < wj.size(); ++i) weights.push_back(num(wj[i], w + ".weights"));
    const ThetaSpec theta = c.contains("theta") ? parse_theta(c, w) : ThetaSpec::uniform();
    rc.corridors.emplace(std::move(sb), std::move(weights), rc.jump, theta,
                         num_or(c, "kappa", 1.0, w), num_or(c, "alpha", 1.0, w));
  }

  if (doc.contains("polar")) {
    const Json& p = doc.at("polar");
    const std::string w = "polar";
    PolarSection ps;
    const Json& r = need(p, "radial", w);
    if (r.is_string()) {
      if (r.get<std::string>() != "corridors") bad(w + ".radial", "must be an object or \"corridors\"");
      if (!rc.corridors) bad(w + ".radial", "\"corridors\" needs a corridors section");
    } else {
      PolarCoordinate def;
      def.theta = ThetaSpec::uniform();
      def.jumps = rc.jump;
      ps.radial = parse_coordinate(r, def, w + ".radial");
    }
    PolarCoordinate adef;
    adef.lo = 0.0;
    adef.hi = 2.0 * std::numbers::pi;
    adef.theta = ThetaSpec::uniform();
    adef.jumps = rc.jump;
    ps.angle = parse_coordinate(p.contains("angle") ? p.at("angle") : Json::object(), adef, w + ".angle");
    ps.rho = num_or(p, "rho", 0.0, w);
    ps.phi0 = num_or(p, "phi0", ps.angle.beta, w);
    ps.hist_bins = count_or(p, "hist_bins", 20, w);
    rc.polar = std::move(ps);
  }

  if (doc.contains("transitions")) {
    const Json& t = doc.at("transitions");
    const std::string w = "transitions";
    TransitionsSection ts;
    if (t.contains("x")) {
      const Json& xs = t.at("x");
      if (!xs.is_array()) bad(w + ".x", "must be an array");
      for (std::size_t i = 0; i < xs.size(); ++i) ts.x.push_back(num(xs[i], w + ".x"));
    }
    if (t.contains("jump_prob")) ts.jump_prob = num(t.at("jump_prob"), w + ".jump_prob");
    ts.time = num_or(t, "time", 0.0, w);
    ts.min_steps = count_or(t, "min_steps", 100000, w);
    if (t.contains("mc")) {
      const Json& arr = t.at("mc");
      if (!arr.is_array()) bad(w + ".mc", "must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string bw = w + ".mc[" + std::to_string(i) + "]";
        ts.mc.push_back({count(need(arr[i], "from", bw), bw + ".from"), count(need(arr[i], "to", bw), bw + ".to"),
                         num(need(arr[i], "lo", bw), bw + ".lo"), num(need(arr[i], "hi", bw), bw + ".hi")});
      }
    }
    rc.transitions = std::move(ts);
  }

  if (doc.contains("transform")) {
    const Json& t = doc.at("transform");
    rc.transform = TransformSection{str_or(t, "map", "identity", "transform"),
                                    str_or(t, "input", "", "transform")};
  }

  if (doc.contains("output")) {
    const Json& o = doc.at("output");
    rc.out_dir = str_or(o, "directory", "out", "output");
    if (o.contains("formats")) {
      const Json& f = o.at("formats");
      if (!f.is_array()) bad("output.formats", "must be an array");
      rc.write_csv = false;
      for (const Json& e : f) {
        const std::string s = str(e, "output.formats");
        if (s == "csv") {
          rc.write_csv = true;
        } else if (s != "json") {
          bad("output.formats", "unknown format '" + s + "'");
        }
      }
    }
  }
  return rc;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("config " + file.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(std::move(doc));
}

RunConfig apply_overrides(const RunConfig& cfg, const Overrides& o) {
  Json doc = cfg.doc;
  if (o.seed) doc["simulation"]["seed"] = *o.seed;
  if (o.paths) doc["simulation"]["n_paths"] = *o.paths;
  if (o.out) doc["output"]["directory"] = *o.out;
  if (o.input) doc["transform"]["input"] = *o.input;
  if (o.map) doc["transform"]["map"] = *o.map;
  return parse_config(std::move(doc));
}

}  // namespace captive::cli
