#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "captive/cli.hpp"
#include "captive/transforms.hpp"
#include "captive/transitions.hpp"

namespace captive::cli {

namespace {

// Collects artifacts of one run and writes the manifest last.
class Artifacts {
 public:
  Artifacts(std::filesystem::path dir, std::string_view subcommand, const RunConfig& cfg)
      : dir_(std::move(dir)), subcommand_(subcommand), cfg_(cfg) {}

  void write(const std::string& rel, const std::string& content) {
    write_atomic(dir_ / rel, content);
    outputs_.push_back(Json{{"path", rel}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }
  void write(const std::string& rel, const Json& j) { write(rel, j.dump(2) + "\n"); }

  void finish() {
    const Json m{{"tool", kToolName},
                 {"version", kToolVersion},
                 {"subcommand", subcommand_},
                 {"seed", cfg_.sim.seed},
                 {"config", cfg_.doc},
                 {"outputs", outputs_}};
    write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  std::string subcommand_;
  const RunConfig& cfg_;
  Json outputs_ = Json::array();
};

std::string path_name(const char* prefix, std::uint64_t index) {
  return fmt::format("paths/{}_{:06d}.csv", prefix, index);
}

Json stats_json(const std::vector<double>& times, const TimeStats& s) {
  return Json{{"time", times}, {"mean", s.mean}, {"variance", s.variance}, {"min", s.min}, {"max", s.max}};
}

Json overshoot_json(std::vector<double> v, double max_overshoot) {
  Json j{{"positive", v.size()}, {"max", max_overshoot}};
  j["p99"] = v.empty() ? 0.0 : quantile(std::move(v), 0.99);
  return j;
}

const CaptiveModel& need_model(const RunConfig& cfg, std::string_view sub) {
  if (!cfg.model) throw ConfigError(std::string(sub) + " needs coefficients and model sections");
  return *cfg.model;
}

const CorridorModel& need_corridors(const RunConfig& cfg, std::string_view sub) {
  if (!cfg.corridors) throw ConfigError(std::string(sub) + " needs a corridors section");
  return *cfg.corridors;
}

void require_corridors_valid(const CorridorModel& m, const TimeGrid& grid) {
  const CorridorReport r = validate_corridor_model(m, grid);
  if (!r.ok()) throw ValidationError("corridor model failed validation", to_json(r).dump());
}

PolarModel polar_model(const RunConfig& cfg) {
  if (!cfg.polar) throw ConfigError("polar needs a polar section");
  PolarModel pm;
  pm.radial = cfg.polar->radial;
  if (!pm.radial) pm.corridors = need_corridors(cfg, "polar");
  pm.angle = cfg.polar->angle;
  pm.rho = cfg.polar->rho;
  return pm;
}

int cmd_simulate(const RunConfig& cfg, const Overrides& o, Artifacts& out) {
  const ValidatedModel vm = validate(need_model(cfg, "simulate"), cfg.sim.grid());
  EnsembleOptions opts;
  opts.keep_paths = std::min(cfg.keep_paths, cfg.sim.n_paths);
  opts.threads = o.threads;
  EnsembleSummary s = run_ensemble(vm, cfg.sim, opts);
  if (cfg.write_csv) {
    for (const PathSample& p : s.paths) out.write(path_name("path", p.path_index), path_csv(p));
  }
  Json j{{"n_paths", s.n_paths},
         {"seed", cfg.sim.seed},
         {"dt", cfg.sim.dt},
         {"T", cfg.sim.horizon},
         {"captivity_violations", s.captivity_violations},
         {"clamp_count", s.clamp_count},
         {"overshoot", overshoot_json(std::move(s.overshoots), s.max_overshoot)},
         {"jumps", Json{{"total", s.jumps}, {"displaced", s.jumps_displaced}, {"dropped", s.jumps_dropped}}},
         {"hits", Json{{"lower", s.hits_lower},
                       {"upper", s.hits_upper},
                       {"paths", s.paths_hitting},
                       {"bin_edges", s.hit_bin_edges},
                       {"histogram_lower", s.hit_histogram_lower},
                       {"histogram_upper", s.hit_histogram_upper}}},
         {"final_values", s.final_values},
         {"stats", stats_json(s.record_time, s.stats)}};
  out.write("summary.json", j);
  return 0;
}

Json occupancy_json(const CorridorOccupancy& c) {
  return Json{{"time_fraction", c.time_fraction},
              {"transitions", c.transitions},
              {"changes", c.changes},
              {"skips", c.skips},
              {"off_jump_changes", c.off_jump_changes}};
}

int cmd_corridors(const RunConfig& cfg, const Overrides& o, Artifacts& out) {
  const CorridorModel& m = need_corridors(cfg, "corridors");
  require_corridors_valid(m, cfg.sim.grid());
  EnsembleOptions opts;
  opts.keep_paths = std::min(cfg.keep_paths, cfg.sim.n_paths);
  opts.threads = o.threads;
  CorridorEnsemble e = run_corridor_ensemble(m, cfg.sim, opts);
  if (cfg.write_csv) {
    for (const CorridorPath& p : e.paths) {
      out.write(path_name("path", p.path.path_index), path_csv(p.path, &p.corridor));
    }
  }
  out.write("occupancy.json", occupancy_json(e.occupancy));
  Json j{{"n_paths", e.n_paths},
         {"seed", cfg.sim.seed},
         {"dt", cfg.sim.dt},
         {"T", cfg.sim.horizon},
         {"corridors", m.corridors()},
         {"captivity_violations", e.captivity_violations},
         {"clamp_count", e.clamp_count},
         {"internal_clamps", e.internal_clamps},
         {"overshoot", overshoot_json(std::move(e.overshoots), e.max_overshoot)},
         {"jumps", Json{{"total", e.jumps}, {"displaced", e.jumps_displaced}, {"dropped", e.jumps_dropped}}},
         {"occupancy", occupancy_json(e.occupancy)},
         {"final_values", e.final_values},
         {"stats", stats_json(e.record_time, e.stats)}};
  out.write("summary.json", j);
  return 0;
}

Json histogram_json(const RadialHistogram& h) {
  return Json{{"edges", h.edges}, {"counts", h.counts}, {"fraction", h.fraction}};
}

int cmd_polar(const RunConfig& cfg, const Overrides& o, Artifacts& out) {
  const PolarModel pm = polar_model(cfg);
  if (pm.corridors) require_corridors_valid(*pm.corridors, cfg.sim.grid());
  const PolarEnsemble e = run_polar(pm, cfg.sim, cfg.polar->phi0, cfg.polar->hist_bins, o.threads);
  const double a = pm.inner();
  const double d = pm.outer();
  std::size_t outside = 0;
  for (const PolarTrajectory& t : e.trajectories) {
    outside += annulus_check(t, a, d, cfg.sim.clamp_tolerance).size();
  }
  if (cfg.write_csv) {
    const std::size_t keep = std::min(cfg.keep_paths, e.trajectories.size());
    for (std::size_t i = 0; i < keep; ++i) {
      const PolarTrajectory& t = e.trajectories[i];
      std::string csv = t.corridor.empty() ? "t,r,phi,x,y\n" : "t,r,phi,x,y,corridor_index\n";
      for (std::size_t k = 0; k < t.times.size(); ++k) {
        csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", t.times[k], t.radius[k], t.angle[k],
                           t.points[k][0], t.points[k][1]);
        if (!t.corridor.empty()) csv += fmt::format(",{}", t.corridor[k]);
        csv += '\n';
      }
      out.write(path_name("polar", t.path_index), csv);
    }
  }
  Json j{{"n_paths", e.trajectories.size()},
         {"seed", cfg.sim.seed},
         {"inner", a},
         {"outer", d},
         {"rho", pm.rho},
         {"radial_violations", e.radial_violations},
         {"angular_violations", e.angular_violations},
         {"annulus_violations", outside},
         {"radial_jumps", e.radial_jumps},
         {"angular_jumps", e.angular_jumps}};
  out.write("summary.json", j);
  if (o.summary) out.write("histogram.json", histogram_json(e.histogram));
  return 0;
}

int cmd_transitions(const RunConfig& cfg, const Overrides& o, Artifacts& out) {
  const CorridorModel& m = need_corridors(cfg, "transitions");
  if (!cfg.transitions) throw ConfigError("transitions needs a transitions section");
  const TransitionsSection& ts = *cfg.transitions;
  require_corridors_valid(m, cfg.sim.grid());
  const double lambda = m.theta().active() ? m.jumps().intensity : 0.0;
  const double jp = ts.jump_prob.value_or(-std::expm1(-lambda * cfg.sim.dt));
  const double t = ts.time;
  const std::vector<std::size_t> active = m.active_at(t);

  std::string csv = "x,from,to,analytic,mc_estimate,ci_lo,ci_hi\n";
  Json rows = Json::array();
  for (double x : ts.x) {
    const std::size_t from = corridor_index(m, t, x);
    Json probs = Json::array();
    Json total = Json::array();
    Json sets = Json::array();
    Json targets = Json::array();
    for (std::size_t to : active) {
      if (to == m.top()) continue;
      const TransitionQuery q = corridor_query(m, t, x, from, to, jp);
      const Interval s = s_set(q);
      const double p = transition_probability(q);
      targets.push_back(to);
      sets.push_back(Json{{"lo", s.lo}, {"hi", s.hi}, {"closed", s.closed}});
      probs.push_back(p);
      total.push_back(p + (to == from ? 1.0 - jp : 0.0));
      csv += fmt::format("{:.17g},{},{},{:.17g},,,\n", x, from, to, p);
    }
    rows.push_back(Json{{"x", x},
                        {"from", from},
                        {"to", targets},
                        {"s_set", sets},
                        {"jump", probs},
                        {"total", total}});
  }

  Json mc = Json::array();
  for (const TransitionsSection::Bin& b : ts.mc) {
    Conditioning c;
    c.from = b.from;
    c.to = b.to;
    c.bin_lo = b.lo;
    c.bin_hi = b.hi;
    c.min_steps = ts.min_steps;
    c.threads = o.threads;
    const TransitionEstimate e = estimate_transition_mc(m, cfg.sim, c);
    const double centre = 0.5 * (b.lo + b.hi);
    csv += fmt::format("{:.17g},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", centre, b.from, b.to,
                       e.analytic_average, e.estimate, e.ci_lo, e.ci_hi);
    mc.push_back(Json{{"from", b.from},
                      {"to", b.to},
                      {"bin", Json::array({b.lo, b.hi})},
                      {"paths", e.paths},
                      {"steps", e.steps},
                      {"jumps", e.jumps},
                      {"landed", e.landed},
                      {"reached_min_steps", e.reached_min_steps},
                      {"step_jump_prob", e.step_jump_prob},
                      {"fraction", e.fraction},
                      {"estimate", e.estimate},
                      {"ci", Json::array({e.ci_lo, e.ci_hi})},
                      {"analytic_center", e.analytic_center},
                      {"analytic_average", e.analytic_average}});
  }
  out.write("transitions.json", Json{{"time", t},
                                     {"jump_prob", jp},
                                     {"a", m.stack().front().fn.eval(t)},
                                     {"d", m.stack().back().fn.eval(t)},
                                     {"rows", rows},
                                     {"mc", mc}});
  if (cfg.write_csv) out.write("transitions.csv", csv);
  return 0;
}

int cmd_transform(const RunConfig& cfg, const Overrides& o, Artifacts& out) {
  const CaptiveModel& model = need_model(cfg, "transform");
  const TransformSection ts = cfg.transform.value_or(TransformSection{"identity", ""});
  const MonotoneMap map = builtin_monotone_map(ts.map);

  std::vector<PathSample> source;
  if (!ts.input.empty()) {
    source.push_back(read_path_csv(ts.input));
  } else {
    const ValidatedModel vm = validate(model, cfg.sim.grid());
    EnsembleOptions opts;
    opts.keep_paths = std::min(cfg.keep_paths, cfg.sim.n_paths);
    opts.threads = o.threads;
    source = run_ensemble(vm, cfg.sim, opts).paths;
  }

  Json paths = Json::array();
  std::size_t violations = 0;
  bool flags_kept = true;
  std::optional<MonotoneCheck> check;
  for (const PathSample& p : source) {
    const MappedPath mp = map_path(p, map, model.lower, model.upper);
    const double tol = mp.tolerance(cfg.sim.clamp_tolerance);
    const std::size_t bad = check_captivity(mp.path, mp.lower, mp.upper, tol).size();
    violations += bad;
    flags_kept = flags_kept && mp.path.jump_flags == p.jump_flags;
    check = mp.check;
    const std::string name = ts.input.empty() ? path_name("mapped", p.path_index)
                                              : "paths/mapped_" + std::filesystem::path(ts.input).stem().string() + ".csv";
    if (cfg.write_csv) out.write(name, path_csv(mp.path));
    paths.push_back(Json{{"path", name}, {"tolerance", tol}, {"violations", bad}});
  }
  Json j{{"map", map.name},
         {"direction", to_string(map.direction)},
         {"source", ts.input.empty() ? "simulated" : ts.input},
         {"captivity_violations", violations},
         {"jump_flags_preserved", flags_kept},
         {"paths", paths}};
  if (check) {
    j["monotone"] = Json{{"ok", check->ok},
                         {"lo", check->lo},
                         {"hi", check->hi},
                         {"samples", check->samples},
                         {"lipschitz", check->lipschitz}};
  }
  out.write("transform.json", j);
  return 0;
}

int cmd_validate(const RunConfig& cfg, const Overrides&, Artifacts& out) {
  const TimeGrid grid = cfg.sim.grid();
  bool ok = true;
  Json j;
  if (cfg.model) {
    const ValidationReport r = validation_report(*cfg.model, grid);
    ok = ok && r.ok();
    j["model"] = to_json(r);
  }
  if (cfg.corridors) {
    const CorridorReport r = validate_corridor_model(*cfg.corridors, grid);
    ok = ok && r.ok();
    j["corridors"] = to_json(r);
  }
  if (cfg.polar) {
    Json p;
    if (cfg.polar->radial) {
      const ValidationReport r = validation_report(cfg.polar->radial->model(cfg.sim.horizon), grid);
      ok = ok && r.ok();
      p["radial"] = to_json(r);
    }
    const ValidationReport r = validation_report(cfg.polar->angle.model(cfg.sim.horizon), grid);
    ok = ok && r.ok();
    p["angle"] = to_json(r);
    j["polar"] = p;
  }
  if (j.empty()) throw ConfigError("nothing to validate: no model, corridors or polar section");
  Json doc{{"ok", ok}};
  for (auto& [k, v] : j.items()) doc[k] = v;
  out.write("validation.json", doc);
  return ok ? 0 : 3;
}

}  // namespace

int run_command(std::string_view subcommand, const RunConfig& cfg, const Overrides& o) {
  using Fn = int (*)(const RunConfig&, const Overrides&, Artifacts&);
  Fn fn = nullptr;
  if (subcommand == "simulate") fn = cmd_simulate;
  if (subcommand == "corridors") fn = cmd_corridors;
  if (subcommand == "polar") fn = cmd_polar;
  if (subcommand == "transitions") fn = cmd_transitions;
  if (subcommand == "transform") fn = cmd_transform;
  if (subcommand == "validate") fn = cmd_validate;
  if (!fn) throw UsageError("unknown subcommand '" + std::string(subcommand) + "'");
  Artifacts out(cfg.out_dir, subcommand, cfg);
  const int rc = fn(cfg, o, out);
  out.finish();
  return rc;
}

}  // namespace captive::cli
