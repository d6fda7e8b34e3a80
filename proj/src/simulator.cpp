#include "captive/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "captive/error.hpp"
#include "captive/report_json.hpp"
#include "engine_common.hpp"

namespace captive {

const char* to_string(BoundarySide s) noexcept {
  return s == BoundarySide::lower ? "lower" : "upper";
}

TimeGrid SimConfig::grid() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive and finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("horizon must be positive and finite");
  }
  if (record_stride == 0) throw ConfigError("record_stride must be >= 1");
  if (!(clamp_tolerance >= 0.0)) throw ConfigError("clamp_tolerance must be >= 0");
  return TimeGrid::from_step(dt, horizon);
}

std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CAPTIVE_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && cap > 0) n = std::min<std::size_t>(n, cap);
  }
  return std::max<std::size_t>(1, n);
}

MonotoneReport validate_monotone_bounds(const CoefficientSet& cs, const BoundaryFn& lower,
                                        const BoundaryFn& upper, const TimeGrid& grid) {
  MonotoneReport r;
  r.applies = cs.is_continuous_martingale() || cs.is_pure_jump();
  if (!r.applies) return r;
  for (std::size_t k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    const double dl = lower.right_derivative(t);
    const double du = upper.right_derivative(t);
    if (dl > 0.0) {
      r.ok = false;
      r.first = Counterexample{k, t, lower.eval(t), dl, 0.0, "lower boundary increases"};
      return r;
    }
    if (du < 0.0) {
      r.ok = false;
      r.first = Counterexample{k, t, upper.eval(t), du, 0.0, "upper boundary decreases"};
      return r;
    }
  }
  return r;
}

ValidationReport validation_report(const CaptiveModel& model, const TimeGrid& grid) {
  ValidationReport r;
  try {
    model.jumps.validate();
    r.pair = validate_pair(model.lower, model.upper, grid);
    if (!r.pair.ok) return r;
    r.admissibility = check_admissibility(model.coefficients, model.lower, model.upper, grid);
    r.monotone = validate_monotone_bounds(model.coefficients, model.lower, model.upper, grid);
  } catch (const Error& e) {
    r.config_error = e.what();
  }
  return r;
}

namespace {

std::string first_failure(const ValidationReport& r) {
  if (r.config_error) return *r.config_error;
  if (!r.pair.ok) return "boundary pair is not strictly ordered";
  for (const ConditionCheck* c : {&r.admissibility.parameters, &r.admissibility.drift,
                                  &r.admissibility.vol, &r.admissibility.jump}) {
    if (!c->passed) {
      return "admissibility condition '" + c->name + "' failed" +
             (c->first ? ": " + c->first->detail : std::string());
    }
  }
  if (!r.monotone.ok) {
    return "martingale or pure-jump coefficients need monotone boundaries" +
           (r.monotone.first ? ": " + r.monotone.first->detail : std::string());
  }
  return "validation failed";
}

}  // namespace

ValidatedModel validate(const CaptiveModel& model, const TimeGrid& grid) {
  ValidationReport r = validation_report(model, grid);
  if (!r.ok()) throw ValidationError(first_failure(r), to_json(r).dump());
  return ValidatedModel(model, grid, std::move(r));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double w = pos - static_cast<double>(i);
  return v[i] + w * (v[i + 1] - v[i]);
}

namespace {

using detail::max_ref;
using detail::min_ref;

/// Everything a batch needs that is shared across batches.
struct CaptiveContext {
  const CoefficientSet* cs = nullptr;
  const kernels::KernelTable* kt = nullptr;
  TimeGrid grid{1.0, 1};
  BoundaryGrid lo, hi;
  bool kernel_form = false;
  std::vector<double> kappa, beta, alpha;  // per step, kernel form only
  JumpSpec jumps;
  bool jumps_active = false;
  double x0 = 0.0;
  double tol = 0.0;
  double sqrt_dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> records;
  std::vector<std::uint8_t> is_record;  // per grid index
  std::size_t hit_bins = 20;
  detail::DriverRole role;

  CaptiveContext(const ValidatedModel& vm, const SimConfig& cfg, std::uint64_t seed_,
                 detail::DriverRole role_)
      : cs(&vm.model().coefficients),
        kt(&kernels::active()),
        grid(vm.grid()),
        lo(vm.model().lower, vm.grid()),
        hi(vm.model().upper, vm.grid()),
        jumps(vm.model().jumps),
        x0(cfg.x0),
        tol(cfg.clamp_tolerance),
        sqrt_dt(std::sqrt(vm.grid().dt())),
        seed(seed_),
        role(role_) {
    if (!(role.rho >= -1.0 && role.rho <= 1.0)) throw ConfigError("rho must lie in [-1, 1]");
    const CoefficientSet& c = *cs;
    jumps_active = !c.jump_is_zero() && jumps.intensity > 0.0;
    const std::size_t n = grid.steps();
    auto fill_const = [&](double k, double b, double a) {
      kappa.assign(n, k);
      beta.assign(n, b);
      alpha.assign(n, a);
    };
    switch (c.family()) {
      case Family::mean_reverting: {
        const family::MeanReverting& m = *c.mean_reverting_params();
        kernel_form = true;
        kappa.resize(n);
        beta.resize(n);
        alpha.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
          const double t = grid.time(k);
          kappa[k] = m.kappa.eval(t);
          beta[k] = m.beta.eval(t);
          alpha[k] = m.alpha.eval(t);
        }
        break;
      }
      case Family::pure_jump:
      case Family::zero:
        kernel_form = true;
        fill_const(0.0, 0.0, 0.0);
        break;
      default:
        kernel_form = false;
    }
    records = detail::record_indices(grid, cfg.record_stride);
    is_record.assign(grid.points(), 0);
    for (std::size_t k : records) is_record[k] = 1;
  }
};

struct BatchResult {
  detail::MomentTable moments;
  std::vector<double> final_values;
  std::vector<double> path_max_overshoot;
  std::size_t clamp_count = 0;
  std::size_t positive = 0;
  std::vector<double> overshoots;
  double max_overshoot = 0.0;
  std::size_t violations = 0;
  std::size_t hits_lower = 0, hits_upper = 0, paths_hitting = 0;
  std::vector<std::size_t> hist_lower, hist_upper;
  std::size_t jumps = 0, displaced = 0, dropped = 0;
  std::vector<PathSample> kept;
};

/// Simulates lanes [first, first + lanes) of `ctx.seed`; lanes with path
/// index < keep are returned in full.
BatchResult run_captive_batch(const CaptiveContext& ctx, std::uint64_t first, std::size_t lanes,
                              std::uint64_t keep) {
  const TimeGrid& g = ctx.grid;
  const std::size_t n = g.steps();
  const CoefficientSet& cs = *ctx.cs;
  const bool phase_on = cs.has_phase();

  std::vector<RandomSource> srcs;
  srcs.reserve(lanes);
  std::vector<detail::LaneJumps> lj(lanes);
  for (std::size_t l = 0; l < lanes; ++l) {
    srcs.emplace_back(ctx.seed, first + l);
    if (ctx.jumps_active) lj[l] = detail::plan_lane_jumps(srcs[l], ctx.jumps, cs.theta(), g, ctx.role);
  }

  BatchResult res;
  res.moments.resize(ctx.records.size());
  res.path_max_overshoot.assign(lanes, 0.0);
  res.hist_lower.assign(ctx.hit_bins, 0);
  res.hist_upper.assign(ctx.hit_bins, 0);

  std::vector<double> x(lanes, ctx.x0), phase(lanes, 0.0), jump(lanes), over(lanes);
  std::vector<std::uint8_t> on_bound(lanes, 0), flag_since(lanes, 0), hit_any(lanes, 0);
  if (phase_on) std::fill(phase.begin(), phase.end(), cs.phase_init(ctx.x0));
  for (std::size_t l = 0; l < lanes; ++l) {
    on_bound[l] = ctx.x0 == ctx.lo.value[0] || ctx.x0 == ctx.hi.value[0];
  }

  std::vector<std::size_t> keep_lane;
  for (std::size_t l = 0; l < lanes; ++l) {
    if (first + l < keep) {
      keep_lane.push_back(l);
      PathSample p;
      p.path_index = first + l;
      p.grid_horizon = g.horizon();
      p.grid_steps = n;
      p.step_index.reserve(ctx.records.size());
      p.times.reserve(ctx.records.size());
      p.values.reserve(ctx.records.size());
      p.jump_flags.reserve(ctx.records.size());
      res.kept.push_back(std::move(p));
    }
  }
  auto slot_of = [&](std::size_t l) -> PathSample* {
    if (first + l >= keep) return nullptr;
    const auto it = std::lower_bound(keep_lane.begin(), keep_lane.end(), l);
    return &res.kept[static_cast<std::size_t>(it - keep_lane.begin())];
  };

  std::size_t rec = 0;
  auto record = [&](std::size_t k) {
    res.moments.set_batch(rec, ctx.kt->moments(x.data(), lanes), lanes);
    for (std::size_t i = 0; i < keep_lane.size(); ++i) {
      const std::size_t l = keep_lane[i];
      PathSample& p = res.kept[i];
      p.step_index.push_back(k);
      p.times.push_back(g.time(k));
      p.values.push_back(x[l]);
      p.jump_flags.push_back(flag_since[l]);
    }
    std::fill(flag_since.begin(), flag_since.end(), 0);
    ++rec;
  };
  record(0);

  detail::IncrementSource normals(ctx.role);
  for (std::size_t c0 = 0; c0 < n; c0 += detail::kChunkSteps) {
    const std::size_t cnt = std::min(detail::kChunkSteps, n - c0);
    normals.fill(*ctx.kt, srcs, c0, cnt, ctx.sqrt_dt);
    for (std::size_t s = 0; s < cnt; ++s) {
      const std::size_t k = c0 + s;
      const double* dw = normals.step(s);
      for (std::size_t l = 0; l < lanes; ++l) {
        jump[l] = lj[l].take(k);
        if (jump[l] != 0.0) flag_since[l] = 1;
      }
      const double lo_next = ctx.lo.value[k + 1];
      const double hi_next = ctx.hi.value[k + 1];
      if (ctx.kernel_form) {
        const kernels::CaptiveStep p{g.dt(),          ctx.kappa[k],      ctx.beta[k],
                                     ctx.alpha[k],    ctx.lo.value[k],   ctx.hi.value[k],
                                     ctx.lo.left[k + 1], ctx.hi.left[k + 1], lo_next,
                                     hi_next};
        ctx.kt->captive_step(p, x.data(), dw, jump.data(), over.data(), lanes);
      } else {
        const double t = g.time(k);
        const double t1 = g.time(k + 1);
        const double gl = ctx.lo.value[k], gu = ctx.hi.value[k];
        const double ll = ctx.lo.left[k + 1], ul = ctx.hi.left[k + 1];
        for (std::size_t l = 0; l < lanes; ++l) {
          const double xk = x[l];
          const double mu = cs.drift(t, xk, gl, gu);
          const double sig = cs.vol_branch(t, xk, gl, gu, phase[l]);
          double gam = 0.0;
          if (jump[l] != 0.0) {
            gam = cs.jump_coeff(t1, std::clamp(xk, ll, ul), ll, ul, jump[l]);
          }
          const double pre = ((xk + mu * g.dt()) + sig * dw[l]) + gam;
          over[l] = max_ref(0.0, max_ref(lo_next - pre, pre - hi_next));
          x[l] = min_ref(max_ref(pre, lo_next), hi_next);
          if (phase_on) {
            phase[l] = phase[l] + dw[l];
            if (jump[l] != 0.0) phase[l] = cs.phase_reset(x[l], phase[l]);
          }
        }
      }
      const double t1 = g.time(k + 1);
      for (std::size_t l = 0; l < lanes; ++l) {
        const double o = over[l];
        if (std::isnan(o) || !std::isfinite(x[l])) {
          throw NumericalError("non-finite value on path " + std::to_string(first + l), k);
        }
        if (o > 0.0) {
          ++res.positive;
          res.overshoots.push_back(o);
          res.path_max_overshoot[l] = std::max(res.path_max_overshoot[l], o);
          res.max_overshoot = std::max(res.max_overshoot, o);
          if (o > ctx.tol) {
            ++res.clamp_count;
            if (PathSample* p = slot_of(l)) p->clamp_events.push_back({t1, o});
          }
        }
        if (x[l] < lo_next || x[l] > hi_next) ++res.violations;
        const bool at_lo = x[l] == lo_next;
        const bool at_hi = x[l] == hi_next;
        const bool on = at_lo || at_hi;
        if (on && !on_bound[l]) {
          const std::size_t bin =
              std::min(ctx.hit_bins - 1,
                       static_cast<std::size_t>(t1 / g.horizon() * static_cast<double>(ctx.hit_bins)));
          if (at_lo) {
            ++res.hits_lower;
            ++res.hist_lower[bin];
          } else {
            ++res.hits_upper;
            ++res.hist_upper[bin];
          }
          hit_any[l] = 1;
          if (PathSample* p = slot_of(l)) {
            p->boundary_hits.push_back({t1, at_lo ? BoundarySide::lower : BoundarySide::upper});
          }
        }
        on_bound[l] = on;
      }
      if (ctx.is_record[k + 1]) record(k + 1);
    }
  }

  res.final_values = x;
  for (std::size_t l = 0; l < lanes; ++l) {
    res.paths_hitting += hit_any[l];
    res.jumps += lj[l].steps.size();
    res.displaced += lj[l].displaced;
    res.dropped += lj[l].dropped;
  }
  for (std::size_t i = 0; i < keep_lane.size(); ++i) {
    const std::size_t l = keep_lane[i];
    PathSample& p = res.kept[i];
    p.max_overshoot = res.path_max_overshoot[l];
    p.jumps = lj[l].steps.size();
    p.jumps_displaced = lj[l].displaced;
    p.jumps_dropped = lj[l].dropped;
  }
  return res;
}

void check_run(const ValidatedModel& vm, const SimConfig& cfg) {
  const TimeGrid g = cfg.grid();
  if (!(g == vm.grid())) {
    throw UsageError("simulation grid differs from the grid the model was validated on");
  }
  const double l0 = vm.model().lower.eval(0.0);
  const double u0 = vm.model().upper.eval(0.0);
  if (!(cfg.x0 >= l0 && cfg.x0 <= u0)) {
    throw UsageError("x0 = " + std::to_string(cfg.x0) + " outside [" + std::to_string(l0) +
                     ", " + std::to_string(u0) + "]");
  }
}

}  // namespace

PathSample simulate_path(const ValidatedModel& vm, const SimConfig& cfg, const RandomSource& src,
                         int coordinate, double rho) {
  check_run(vm, cfg);
  const CaptiveContext ctx(vm, cfg, src.master_seed(), {coordinate, rho});
  BatchResult r = run_captive_batch(ctx, src.path_index(), 1, src.path_index() + 1);
  return std::move(r.kept.front());
}

EnsembleSummary run_ensemble(const ValidatedModel& vm, const SimConfig& cfg,
                             const EnsembleOptions& opts) {
  check_run(vm, cfg);
  if (cfg.n_paths == 0) throw ConfigError("n_paths must be >= 1");
  if (opts.hit_bins == 0) throw ConfigError("hit_bins must be >= 1");
  CaptiveContext ctx(vm, cfg, cfg.seed, {opts.coordinate, opts.rho});
  ctx.hit_bins = opts.hit_bins;

  EnsembleSummary out;
  out.n_paths = cfg.n_paths;
  out.record_index = ctx.records;
  for (std::size_t k : ctx.records) out.record_time.push_back(ctx.grid.time(k));
  out.hit_histogram_lower.assign(opts.hit_bins, 0);
  out.hit_histogram_upper.assign(opts.hit_bins, 0);
  for (std::size_t b = 0; b <= opts.hit_bins; ++b) {
    out.hit_bin_edges.push_back(ctx.grid.horizon() * static_cast<double>(b) /
                                static_cast<double>(opts.hit_bins));
  }
  detail::MomentTable moments;
  moments.resize(ctx.records.size());

  const std::size_t lanes = detail::kBatchLanes;
  const std::size_t n_batches = (cfg.n_paths + lanes - 1) / lanes;
  const std::uint64_t keep = std::min<std::uint64_t>(opts.keep_paths, cfg.n_paths);
  detail::run_rounds<BatchResult>(
      n_batches, worker_count(opts.threads),
      [&](std::size_t b) {
        const std::uint64_t first = b * lanes;
        const std::size_t m = std::min<std::size_t>(lanes, cfg.n_paths - first);
        return run_captive_batch(ctx, first, m, keep);
      },
      [&](BatchResult&& r) {
        moments.merge(r.moments);
        out.final_values.insert(out.final_values.end(), r.final_values.begin(),
                                r.final_values.end());
        out.path_max_overshoot.insert(out.path_max_overshoot.end(), r.path_max_overshoot.begin(),
                                      r.path_max_overshoot.end());
        out.clamp_count += r.clamp_count;
        out.positive_overshoots += r.positive;
        out.overshoots.insert(out.overshoots.end(), r.overshoots.begin(), r.overshoots.end());
        out.max_overshoot = std::max(out.max_overshoot, r.max_overshoot);
        out.captivity_violations += r.violations;
        out.hits_lower += r.hits_lower;
        out.hits_upper += r.hits_upper;
        out.paths_hitting += r.paths_hitting;
        for (std::size_t i = 0; i < opts.hit_bins; ++i) {
          out.hit_histogram_lower[i] += r.hist_lower[i];
          out.hit_histogram_upper[i] += r.hist_upper[i];
        }
        out.jumps += r.jumps;
        out.jumps_displaced += r.displaced;
        out.jumps_dropped += r.dropped;
        for (PathSample& p : r.kept) out.paths.push_back(std::move(p));
      });

  const std::size_t nr = ctx.records.size();
  out.stats.mean = moments.mean;
  out.stats.variance.resize(nr);
  for (std::size_t r = 0; r < nr; ++r) out.stats.variance[r] = moments.m2[r] / moments.n[r];
  out.stats.min = moments.min;
  out.stats.max = moments.max;
  return out;
}

std::vector<CaptivityViolation> check_captivity(const PathSample& p, const BoundaryFn& lower,
                                                const BoundaryFn& upper, double tol) {
  std::vector<CaptivityViolation> out;
  std::optional<BoundaryGrid> lg, ug;
  if (p.grid_steps > 0) {
    const TimeGrid g(p.grid_horizon, p.grid_steps);
    lg.emplace(lower, g);
    ug.emplace(upper, g);
  }
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    double l, u;
    if (lg) {
      l = lg->value[p.step_index[i]];
      u = ug->value[p.step_index[i]];
    } else {
      l = lower.eval(p.times[i]);
      u = upper.eval(p.times[i]);
    }
    const double v = p.values[i];
    if (v < l - tol || v > u + tol || std::isnan(v)) {
      out.push_back({i, p.times[i], v, l, u});
    }
  }
  return out;
}

AbsorptionReport check_absorption(const PathSample& p, const BoundaryFn& lower,
                                  const BoundaryFn& upper) {
  if (!lower.is_constant() || !upper.is_constant()) {
    throw ConfigError("absorption check needs constant boundaries");
  }
  constexpr double kTol = 1e-12;
  const double L = lower.eval(0.0);
  const double U = upper.eval(0.0);
  AbsorptionReport r;
  std::size_t i = 0;
  for (; i < p.values.size(); ++i) {
    const double v = p.values[i];
    if (v == L || v == U) break;
  }
  if (i == p.values.size()) return r;
  r.hit = true;
  r.tau = p.times[i];
  const double xt = p.values[i];
  r.side = xt == L ? BoundarySide::lower : BoundarySide::upper;
  for (std::size_t j = i + 1; j < p.values.size(); ++j) {
    if (!(std::abs(p.values[j] - xt) <= kTol)) {
      r.ok = false;
      r.first_failure = j;
      break;
    }
  }
  return r;
}

}  // namespace captive
