#include "captive/corridors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "captive/error.hpp"
#include "captive/report_json.hpp"
#include "engine_common.hpp"

namespace captive {

CorridorModel::CorridorModel(std::vector<StackBoundary> stack, std::vector<double> weights,
                             JumpSpec jumps, ThetaSpec theta, double kappa, double alpha)
    : stack_(std::move(stack)),
      weights_(std::move(weights)),
      jumps_(jumps),
      theta_(theta),
      kappa_(kappa),
      alpha_(alpha) {
  if (stack_.size() < 2) throw ConfigError("corridor stack needs at least two boundaries");
  if (weights_.size() != stack_.size() - 1) {
    throw ConfigError("corridor stack of " + std::to_string(stack_.size()) + " boundaries needs " +
                      std::to_string(stack_.size() - 1) + " weights");
  }
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (!(weights_[j] > 0.0 && weights_[j] < 1.0)) {
      throw ConfigError("weight " + std::to_string(j) + " must lie in (0, 1)");
    }
  }
  for (const std::size_t j : {std::size_t{0}, top()}) {
    const StackBoundary& b = stack_[j];
    if (b.start != 0.0 || !(b.end == std::numeric_limits<double>::infinity() ||
                            b.end >= b.fn.horizon())) {
      throw ConfigError("master boundaries must cover the whole horizon");
    }
  }
  if (stack_[0].fn.kind() == BoundaryKind::upper_admissible) {
    throw ConfigError("lowest master boundary may not be upper-admissible");
  }
  if (stack_[top()].fn.kind() == BoundaryKind::lower_admissible) {
    throw ConfigError("highest master boundary may not be lower-admissible");
  }
  for (std::size_t j = 1; j < top(); ++j) {
    const StackBoundary& b = stack_[j];
    if (b.fn.has_jumps() || b.fn.kind() != BoundaryKind::continuous) {
      throw ConfigError("internal boundary " + std::to_string(j) + " must be continuous");
    }
    if (!(b.start >= 0.0) || !(b.end > b.start)) {
      throw ConfigError("internal boundary " + std::to_string(j) + " has an empty segment");
    }
  }
  if (!(kappa_ >= 0.0) || !std::isfinite(kappa_)) throw ConfigError("kappa must be >= 0");
  if (!std::isfinite(alpha_)) throw ConfigError("alpha must be finite");
  theta_.validate();
  jumps_.validate();
}

CorridorModel CorridorModel::levels(std::vector<double> levels, std::vector<double> weights,
                                    JumpSpec jumps, ThetaSpec theta) {
  std::vector<StackBoundary> stack;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    BoundaryKind kind = BoundaryKind::continuous;
    if (j == 0) kind = BoundaryKind::lower_admissible;
    if (j + 1 == levels.size()) kind = BoundaryKind::upper_admissible;
    stack.push_back({BoundaryFn::constant(levels[j], std::numeric_limits<double>::infinity(), kind)});
  }
  return CorridorModel(std::move(stack), std::move(weights), jumps, theta);
}

std::vector<std::size_t> CorridorModel::active_at(double t) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < stack_.size(); ++j) {
    if (stack_[j].active_at(t)) out.push_back(j);
  }
  return out;
}

namespace {

std::size_t next_active(const CorridorModel& m, std::size_t j, double t) {
  for (std::size_t k = j + 1; k < m.stack().size(); ++k) {
    if (m.stack()[k].active_at(t)) return k;
  }
  return m.top();
}

}  // namespace

std::size_t corridor_index(const CorridorModel& model, double t, double x) {
  const auto s = model.stack();
  const double a = s.front().fn.eval(t);
  const double d = s.back().fn.eval(t);
  if (!(x >= a && x <= d)) {
    throw StateError("x = " + std::to_string(x) + " outside the master boundaries at t = " +
                     std::to_string(t));
  }
  std::size_t c = 0;
  for (std::size_t j = 1; j < model.top(); ++j) {
    if (s[j].active_at(t) && x >= s[j].fn.eval(t)) c = j;
  }
  return c;
}

double corridor_level(const CorridorModel& model, std::size_t corridor, double t) {
  if (corridor >= model.corridors()) throw UsageError("corridor id out of range");
  const std::size_t hi = next_active(model, corridor, t);
  const double w = model.weights()[corridor];
  return w * model.stack()[corridor].fn.eval(t) + (1.0 - w) * model.stack()[hi].fn.eval(t);
}

MonitorState initial_monitor(const CorridorModel& model, double x0) {
  MonitorState ms;
  ms.entries.resize(model.stack().size());
  for (std::size_t j = 0; j < ms.entries.size(); ++j) {
    const StackBoundary& b = model.stack()[j];
    if (b.active_at(0.0)) ms.entries[j] = {true, x0, b.start};
  }
  return ms;
}

MonitorState update_monitor(MonitorState ms, const CorridorModel& model, double t, double x,
                            bool jumped) {
  if (t < ms.time) {
    throw UsageError("monitor updated at t = " + std::to_string(t) + " after t = " +
                     std::to_string(ms.time));
  }
  if (ms.entries.size() != model.stack().size()) {
    throw UsageError("monitor does not belong to this corridor model");
  }
  for (std::size_t j = 0; j < ms.entries.size(); ++j) {
    const StackBoundary& b = model.stack()[j];
    MonitorEntry& e = ms.entries[j];
    if (!b.active_at(t)) {
      e.active = false;
    } else if (jumped) {
      e = {true, x, t};
    } else if (!e.active) {
      e = {true, x, b.start};
    }
  }
  if (jumped) ms.last_jump_time = t;
  ms.time = t;
  return ms;
}

std::size_t monitored_corridor(const MonitorState& ms, const CorridorModel& model) {
  const auto s = model.stack();
  std::size_t c = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const MonitorEntry& e = ms.entries.at(j);
    if (!e.active) continue;
    const double g = s[j].fn.eval(e.tau);
    if (j == 0 && !(e.x >= g)) {
      throw StateError("monitored value " + std::to_string(e.x) + " below the lowest boundary");
    }
    if (j == model.top()) {
      if (!(e.x <= g)) {
        throw StateError("monitored value " + std::to_string(e.x) + " above the highest boundary");
      }
      break;
    }
    if (e.x >= g) c = j;
  }
  return c;
}

double corridor_target(const MonitorState& ms, const CorridorModel& model) {
  return corridor_level(model, monitored_corridor(ms, model), ms.time);
}

namespace {

bool on_grid(double t, const TimeGrid& g) {
  return std::abs(g.time(g.nearest_index(t)) - t) <= StackBoundary::time_eps(t);
}

void fail(ConditionCheck& c, std::size_t k, double t, double x, double value, double bound,
          std::string detail) {
  if (!c.passed) return;
  c.passed = false;
  c.first = Counterexample{k, t, x, value, bound, std::move(detail)};
}

}  // namespace

CorridorReport validate_corridor_model(const CorridorModel& model, const TimeGrid& grid) {
  CorridorReport r;
  r.grid_points = grid.points();
  const auto s = model.stack();
  const double T = grid.horizon();
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j].fn.horizon() < T) {
      r.config_error = "boundary " + std::to_string(j) + " is not defined up to T";
      return r;
    }
    if (j > 0 && j < model.top()) {
      if (!on_grid(s[j].start, grid) || (s[j].end < T && !on_grid(s[j].end, grid))) {
        r.config_error = "segment of boundary " + std::to_string(j) + " does not start and end on grid times";
        return r;
      }
    }
  }
  const double kappa = model.kappa();
  for (std::size_t k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    const std::vector<std::size_t> act = model.active_at(t);
    std::vector<double> v(act.size()), dv(act.size());
    for (std::size_t i = 0; i < act.size(); ++i) {
      v[i] = s[act[i]].fn.eval(t);
      dv[i] = s[act[i]].fn.right_derivative(t);
    }
    for (std::size_t i = 0; i + 1 < act.size(); ++i) {
      if (!(v[i] < v[i + 1])) {
        fail(r.ordering, k, t, v[i], v[i + 1], 0.0,
             "boundaries " + std::to_string(act[i]) + " and " + std::to_string(act[i + 1]) +
                 " are not strictly ordered");
      }
    }
    if (k > 0 && act.size() >= 2) {
      const double al = s[0].fn.eval_left(t), dl = s.back().fn.eval_left(t);
      if (!(al < v[1]) || !(v[act.size() - 2] < dl)) {
        fail(r.ordering, k, t, al, dl, 0.0, "master left limit crosses an internal boundary");
      }
    }
    for (std::size_t i = 0; i < act.size(); ++i) {
      const std::size_t j = act[i];
      if (i + 1 < act.size()) {
        // Corridor above g_j; equality belongs to this side.
        const double w = model.weights()[j];
        const double beta = w * v[i] + (1.0 - w) * v[i + 1];
        const double mu = kappa * (beta - v[i]);
        if (!(mu >= dv[i] - kDriftSlack)) {
          fail(r.drift, k, t, v[i], mu, dv[i],
               "drift at boundary " + std::to_string(j) + " from the corridor above is below its slope");
        }
      }
      if (i > 0) {
        const double w = model.weights()[act[i - 1]];
        const double beta = w * v[i - 1] + (1.0 - w) * v[i];
        const double mu = kappa * (beta - v[i]);
        if (!(mu <= dv[i] + kDriftSlack)) {
          fail(r.drift, k, t, v[i], mu, dv[i],
               "drift at boundary " + std::to_string(j) + " from the corridor below exceeds its slope");
        }
      }
    }
  }
  return r;
}

namespace {

struct Epoch {
  std::size_t k0 = 0;  // first grid index of the epoch
  std::vector<std::size_t> ids;
};

struct CorridorContext {
  const CorridorModel* model = nullptr;
  const kernels::KernelTable* kt = nullptr;
  TimeGrid grid{1.0, 1};
  std::vector<BoundaryGrid> g;
  std::vector<Epoch> epochs;
  std::vector<std::uint8_t> epoch_start;  // per grid index
  bool jumps_active = false;
  double x0 = 0.0;
  double tol = 0.0;
  double sqrt_dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> records;
  std::vector<std::uint8_t> is_record;
  detail::DriverRole role;
  std::optional<ProbeSpec> probe;

  CorridorContext(const CorridorModel& m, const SimConfig& cfg, std::uint64_t seed_,
                  detail::DriverRole role_)
      : model(&m),
        kt(&kernels::active()),
        grid(cfg.grid()),
        x0(cfg.x0),
        tol(cfg.clamp_tolerance),
        sqrt_dt(std::sqrt(grid.dt())),
        seed(seed_),
        role(role_) {
    if (!(role.rho >= -1.0 && role.rho <= 1.0)) throw ConfigError("rho must lie in [-1, 1]");
    for (const StackBoundary& b : m.stack()) g.emplace_back(b.fn, grid);
    epoch_start.assign(grid.points(), 0);
    for (std::size_t k = 0; k < grid.points(); ++k) {
      std::vector<std::size_t> ids = m.active_at(grid.time(k));
      if (epochs.empty() || epochs.back().ids != ids) {
        epochs.push_back({k, std::move(ids)});
        epoch_start[k] = 1;
      }
    }
    jumps_active = m.theta().active() && m.jumps().intensity > 0.0;
    records = detail::record_indices(grid, cfg.record_stride);
    is_record.assign(grid.points(), 0);
    for (std::size_t k : records) is_record[k] = 1;
  }

  std::size_t next_in(const Epoch& e, std::size_t j) const {
    const auto it = std::upper_bound(e.ids.begin(), e.ids.end(), j);
    return it == e.ids.end() ? model->top() : *it;
  }
  std::size_t position(const Epoch& e, std::size_t j) const {
    return static_cast<std::size_t>(std::lower_bound(e.ids.begin(), e.ids.end(), j) - e.ids.begin());
  }
};

struct CorridorBatch {
  detail::MomentTable moments;
  std::vector<double> final_values;
  std::size_t clamp_count = 0, internal_clamps = 0, violations = 0;
  std::vector<double> overshoots;
  double max_overshoot = 0.0;
  std::size_t jumps = 0, displaced = 0, dropped = 0;
  std::vector<std::size_t> occupancy;  // grid points per corridor id
  std::vector<std::vector<std::size_t>> transitions;
  std::size_t changes = 0, skips = 0;
  TransitionCounts probe;
  std::vector<CorridorPath> kept;
};

CorridorBatch run_corridor_batch(const CorridorContext& ctx, std::uint64_t first,
                                 std::size_t lanes, std::uint64_t keep) {
  const CorridorModel& m = *ctx.model;
  const TimeGrid& g = ctx.grid;
  const std::size_t n = g.steps();
  const std::size_t top = m.top();
  const std::size_t nc = m.corridors();
  const auto w = m.weights();

  std::vector<RandomSource> srcs;
  srcs.reserve(lanes);
  std::vector<detail::LaneJumps> lj(lanes);
  for (std::size_t l = 0; l < lanes; ++l) {
    srcs.emplace_back(ctx.seed, first + l);
    if (ctx.jumps_active) lj[l] = detail::plan_lane_jumps(srcs[l], m.jumps(), m.theta(), g, ctx.role);
  }

  CorridorBatch res;
  res.moments.resize(ctx.records.size());
  res.occupancy.assign(nc, 0);
  res.transitions.assign(nc, std::vector<std::size_t>(nc, 0));

  std::vector<double> x(lanes, ctx.x0), beta(lanes), jump(lanes), over(lanes), lo_next(lanes),
      hi_next(lanes);
  std::vector<std::uint8_t> flag_since(lanes, 0), in_bin(lanes, 0);
  std::vector<MonitorState> ms(lanes, initial_monitor(m, ctx.x0));
  std::vector<std::size_t> lo(lanes), hi(lanes);
  std::size_t epoch = 0;
  const std::size_t c0 = monitored_corridor(ms[0], m);
  for (std::size_t l = 0; l < lanes; ++l) {
    lo[l] = c0;
    hi[l] = ctx.next_in(ctx.epochs[0], c0);
  }
  res.occupancy[c0] += lanes;

  std::vector<std::size_t> keep_lane;
  for (std::size_t l = 0; l < lanes; ++l) {
    if (first + l < keep) {
      keep_lane.push_back(l);
      CorridorPath cp;
      cp.path.path_index = first + l;
      cp.path.grid_horizon = g.horizon();
      cp.path.grid_steps = n;
      cp.history.push_back(ms[l]);
      res.kept.push_back(std::move(cp));
    }
  }
  auto slot_of = [&](std::size_t l) -> CorridorPath* {
    if (first + l >= keep) return nullptr;
    const auto it = std::lower_bound(keep_lane.begin(), keep_lane.end(), l);
    return &res.kept[static_cast<std::size_t>(it - keep_lane.begin())];
  };

  std::size_t rec = 0;
  auto record = [&](std::size_t k) {
    res.moments.set_batch(rec, ctx.kt->moments(x.data(), lanes), lanes);
    for (std::size_t i = 0; i < keep_lane.size(); ++i) {
      const std::size_t l = keep_lane[i];
      CorridorPath& cp = res.kept[i];
      cp.path.step_index.push_back(k);
      cp.path.times.push_back(g.time(k));
      cp.path.values.push_back(x[l]);
      cp.path.jump_flags.push_back(flag_since[l]);
      cp.corridor.push_back(lo[l]);
    }
    std::fill(flag_since.begin(), flag_since.end(), 0);
    ++rec;
  };
  record(0);

  std::vector<double> act_vals;
  detail::IncrementSource normals(ctx.role);
  for (std::size_t s0 = 0; s0 < n; s0 += detail::kChunkSteps) {
    const std::size_t cnt = std::min(detail::kChunkSteps, n - s0);
    normals.fill(*ctx.kt, srcs, s0, cnt, ctx.sqrt_dt);
    for (std::size_t s = 0; s < cnt; ++s) {
      const std::size_t k = s0 + s;
      const double t1 = g.time(k + 1);
      const Epoch& ep = ctx.epochs[epoch];
      act_vals.resize(ep.ids.size());
      for (std::size_t i = 0; i < ep.ids.size(); ++i) act_vals[i] = ctx.g[ep.ids[i]].value[k];
      const double a_next = ctx.g[0].value[k + 1];
      const double d_next = ctx.g[top].value[k + 1];
      if (ctx.probe) {
        const ProbeSpec& pr = *ctx.probe;
        for (std::size_t l = 0; l < lanes; ++l) {
          in_bin[l] = lo[l] == pr.from && x[l] >= pr.bin_lo && x[l] < pr.bin_hi;
        }
      }
      for (std::size_t l = 0; l < lanes; ++l) {
        jump[l] = lj[l].take(k);
        const double wl = w[lo[l]];
        beta[l] = wl * ctx.g[lo[l]].value[k] + (1.0 - wl) * ctx.g[hi[l]].value[k];
        if (jump[l] != 0.0) {
          flag_since[l] = 1;
          lo_next[l] = a_next;
          hi_next[l] = d_next;
        } else {
          lo_next[l] = ctx.g[lo[l]].value[k + 1];
          const double h = ctx.g[hi[l]].value[k + 1];
          hi_next[l] = hi[l] == top ? h : std::nextafter(h, -std::numeric_limits<double>::infinity());
        }
      }
      const kernels::CorridorStep p{g.dt(), m.kappa(), m.alpha(), ctx.g[0].left[k + 1],
                                    ctx.g[top].left[k + 1], act_vals};
      ctx.kt->corridor_step(p, x.data(), beta.data(), normals.step(s), jump.data(),
                            lo_next.data(), hi_next.data(), over.data(), lanes);

      const bool new_epoch = ctx.epoch_start[k + 1] != 0;
      if (new_epoch) ++epoch;
      const Epoch& ep1 = ctx.epochs[epoch];
      for (std::size_t l = 0; l < lanes; ++l) {
        const double o = over[l];
        if (std::isnan(o) || !std::isfinite(x[l])) {
          throw NumericalError("non-finite value on path " + std::to_string(first + l), k);
        }
        if (o > 0.0) {
          res.overshoots.push_back(o);
          res.max_overshoot = std::max(res.max_overshoot, o);
          if (o > ctx.tol) ++res.clamp_count;
          if (jump[l] == 0.0 && (x[l] == lo_next[l] ? lo[l] != 0 : hi[l] != top)) {
            ++res.internal_clamps;
          }
          if (CorridorPath* cp = slot_of(l); cp != nullptr && o > ctx.tol) {
            cp->path.clamp_events.push_back({t1, o});
          }
        }
        if (x[l] < a_next || x[l] > d_next) ++res.violations;
        const bool jumped = jump[l] != 0.0;
        if (jumped || new_epoch) {
          const std::size_t from = lo[l];
          ms[l] = update_monitor(std::move(ms[l]), m, t1, x[l], jumped);
          lo[l] = monitored_corridor(ms[l], m);
          hi[l] = ctx.next_in(ep1, lo[l]);
          if (jumped) {
            ++res.transitions[from][lo[l]];
            if (lo[l] != from) {
              ++res.changes;
              const std::size_t pf = ctx.position(ep1, from), pt = ctx.position(ep1, lo[l]);
              if ((pf > pt ? pf - pt : pt - pf) > 1) ++res.skips;
            }
          }
          if (CorridorPath* cp = slot_of(l)) cp->history.push_back(ms[l]);
        }
        if (in_bin[l]) {
          ++res.probe.steps;
          if (jumped) {
            ++res.probe.jumps;
            if (lo[l] == ctx.probe->to) ++res.probe.landed;
          }
        }
        ++res.occupancy[lo[l]];
      }
      if (ctx.is_record[k + 1]) record(k + 1);
    }
  }

  res.final_values = x;
  for (std::size_t l = 0; l < lanes; ++l) {
    res.jumps += lj[l].steps.size();
    res.displaced += lj[l].displaced;
    res.dropped += lj[l].dropped;
  }
  for (std::size_t i = 0; i < keep_lane.size(); ++i) {
    const std::size_t l = keep_lane[i];
    PathSample& p = res.kept[i].path;
    for (const ClampEvent& e : p.clamp_events) p.max_overshoot = std::max(p.max_overshoot, e.overshoot);
    p.jumps = lj[l].steps.size();
    p.jumps_displaced = lj[l].displaced;
    p.jumps_dropped = lj[l].dropped;
  }
  return res;
}

void check_corridor_run(const CorridorModel& model, const SimConfig& cfg) {
  const TimeGrid grid = cfg.grid();
  const CorridorReport r = validate_corridor_model(model, grid);
  if (!r.ok()) {
    std::string what = r.config_error ? *r.config_error : "corridor model failed validation";
    for (const ConditionCheck* c : {&r.ordering, &r.drift}) {
      if (!r.config_error && !c->passed && c->first) {
        what = c->first->detail;
        break;
      }
    }
    throw ValidationError(what, to_json(r).dump());
  }
  const double a = model.stack().front().fn.eval(0.0);
  const double d = model.stack().back().fn.eval(0.0);
  if (!(cfg.x0 >= a && cfg.x0 < d)) {
    throw UsageError("x0 = " + std::to_string(cfg.x0) + " outside [" + std::to_string(a) + ", " +
                     std::to_string(d) + ")");
  }
}

}  // namespace

CorridorPath simulate_corridor_path(const CorridorModel& model, const SimConfig& cfg,
                                    const RandomSource& src, int coordinate, double rho) {
  check_corridor_run(model, cfg);
  const CorridorContext ctx(model, cfg, src.master_seed(), {coordinate, rho});
  CorridorBatch r = run_corridor_batch(ctx, src.path_index(), 1, src.path_index() + 1);
  return std::move(r.kept.front());
}

CorridorOccupancy corridor_occupancy(std::span<const CorridorPath> paths,
                                     const CorridorModel& model) {
  const std::size_t nc = model.corridors();
  CorridorOccupancy occ;
  occ.time_fraction.assign(nc, 0.0);
  occ.transitions.assign(nc, std::vector<std::size_t>(nc, 0));
  std::vector<std::size_t> counts(nc, 0);
  std::size_t total = 0;
  for (const CorridorPath& cp : paths) {
    const PathSample& p = cp.path;
    std::vector<std::size_t> c = cp.corridor;
    if (c.size() != p.values.size()) {
      c.resize(p.values.size());
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = corridor_index(model, p.times[i], p.values[i]);
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
      ++counts.at(c[i]);
      ++total;
      if (i == 0) continue;
      const bool flag = i < p.jump_flags.size() && p.jump_flags[i] != 0;
      if (flag) {
        ++occ.transitions[c[i - 1]][c[i]];
        if (c[i] != c[i - 1]) {
          ++occ.changes;
          const std::vector<std::size_t> act = model.active_at(p.times[i]);
          auto pos = [&](std::size_t j) {
            return static_cast<std::size_t>(std::lower_bound(act.begin(), act.end(), j) - act.begin());
          };
          const std::size_t a = pos(c[i - 1]), b = pos(c[i]);
          if ((a > b ? a - b : b - a) > 1) ++occ.skips;
        }
      } else if (c[i] != c[i - 1]) {
        ++occ.off_jump_changes;
      }
    }
  }
  if (total > 0) {
    for (std::size_t j = 0; j < nc; ++j) {
      occ.time_fraction[j] = static_cast<double>(counts[j]) / static_cast<double>(total);
    }
  }
  return occ;
}

TransitionCounts probe_transitions(const CorridorModel& model, const SimConfig& cfg,
                                   const ProbeSpec& probe, std::uint64_t first_path,
                                   std::size_t n_paths, std::size_t threads) {
  check_corridor_run(model, cfg);
  if (probe.from >= model.corridors() || probe.to >= model.corridors()) {
    throw ConfigError("probe corridor id out of range");
  }
  if (!(probe.bin_lo < probe.bin_hi)) throw ConfigError("probe bin is empty");
  CorridorContext ctx(model, cfg, cfg.seed, {});
  ctx.probe = probe;
  // Only the counts are needed; record nothing but the endpoints.
  ctx.records = {0, ctx.grid.steps()};
  std::fill(ctx.is_record.begin(), ctx.is_record.end(), 0);
  ctx.is_record.back() = 1;
  TransitionCounts out;
  const std::size_t lanes = detail::kBatchLanes;
  const std::size_t n_batches = (n_paths + lanes - 1) / lanes;
  detail::run_rounds<CorridorBatch>(
      n_batches, worker_count(threads),
      [&](std::size_t b) {
        const std::uint64_t first = first_path + b * lanes;
        const std::size_t m = std::min<std::size_t>(lanes, n_paths - b * lanes);
        return run_corridor_batch(ctx, first, m, 0);
      },
      [&](CorridorBatch&& r) {
        out.steps += r.probe.steps;
        out.jumps += r.probe.jumps;
        out.landed += r.probe.landed;
      });
  out.paths = n_paths;
  return out;
}

CorridorEnsemble run_corridor_ensemble(const CorridorModel& model, const SimConfig& cfg,
                                       const EnsembleOptions& opts) {
  check_corridor_run(model, cfg);
  if (cfg.n_paths == 0) throw ConfigError("n_paths must be >= 1");
  const CorridorContext ctx(model, cfg, cfg.seed, {opts.coordinate, opts.rho});
  const std::size_t nc = model.corridors();

  CorridorEnsemble out;
  out.n_paths = cfg.n_paths;
  out.record_index = ctx.records;
  for (std::size_t k : ctx.records) out.record_time.push_back(ctx.grid.time(k));
  detail::MomentTable moments;
  moments.resize(ctx.records.size());
  std::vector<std::size_t> occ(nc, 0);
  out.occupancy.transitions.assign(nc, std::vector<std::size_t>(nc, 0));

  const std::size_t lanes = detail::kBatchLanes;
  const std::size_t n_batches = (cfg.n_paths + lanes - 1) / lanes;
  const std::uint64_t keep = std::min<std::uint64_t>(opts.keep_paths, cfg.n_paths);
  detail::run_rounds<CorridorBatch>(
      n_batches, worker_count(opts.threads),
      [&](std::size_t b) {
        const std::uint64_t first = b * lanes;
        const std::size_t m = std::min<std::size_t>(lanes, cfg.n_paths - first);
        return run_corridor_batch(ctx, first, m, keep);
      },
      [&](CorridorBatch&& r) {
        moments.merge(r.moments);
        out.final_values.insert(out.final_values.end(), r.final_values.begin(),
                                r.final_values.end());
        out.clamp_count += r.clamp_count;
        out.internal_clamps += r.internal_clamps;
        out.overshoots.insert(out.overshoots.end(), r.overshoots.begin(), r.overshoots.end());
        out.max_overshoot = std::max(out.max_overshoot, r.max_overshoot);
        out.captivity_violations += r.violations;
        out.jumps += r.jumps;
        out.jumps_displaced += r.displaced;
        out.jumps_dropped += r.dropped;
        for (std::size_t i = 0; i < nc; ++i) {
          occ[i] += r.occupancy[i];
          for (std::size_t j = 0; j < nc; ++j) out.occupancy.transitions[i][j] += r.transitions[i][j];
        }
        out.occupancy.changes += r.changes;
        out.occupancy.skips += r.skips;
        for (CorridorPath& p : r.kept) out.paths.push_back(std::move(p));
      });

  const double total = static_cast<double>(cfg.n_paths) * static_cast<double>(ctx.grid.points());
  out.occupancy.time_fraction.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) out.occupancy.time_fraction[i] = static_cast<double>(occ[i]) / total;
  const std::size_t nr = ctx.records.size();
  out.stats.mean = moments.mean;
  out.stats.variance.resize(nr);
  for (std::size_t r = 0; r < nr; ++r) out.stats.variance[r] = moments.m2[r] / moments.n[r];
  out.stats.min = moments.min;
  out.stats.max = moments.max;
  return out;
}

}  // namespace captive
