#include "captive/transitions.hpp"

#include <algorithm>
#include <cmath>

#include "captive/error.hpp"

namespace captive {

UniformTheta::UniformTheta(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo >= -1.0 && lo < hi && hi <= 1.0)) {
    throw ConfigError("uniform theta needs -1 <= lo < hi <= 1");
  }
}

double UniformTheta::density(double theta) const {
  return theta >= lo_ && theta <= hi_ ? 1.0 / (hi_ - lo_) : 0.0;
}

double UniformTheta::mass(double lo, double hi, bool) const {
  const double w = std::min(hi, hi_) - std::max(lo, lo_);
  return w > 0.0 ? w / (hi_ - lo_) : 0.0;
}

ConstantTheta::ConstantTheta(double value) : v_(value) {
  if (!(value >= -1.0 && value <= 1.0) || value == 0.0) {
    throw ConfigError("constant theta must lie in [-1, 1] \\ {0}");
  }
}

double ConstantTheta::mass(double lo, double hi, bool closed) const {
  return v_ >= lo && (closed ? v_ <= hi : v_ < hi) ? 1.0 : 0.0;
}

std::shared_ptr<const ThetaDistribution> theta_distribution(const ThetaSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ThetaSpec::Kind::uniform:
      return std::make_shared<UniformTheta>(spec.lo, spec.hi);
    case ThetaSpec::Kind::constant:
      return std::make_shared<ConstantTheta>(spec.value);
    case ThetaSpec::Kind::none:
      break;
  }
  throw ConfigError("no theta distribution: jumps are disabled");
}

void TransitionQuery::validate() const {
  if (!theta) throw ConfigError("transition query needs a theta distribution");
  if (!(a < d)) throw ConfigError("master boundaries need a < d");
  if (!(jump_prob >= 0.0 && jump_prob <= 1.0)) throw ConfigError("jump_prob must lie in [0, 1]");
  for (const Interval* i : {&from, &to}) {
    if (!(i->lo < i->hi) || i->lo < a || i->hi > d) {
      throw ConfigError("corridor [" + std::to_string(i->lo) + ", " + std::to_string(i->hi) +
                        ") is not inside the master domain");
    }
  }
  if (!from.contains(x_minus)) {
    throw ConfigError("x_minus = " + std::to_string(x_minus) + " is not in the source corridor");
  }
}

TransitionQuery corridor_query(const CorridorModel& model, double t, double x_minus,
                               std::size_t from, std::size_t to, double jump_prob) {
  auto corridor = [&](std::size_t id) {
    if (id >= model.corridors()) throw ConfigError("corridor id out of range");
    if (!model.stack()[id].active_at(t)) throw ConfigError("corridor not in the stack at t");
    std::size_t hi = model.top();
    for (std::size_t k = id + 1; k < model.stack().size(); ++k) {
      if (model.stack()[k].active_at(t)) {
        hi = k;
        break;
      }
    }
    return Interval{model.stack()[id].fn.eval(t), model.stack()[hi].fn.eval(t), hi == model.top()};
  };
  TransitionQuery q;
  q.x_minus = x_minus;
  q.from = corridor(from);
  q.to = corridor(to);
  q.a = model.stack().front().fn.eval(t);
  q.d = model.stack().back().fn.eval(t);
  q.theta = theta_distribution(model.theta());
  q.jump_prob = jump_prob;
  return q;
}

Interval s_set(const TransitionQuery& q) {
  q.validate();
  const double m = std::min(q.x_minus - q.a, q.d - q.x_minus);
  if (!(m > 0.0)) {
    throw StateError("x_minus = " + std::to_string(q.x_minus) +
                     " lies on a master boundary: no jump room");
  }
  return Interval{(q.to.lo - q.x_minus) / m, (q.to.hi - q.x_minus) / m, q.to.closed};
}

double transition_probability(const TransitionQuery& q) {
  const Interval s = s_set(q);
  const double m = std::min(q.x_minus - q.a, q.d - q.x_minus);
  if (q.to.lo - q.x_minus > m) return 0.0;
  if (q.to.hi - q.x_minus < -m) return 0.0;
  return q.theta->mass(s.lo, s.hi, s.closed) * q.jump_prob;
}

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0, true};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double den = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / den;
  const double half = z / den * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  const double lo = k == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = k == n ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi, true};
}

TransitionEstimate estimate_transition_mc(const CorridorModel& model, const SimConfig& cfg,
                                          const Conditioning& cond) {
  if (cond.chunk_paths == 0) throw ConfigError("chunk_paths must be >= 1");
  if (cfg.n_paths == 0) throw ConfigError("n_paths must be >= 1");
  const ProbeSpec probe{cond.from, cond.to, cond.bin_lo, cond.bin_hi};
  TransitionEstimate e;
  const double lambda = model.theta().active() ? model.jumps().intensity : 0.0;
  e.step_jump_prob = -std::expm1(-lambda * cfg.dt);

  std::uint64_t first = 0;
  while (first < cfg.n_paths && e.steps < cond.min_steps) {
    const std::size_t n = std::min<std::uint64_t>(cond.chunk_paths, cfg.n_paths - first);
    const TransitionCounts c = probe_transitions(model, cfg, probe, first, n, cond.threads);
    e.steps += c.steps;
    e.jumps += c.jumps;
    e.landed += c.landed;
    first += n;
  }
  e.paths = first;
  e.reached_min_steps = e.steps >= cond.min_steps;
  if (e.steps < kMinConditioningSamples) {
    throw StatisticalError("only " + std::to_string(e.steps) +
                           " conditioning steps in the bin; raise n_paths or the horizon");
  }
  e.fraction = e.jumps > 0 ? static_cast<double>(e.landed) / static_cast<double>(e.jumps) : 0.0;
  e.estimate = e.fraction * e.step_jump_prob;
  const Interval w = wilson_interval(e.landed, e.jumps);
  e.ci_lo = w.lo * e.step_jump_prob;
  e.ci_hi = w.hi * e.step_jump_prob;

  const double centre = 0.5 * (cond.bin_lo + cond.bin_hi);
  if (lambda > 0.0) {
    e.analytic_center =
        transition_probability(corridor_query(model, 0.0, centre, cond.from, cond.to, e.step_jump_prob));
    constexpr int kBinPoints = 1000;
    double acc = 0.0;
    for (int i = 0; i < kBinPoints; ++i) {
      const double x = cond.bin_lo + (cond.bin_hi - cond.bin_lo) * (i + 0.5) / kBinPoints;
      acc += transition_probability(corridor_query(model, 0.0, x, cond.from, cond.to, e.step_jump_prob));
    }
    e.analytic_average = acc / kBinPoints;
  }
  return e;
}

}  // namespace captive
