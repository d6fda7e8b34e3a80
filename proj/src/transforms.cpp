#include "captive/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "captive/error.hpp"

namespace captive {

CoefficientSet captive_from_bounded(std::shared_ptr<const BoundedMap> map) {
  if (!map) throw ConfigError("bounded map is null");
  const std::vector<std::string> v = map->violations();
  if (!v.empty()) throw ConfigError("bounded map '" + map->name + "' rejected: " + v.front());
  return CoefficientSet::bounded(std::move(map));
}

CaptiveModel bounded_model(std::shared_ptr<const BoundedMap> map, double horizon) {
  const double a = map ? map->a : 0.0;
  const double b = map ? map->b : 0.0;
  CoefficientSet cs = captive_from_bounded(std::move(map));
  return CaptiveModel{std::move(cs),
                      BoundaryFn::constant(a, horizon, BoundaryKind::lower_admissible),
                      BoundaryFn::constant(b, horizon, BoundaryKind::upper_admissible),
                      JumpSpec{}};
}

const char* to_string(Direction d) noexcept {
  return d == Direction::increasing ? "increasing" : "decreasing";
}

MonotoneMap builtin_monotone_map(const std::string& name) {
  MonotoneMap m;
  m.name = name;
  if (name == "exp") {
    m.f = [](double x) { return std::exp(x); };
    m.f1 = m.f;
    m.f2 = m.f;
  } else if (name == "reciprocal") {
    m.direction = Direction::decreasing;
    m.f = [](double x) { return 1.0 / x; };
    m.f1 = [](double x) { return -1.0 / (x * x); };
    m.f2 = [](double x) { return 2.0 / (x * x * x); };
    m.domain_lo = std::numeric_limits<double>::min();
  } else if (name == "identity") {
    m.f = [](double x) { return x; };
    m.f1 = [](double) { return 1.0; };
    m.f2 = [](double) { return 0.0; };
  } else if (name == "sin-construct") {
    m.f = [](double x) { return std::sin(x); };
    m.f1 = [](double x) { return std::cos(x); };
    m.f2 = [](double x) { return -std::sin(x); };
    m.domain_lo = -std::numbers::pi / 2;
    m.domain_hi = std::numbers::pi / 2;
  } else {
    throw ConfigError("unknown map '" + name + "' (exp, reciprocal, identity, sin-construct)");
  }
  return m;
}

MonotoneCheck check_monotone(const MonotoneMap& map, double lo, double hi, std::size_t samples) {
  MonotoneCheck c;
  c.lo = lo;
  c.hi = hi;
  c.samples = samples;
  if (!map.f || !map.f1) {
    c.ok = false;
    c.detail = "map lacks f or f1";
    return c;
  }
  if (!(lo <= hi) || samples < 2) {
    c.ok = false;
    c.detail = "empty envelope";
    return c;
  }
  if (lo < map.domain_lo || hi > map.domain_hi) {
    c.ok = false;
    c.first_bad = lo < map.domain_lo ? lo : hi;
    c.detail = "envelope [" + std::to_string(lo) + ", " + std::to_string(hi) +
               "] leaves the domain of " + map.name;
    return c;
  }
  const double sign = map.direction == Direction::increasing ? 1.0 : -1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double d = map.f1(x);
    if (!(sign * d > 0.0) || !std::isfinite(d)) {
      c.ok = false;
      c.first_bad = x;
      c.detail = map.name + " is not " + to_string(map.direction) + " at x = " + std::to_string(x);
      return c;
    }
    c.lipschitz = std::max(c.lipschitz, std::abs(d));
  }
  return c;
}

namespace {

BoundaryKind mapped_kind(BoundaryKind k, bool flip) {
  if (!flip || k == BoundaryKind::continuous) return k;
  return k == BoundaryKind::lower_admissible ? BoundaryKind::upper_admissible
                                              : BoundaryKind::lower_admissible;
}

/// f(src) sampled at `times` (ascending, from 0) as a table plus jumps.
/// `value[i]` and `left[i]` are the source values at times[i]; a jump sits at
/// times[i] whenever they differ.
BoundaryFn mapped_boundary(const MonotoneMap& m, const std::vector<double>& times,
                           const std::vector<double>& value, const std::vector<double>& left,
                           BoundaryKind kind) {
  std::vector<BoundaryJump> jumps;
  std::vector<double> cont(times.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double fv = m.f(value[i]);
    if (i > 0 && value[i] != left[i]) {
      const double d = fv - m.f(left[i]);
      if (d != 0.0) {
        jumps.push_back({times[i], d});
        acc += d;
      }
    }
    cont[i] = fv - acc;
  }
  std::vector<Segment> segs;
  if (times.size() == 1) {
    segs.push_back({0.0, std::numeric_limits<double>::infinity(), shape::Constant{cont[0]}});
  } else {
    segs.push_back({times.front(), times.back(), shape::Table{times, cont}});
  }
  return BoundaryFn(std::move(segs), std::move(jumps), kind);
}

}  // namespace

MappedPath map_path(const PathSample& p, const MonotoneMap& map, const BoundaryFn& lower,
                    const BoundaryFn& upper) {
  if (p.values.empty()) throw ConfigError("cannot map an empty path");
  // Knot times and source boundary values/left limits at each knot.
  std::vector<double> times;
  std::vector<double> lv, ll, uv, ul;
  if (p.grid_steps > 0) {
    const TimeGrid g(p.grid_horizon, p.grid_steps);
    const BoundaryGrid lg(lower, g), ug(upper, g);
    for (std::size_t k = 0; k < g.points(); ++k) times.push_back(g.time(k));
    lv = lg.value;
    ll = lg.left;
    uv = ug.value;
    ul = ug.left;
  } else {
    times = p.times;
    if (times.front() != 0.0) times.insert(times.begin(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double t = times[i];
      lv.push_back(lower.eval(t));
      uv.push_back(upper.eval(t));
      ll.push_back(t > 0.0 ? lower.eval_left(t) : lv.back());
      ul.push_back(t > 0.0 ? upper.eval_left(t) : uv.back());
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    lo = std::min({lo, lv[i], ll[i]});
    hi = std::max({hi, uv[i], ul[i]});
  }
  for (double v : p.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  MonotoneCheck check = check_monotone(map, lo, hi);
  if (!check.ok) throw ConfigError("map '" + map.name + "' rejected: " + check.detail);

  const bool flip = map.direction == Direction::decreasing;
  BoundaryFn fl = mapped_boundary(map, times, lv, ll, mapped_kind(lower.kind(), flip));
  BoundaryFn fu = mapped_boundary(map, times, uv, ul, mapped_kind(upper.kind(), flip));

  MappedPath out{p, flip ? std::move(fu) : std::move(fl), flip ? std::move(fl) : std::move(fu),
                 check};
  for (double& v : out.path.values) v = map.f(v);
  for (ClampEvent& e : out.path.clamp_events) e.overshoot *= check.lipschitz;
  out.path.max_overshoot *= check.lipschitz;
  if (flip) {
    for (BoundaryHit& h : out.path.boundary_hits) {
      h.side = h.side == BoundarySide::lower ? BoundarySide::upper : BoundarySide::lower;
    }
  }
  return out;
}

}  // namespace captive
