#include "captive/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "captive/error.hpp"

namespace captive {

const char* to_string(BoundaryKind kind) noexcept {
  switch (kind) {
    case BoundaryKind::lower_admissible:
      return "lower-admissible";
    case BoundaryKind::upper_admissible:
      return "upper-admissible";
    case BoundaryKind::continuous:
      return "continuous";
  }
  return "unknown";
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Index i of the table interval [times[i], times[i+1]) holding t; the last
// interval is closed on the right.
std::size_t table_interval(const shape::Table& tab, double t) {
  const auto& ts = tab.times;
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  return std::min(i, ts.size() - 2);
}

double shape_value(const Segment& seg, double t) {
  return std::visit(
      Overloaded{
          [](const shape::Constant& c) { return c.value; },
          [&](const shape::Linear& l) { return l.value + l.slope * (t - seg.start); },
          [&](const shape::Sinusoid& s) {
            return s.offset + s.amplitude * std::sin(s.frequency * (t - seg.start) + s.phase);
          },
          [&](const shape::Table& tab) {
            const std::size_t i = table_interval(tab, t);
            const double t0 = tab.times[i];
            const double t1 = tab.times[i + 1];
            if (t == t0) return tab.values[i];
            if (t == t1) return tab.values[i + 1];
            const double w = (t - t0) / (t1 - t0);
            return tab.values[i] + w * (tab.values[i + 1] - tab.values[i]);
          },
      },
      seg.shape);
}

double shape_derivative(const Segment& seg, double t) {
  return std::visit(
      Overloaded{
          [](const shape::Constant&) { return 0.0; },
          [](const shape::Linear& l) { return l.slope; },
          [&](const shape::Sinusoid& s) {
            return s.amplitude * s.frequency * std::cos(s.frequency * (t - seg.start) + s.phase);
          },
          [&](const shape::Table& tab) {
            const std::size_t i = table_interval(tab, t);
            return (tab.values[i + 1] - tab.values[i]) / (tab.times[i + 1] - tab.times[i]);
          },
      },
      seg.shape);
}

void check_shape(const Segment& seg, std::size_t index) {
  const std::string where = "segment " + std::to_string(index);
  std::visit(Overloaded{
                 [&](const shape::Constant& c) {
                   if (!std::isfinite(c.value)) throw ConfigError(where + ": non-finite constant");
                 },
                 [&](const shape::Linear& l) {
                   if (!std::isfinite(l.value) || !std::isfinite(l.slope)) {
                     throw ConfigError(where + ": non-finite linear parameters");
                   }
                 },
                 [&](const shape::Sinusoid& s) {
                   if (!std::isfinite(s.amplitude) || !std::isfinite(s.frequency) ||
                       !std::isfinite(s.phase) || !std::isfinite(s.offset)) {
                     throw ConfigError(where + ": non-finite sinusoid parameters");
                   }
                 },
                 [&](const shape::Table& tab) {
                   if (tab.times.size() < 2 || tab.times.size() != tab.values.size()) {
                     throw ConfigError(where + ": table needs >= 2 matching knots");
                   }
                   if (!std::isfinite(seg.end)) {
                     throw ConfigError(where + ": table segment must be finite");
                   }
                   if (tab.times.front() != seg.start || tab.times.back() != seg.end) {
                     throw ConfigError(where + ": table knots must span the segment");
                   }
                   for (std::size_t i = 0; i < tab.times.size(); ++i) {
                     if (!std::isfinite(tab.values[i])) {
                       throw ConfigError(where + ": non-finite table value");
                     }
                     if (i > 0 && !(tab.times[i] > tab.times[i - 1])) {
                       throw ConfigError(where + ": table times must increase strictly");
                     }
                   }
                 },
             },
             seg.shape);
}

}  // namespace

BoundaryFn::BoundaryFn(std::vector<Segment> segments, std::vector<BoundaryJump> jumps,
                       BoundaryKind kind)
    : segments_(std::move(segments)), jumps_(std::move(jumps)), kind_(kind), horizon_(0.0) {
  if (segments_.empty()) {
    throw ConfigError("boundary needs at least one segment");
  }
  if (segments_.front().start != 0.0) {
    throw ConfigError("boundary segments must start at t = 0");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& seg = segments_[i];
    if (!(seg.end > seg.start)) {
      throw ConfigError("segment " + std::to_string(i) + " has end <= start");
    }
    if (i + 1 < segments_.size()) {
      if (segments_[i + 1].start != seg.end) {
        throw ConfigError("segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
                          " leave a gap or overlap");
      }
      if (!std::isfinite(seg.end)) {
        throw ConfigError("only the last segment may be unbounded");
      }
    }
    check_shape(seg, i);
  }
  horizon_ = segments_.back().end;

  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    const double t = segments_[i].end;
    const double a = shape_value(segments_[i], t);
    const double b = shape_value(segments_[i + 1], t);
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
      throw ConfigError("segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
                        " do not join continuously at t = " + std::to_string(t) +
                        "; declare the discontinuity in the jump list");
    }
  }

  std::sort(jumps_.begin(), jumps_.end(),
            [](const BoundaryJump& a, const BoundaryJump& b) { return a.time < b.time; });
  for (const BoundaryJump& j : jumps_) {
    if (!(j.time > 0.0) || !(j.time <= horizon_)) {
      throw ConfigError("boundary jump time outside (0, T]");
    }
    if (!std::isfinite(j.delta)) {
      throw ConfigError("non-finite boundary jump");
    }
    switch (kind_) {
      case BoundaryKind::lower_admissible:
        if (j.delta > 0.0) throw ConfigError("lower-admissible boundary has an upward jump");
        break;
      case BoundaryKind::upper_admissible:
        if (j.delta < 0.0) throw ConfigError("upper-admissible boundary has a downward jump");
        break;
      case BoundaryKind::continuous:
        throw ConfigError("continuous boundary cannot carry jumps");
    }
  }
}

BoundaryFn BoundaryFn::constant(double value, double horizon, BoundaryKind kind) {
  return BoundaryFn({Segment{0.0, horizon, shape::Constant{value}}}, {}, kind);
}

BoundaryFn BoundaryFn::linear(double value, double slope, double horizon, BoundaryKind kind) {
  return BoundaryFn({Segment{0.0, horizon, shape::Linear{value, slope}}}, {}, kind);
}

BoundaryFn BoundaryFn::with_kind(BoundaryKind kind) const {
  return BoundaryFn(segments_, jumps_, kind);
}

bool BoundaryFn::is_constant() const noexcept {
  return jumps_.empty() && segments_.size() == 1 &&
         std::holds_alternative<shape::Constant>(segments_.front().shape);
}

void BoundaryFn::check_domain(double t) const {
  if (!(t >= 0.0) || !(t <= horizon_)) {
    throw DomainError("boundary evaluated at t = " + std::to_string(t) + " outside [0, " +
                      std::to_string(horizon_) + "]");
  }
}

const Segment& BoundaryFn::segment_at(double t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const Segment& s) { return v < s.start; });
  // it points past the segment with start <= t.
  return *(it - 1);
}

double BoundaryFn::continuous_part(double t) const {
  return shape_value(segment_at(t), t);
}

double BoundaryFn::eval(double t) const {
  check_domain(t);
  double v = continuous_part(t);
  for (const BoundaryJump& j : jumps_) {
    if (j.time > t) break;
    v += j.delta;
  }
  return v;
}

double BoundaryFn::eval_left(double t) const {
  if (!(t > 0.0)) {
    throw DomainError("left limit requires t > 0");
  }
  check_domain(t);
  double v = continuous_part(t);
  for (const BoundaryJump& j : jumps_) {
    if (j.time >= t) break;
    v += j.delta;
  }
  return v;
}

double BoundaryFn::right_derivative(double t) const {
  check_domain(t);
  return shape_derivative(segment_at(t), t);
}

double BoundaryFn::jump_at(double t) const noexcept {
  double d = 0.0;
  for (const BoundaryJump& j : jumps_) {
    if (j.time == t) d += j.delta;
  }
  return d;
}

BoundaryGrid::BoundaryGrid(const BoundaryFn& fn, const TimeGrid& grid) {
  if (fn.horizon() < grid.horizon()) {
    throw ConfigError("boundary horizon shorter than the simulation horizon");
  }
  const std::size_t n = grid.points();
  value.resize(n);
  left.resize(n);
  derivative.resize(n);
  jump.assign(n, 0.0);
  constant = fn.is_constant();

  for (const BoundaryJump& j : fn.jumps()) {
    if (j.time > grid.horizon()) continue;
    std::size_t k = std::max<std::size_t>(grid.nearest_index(j.time), 1);
    max_snap_distance = std::max(max_snap_distance, std::abs(grid.time(k) - j.time));
    jump[k] += j.delta;
  }

  // Jump-free view of the segments; jumps are re-added at their snapped index.
  const BoundaryFn smooth(std::vector<Segment>(fn.segments().begin(), fn.segments().end()), {},
                          BoundaryKind::continuous);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.time(k);
    const double base = smooth.eval(t);
    left[k] = base + cumulative;
    cumulative += jump[k];
    value[k] = base + cumulative;
    derivative[k] = fn.right_derivative(t);
  }
}

PairReport validate_pair(const BoundaryFn& lower, const BoundaryFn& upper, const TimeGrid& grid) {
  if (lower.kind() == BoundaryKind::upper_admissible) {
    throw ConfigError("lower boundary has kind upper-admissible");
  }
  if (upper.kind() == BoundaryKind::lower_admissible) {
    throw ConfigError("upper boundary has kind lower-admissible");
  }
  PairReport report;
  const BoundaryGrid lg(lower, grid);
  const BoundaryGrid ug(upper, grid);
  report.max_snap_distance = std::max(lg.max_snap_distance, ug.max_snap_distance);
  for (std::size_t k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    const double l = lower.eval(t);
    const double u = upper.eval(t);
    if (!(l < u)) {
      report.ok = false;
      report.violation = PairViolation{k, t, l, u, false};
      return report;
    }
    if (k > 0) {
      const double ll = lower.eval_left(t);
      const double ul = upper.eval_left(t);
      if (!(ll < ul)) {
        report.ok = false;
        report.violation = PairViolation{k, t, ll, ul, true};
        return report;
      }
    }
  }
  return report;
}

}  // namespace captive
