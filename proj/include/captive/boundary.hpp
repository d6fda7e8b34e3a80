#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "captive/time_grid.hpp"

namespace captive {

/// Jump-sign class of a boundary. Lower boundaries may only jump down, upper
/// boundaries only up; continuous boundaries carry no jumps at all.
enum class BoundaryKind { lower_admissible, upper_admissible, continuous };

const char* to_string(BoundaryKind kind) noexcept;

namespace shape {

struct Constant {
  double value = 0.0;
};

/// value + slope * (t - segment start)
struct Linear {
  double value = 0.0;
  double slope = 0.0;
};

/// offset + amplitude * sin(frequency * (t - segment start) + phase);
/// frequency is angular.
struct Sinusoid {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
  double offset = 0.0;
};

/// Piecewise-linear interpolation through (times[i], values[i]). Knot times
/// are absolute and must span the owning segment exactly.
struct Table {
  std::vector<double> times;
  std::vector<double> values;
};

}  // namespace shape

using Shape = std::variant<shape::Constant, shape::Linear, shape::Sinusoid, shape::Table>;

struct Segment {
  double start = 0.0;
  double end = 0.0;
  Shape shape;
};

/// Discontinuity g(t) - g(t-) located at `time`.
struct BoundaryJump {
  double time = 0.0;
  double delta = 0.0;
};

/// Time-dependent cadlag boundary built from closed-form segments plus an
/// explicit jump list. Segments tile [0, T]; adjacent segments must join
/// continuously, so the jump list is the complete set of discontinuities.
/// Immutable after construction.
class BoundaryFn {
 public:
  BoundaryFn(std::vector<Segment> segments, std::vector<BoundaryJump> jumps,
             BoundaryKind kind);

  static BoundaryFn constant(double value,
                             double horizon = std::numeric_limits<double>::infinity(),
                             BoundaryKind kind = BoundaryKind::continuous);
  static BoundaryFn linear(double value, double slope,
                           double horizon = std::numeric_limits<double>::infinity(),
                           BoundaryKind kind = BoundaryKind::continuous);

  /// g(t), right-continuous: includes every jump with time <= t.
  double eval(double t) const;
  /// g(t-): excludes a jump located exactly at t. Requires 0 < t <= T.
  double eval_left(double t) const;
  /// Analytic right-derivative of the active segment; jumps are excluded.
  double right_derivative(double t) const;
  /// Sum of jump deltas located exactly at t.
  double jump_at(double t) const noexcept;

  double horizon() const noexcept { return horizon_; }
  BoundaryKind kind() const noexcept { return kind_; }
  std::span<const Segment> segments() const noexcept { return segments_; }
  std::span<const BoundaryJump> jumps() const noexcept { return jumps_; }
  bool has_jumps() const noexcept { return !jumps_.empty(); }
  /// True when the function is a single constant with no jumps.
  bool is_constant() const noexcept;

  /// Same function with a different jump-sign class (re-validated).
  BoundaryFn with_kind(BoundaryKind kind) const;

 private:
  const Segment& segment_at(double t) const;
  double continuous_part(double t) const;
  void check_domain(double t) const;

  std::vector<Segment> segments_;
  std::vector<BoundaryJump> jumps_;
  BoundaryKind kind_;
  double horizon_;
};

/// A boundary sampled on a simulation grid. Jump times are snapped to the
/// nearest grid point; `left[k]` excludes and `value[k]` includes jumps
/// snapped to index k.
struct BoundaryGrid {
  BoundaryGrid(const BoundaryFn& fn, const TimeGrid& grid);

  std::vector<double> value;
  std::vector<double> left;
  std::vector<double> derivative;
  std::vector<double> jump;
  double max_snap_distance = 0.0;
  bool constant = false;
};

struct PairViolation {
  std::size_t index = 0;
  double time = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool left_limit = false;
};

struct PairReport {
  bool ok = true;
  std::optional<PairViolation> violation;
  double max_snap_distance = 0.0;
};

/// Checks g^l < g^u for both values and left limits at every grid time.
/// Throws ConfigError for kinds that do not fit the pair roles.
PairReport validate_pair(const BoundaryFn& lower, const BoundaryFn& upper,
                         const TimeGrid& grid);

}  // namespace captive
