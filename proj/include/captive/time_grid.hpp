#pragma once

#include <cstddef>

namespace captive {

/// Uniform simulation grid t_k = k T / n on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  /// Builds the grid for step `dt`; throws ConfigError unless dt divides the
  /// horizon up to a few ulps.
  static TimeGrid from_step(double dt, double horizon);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t points() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return dt_; }

  /// Exact endpoint at k == steps().
  double time(std::size_t k) const noexcept;

  /// Grid index nearest to `t`, clamped to [0, steps()].
  std::size_t nearest_index(double t) const noexcept;

  /// Smallest index k with time(k) >= t (clamped to steps()).
  std::size_t next_index(double t) const noexcept;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  std::size_t steps_;
  double dt_;
};

}  // namespace captive
