#include "captive/time_grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "captive/error.hpp"

namespace captive {

TimeGrid::TimeGrid(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), dt_(0.0) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("time grid horizon must be positive and finite");
  }
  if (steps == 0) {
    throw ConfigError("time grid needs at least one step");
  }
  dt_ = horizon / static_cast<double>(steps);
}

TimeGrid TimeGrid::from_step(double dt, double horizon) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("dt must be positive and finite");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("horizon must be positive and finite");
  }
  const double ratio = horizon / dt;
  if (ratio > 1e12) {
    throw ConfigError("too many steps for horizon/dt");
  }
  const double n = std::round(ratio);
  const double eps = std::numeric_limits<double>::epsilon();
  if (n < 1.0 || std::abs(n * dt - horizon) > 8.0 * eps * std::max(horizon, 1.0)) {
    throw ConfigError("dt = " + std::to_string(dt) + " does not divide horizon " +
                      std::to_string(horizon));
  }
  return TimeGrid(horizon, static_cast<std::size_t>(n));
}

double TimeGrid::time(std::size_t k) const noexcept {
  if (k >= steps_) {
    return horizon_;
  }
  return static_cast<double>(k) * horizon_ / static_cast<double>(steps_);
}

std::size_t TimeGrid::nearest_index(double t) const noexcept {
  if (!(t > 0.0)) {
    return 0;
  }
  const double k = std::round(t * static_cast<double>(steps_) / horizon_);
  if (k >= static_cast<double>(steps_)) {
    return steps_;
  }
  return static_cast<std::size_t>(k);
}

std::size_t TimeGrid::next_index(double t) const noexcept {
  if (!(t > 0.0)) {
    return 0;
  }
  const double k = std::ceil(t * static_cast<double>(steps_) / horizon_);
  if (k >= static_cast<double>(steps_)) {
    return steps_;
  }
  auto idx = static_cast<std::size_t>(k);
  // Guard against the scaled product rounding up past an exact grid time.
  if (idx > 0 && time(idx - 1) >= t) {
    --idx;
  }
  return idx;
}

}  // namespace captive
