#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "captive/random.hpp"
#include "captive/time_grid.hpp"

namespace captive {

/// How a second jump process relates to the primary one.
enum class JumpCorrelation { independent, common, thinned };

const char* to_string(JumpCorrelation c) noexcept;

/// Finite-activity Poisson driver with unit jumps.
struct JumpSpec {
  double intensity = 0.0;  // lambda, jumps per unit time
  JumpCorrelation correlation = JumpCorrelation::independent;
  double share = 1.0;  // thinned: probability a primary arrival is shared

  /// Throws ConfigError for negative or infinite intensity or a share
  /// outside [0, 1].
  void validate() const;
};

/// n normal increments with variance dt. Increment k is the cosine (k even)
/// or sine (k odd) output of the Box-Muller pair of block k / 2 in `stream`,
/// scaled by sqrt(dt); the simulator draws exactly these values.
std::vector<double> brownian_increments(const RandomSource& src, double dt, std::size_t n,
                                        Stream stream = Stream::brownian);

/// Arrival times of the primary process in (0, horizon], from exponential
/// inter-arrival times.
std::vector<double> poisson_jump_times(const RandomSource& src, const JumpSpec& spec,
                                       double horizon);

/// Arrival times of the partner process used by the second coordinate of a
/// two-coordinate model. Marginally Poisson with the same intensity.
std::vector<double> partner_jump_times(const RandomSource& src, const JumpSpec& spec,
                                       double horizon);

/// Increments (dW1, dW2) with per-step correlation rho:
/// dW2 = rho dW1 + sqrt(1 - rho^2) dZ, Z drawn from Stream::brownian2.
std::pair<std::vector<double>, std::vector<double>> correlated_brownian_pair(
    const RandomSource& src, double rho, double dt, std::size_t n);

/// Jump times assigned to simulation steps. Step s is the transition
/// t_s -> t_{s+1}; a jump at time t goes to the first step whose end time is
/// >= t, at most one per step, with surplus jumps moved to later steps.
struct JumpSchedule {
  std::vector<std::size_t> steps;  // increasing
  std::size_t displaced = 0;       // jumps moved past their natural step
  std::size_t dropped = 0;         // surplus jumps pushed beyond the horizon
};

JumpSchedule snap_jumps(const std::vector<double>& times, const TimeGrid& grid);

}  // namespace captive
