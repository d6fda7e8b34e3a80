#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "captive/corridors.hpp"
#include "captive/simulator.hpp"

namespace captive {

using Point2 = std::array<double, 2>;

/// (r cos phi, r sin phi) per index. ConfigError on a length mismatch.
std::vector<Point2> to_cartesian(std::span<const double> radius, std::span<const double> angle);

struct PolarTrajectory {
  std::uint64_t path_index = 0;
  std::vector<double> times;
  std::vector<double> radius;
  std::vector<double> angle;
  std::vector<Point2> points;
  std::vector<std::uint8_t> radial_jumps;
  std::vector<std::uint8_t> angular_jumps;
  std::vector<std::size_t> corridor;  // radial corridor id; empty without corridors
};

/// Indices whose point norm is below a - tol or above d + tol.
std::vector<std::size_t> annulus_check(const PolarTrajectory& traj, double a, double d,
                                       double tol);

/// Mean-reverting coordinate on constant boundaries [lo, hi]:
/// kappa (beta - x) dt + alpha (x - lo)(hi - x) dW + theta min(x - lo, hi - x) dJ.
struct PolarCoordinate {
  double lo = 0.0;
  double hi = 1.0;
  double beta = 0.5;
  double kappa = 1.0;
  double alpha = 1.0;
  ThetaSpec theta = ThetaSpec::uniform();
  JumpSpec jumps;

  CaptiveModel model(double horizon) const;
};

/// Radius from either a plain coordinate or a corridor stack; the angle is
/// captive in its own boundaries (typically [0, 2 pi], not wrapped). The
/// angle uses the second-coordinate drivers: dW2 = rho dW1 + sqrt(1-rho^2) dZ
/// and its jump process is the partner of the radial one per
/// angle.jumps.correlation.
struct PolarModel {
  std::optional<PolarCoordinate> radial;
  std::optional<CorridorModel> corridors;
  PolarCoordinate angle;
  double rho = 0.0;

  double inner() const;
  double outer() const;
};

struct RadialHistogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::vector<double> fraction;
};

/// Histogram of every recorded radius over [a, d].
RadialHistogram radial_histogram(std::span<const PolarTrajectory> trajs, double a, double d,
                                 std::size_t bins = 20);

struct PolarEnsemble {
  std::vector<PolarTrajectory> trajectories;
  std::size_t radial_violations = 0;  // engine captivity counters
  std::size_t angular_violations = 0;
  std::size_t radial_jumps = 0;
  std::size_t angular_jumps = 0;
  RadialHistogram histogram;
};

/// Simulates cfg.n_paths polar paths; cfg.x0 is the initial radius. Every
/// path is kept at cfg.record_stride. ConfigError when correlated jump
/// processes have different intensities or rho is outside [-1, 1].
PolarEnsemble run_polar(const PolarModel& model, const SimConfig& cfg, double phi0,
                        std::size_t hist_bins = 20, std::size_t threads = 0);

}  // namespace captive
