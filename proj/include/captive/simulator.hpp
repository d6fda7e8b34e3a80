#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "captive/boundary.hpp"
#include "captive/coefficients.hpp"
#include "captive/drivers.hpp"
#include "captive/random.hpp"
#include "captive/time_grid.hpp"

namespace captive {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  std::size_t n_paths = 1;
  double x0 = 0.0;
  double clamp_tolerance = 1e-9;
  std::size_t record_stride = 1;
  std::uint64_t seed = 0;

  /// Throws ConfigError on non-positive dt/horizon, zero stride or a
  /// negative tolerance, and when dt does not divide the horizon.
  TimeGrid grid() const;
};

enum class BoundarySide { lower, upper };

const char* to_string(BoundarySide s) noexcept;

struct ClampEvent {
  double time = 0.0;
  double overshoot = 0.0;
};

struct BoundaryHit {
  double time = 0.0;
  BoundarySide side = BoundarySide::lower;
};

/// One trajectory recorded every `record_stride` grid steps (the final grid
/// point is always recorded). A jump flag marks a jump in any step since the
/// previous record. Clamp events and hits are logged at full resolution.
struct PathSample {
  std::uint64_t path_index = 0;
  // Simulation grid; zero steps for hand-built samples.
  double grid_horizon = 0.0;
  std::size_t grid_steps = 0;
  std::vector<std::size_t> step_index;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<std::uint8_t> jump_flags;
  std::vector<ClampEvent> clamp_events;  // overshoot beyond clamp tolerance
  std::vector<BoundaryHit> boundary_hits;  // arrivals onto a boundary
  double max_overshoot = 0.0;
  std::size_t jumps = 0;
  std::size_t jumps_displaced = 0;
  std::size_t jumps_dropped = 0;
};

/// Coefficients on a boundary pair with their jump driver. Not yet known to
/// be admissible; see validate().
struct CaptiveModel {
  CoefficientSet coefficients;
  BoundaryFn lower;
  BoundaryFn upper;
  JumpSpec jumps;
};

struct MonotoneReport {
  bool applies = false;  // continuous martingale or pure-jump coefficients
  bool ok = true;
  std::optional<Counterexample> first;
};

/// Rejects continuous-martingale and pure-jump coefficients unless the lower
/// boundary is non-increasing and the upper one non-decreasing on the grid.
MonotoneReport validate_monotone_bounds(const CoefficientSet& cs, const BoundaryFn& lower,
                                        const BoundaryFn& upper, const TimeGrid& grid);

struct ValidationReport {
  PairReport pair;
  AdmissibilityReport admissibility;
  MonotoneReport monotone;
  std::optional<std::string> config_error;  // kind mismatch, bad jump spec

  bool ok() const noexcept {
    return !config_error && pair.ok && admissibility.ok() && monotone.ok;
  }
};

/// Runs every validator; failures are reported, not thrown.
ValidationReport validation_report(const CaptiveModel& model, const TimeGrid& grid);

/// A model that passed validation on a specific grid. Simulation entry points
/// only accept this type.
class ValidatedModel {
 public:
  const CaptiveModel& model() const noexcept { return model_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidatedModel(CaptiveModel m, TimeGrid g, ValidationReport r)
      : model_(std::move(m)), grid_(g), report_(std::move(r)) {}
  friend ValidatedModel validate(const CaptiveModel&, const TimeGrid&);

  CaptiveModel model_;
  TimeGrid grid_;
  ValidationReport report_;
};

/// Throws ValidationError (report JSON in details()) unless every validator
/// passes.
ValidatedModel validate(const CaptiveModel& model, const TimeGrid& grid);

/// Euler-Maruyama path with clamping. Throws UsageError when cfg's grid
/// differs from the validated one or x0 is outside [g^l(0), g^u(0)], and
/// NumericalError on NaN. Coordinate 2 selects the second-coordinate drivers
/// of a two-coordinate model (see EnsembleOptions).
PathSample simulate_path(const ValidatedModel& vm, const SimConfig& cfg, const RandomSource& src,
                         int coordinate = 1, double rho = 0.0);

struct EnsembleOptions {
  std::size_t keep_paths = 0;  // leading paths returned in full
  std::size_t threads = 0;     // 0: hardware concurrency capped by CAPTIVE_THREADS
  std::size_t hit_bins = 20;
  /// 2: drive the path with dW2 = rho dW1 + sqrt(1 - rho^2) dZ and the partner
  /// jump process, as the second coordinate of a polar model.
  int coordinate = 1;
  double rho = 0.0;
};

struct TimeStats {
  std::vector<double> mean;
  std::vector<double> variance;  // population variance over paths
  std::vector<double> min;
  std::vector<double> max;
};

struct EnsembleSummary {
  std::size_t n_paths = 0;
  std::vector<std::size_t> record_index;  // grid indices of `stats` entries
  std::vector<double> record_time;
  TimeStats stats;
  std::vector<double> final_values;
  std::vector<double> path_max_overshoot;
  std::size_t clamp_count = 0;       // overshoots beyond clamp tolerance
  std::size_t positive_overshoots = 0;
  std::vector<double> overshoots;    // every positive pre-clamp overshoot
  double max_overshoot = 0.0;
  std::size_t captivity_violations = 0;  // post-clamp, always 0 unless broken
  std::size_t hits_lower = 0;
  std::size_t hits_upper = 0;
  std::size_t paths_hitting = 0;
  std::vector<double> hit_bin_edges;
  std::vector<std::size_t> hit_histogram_lower;
  std::vector<std::size_t> hit_histogram_upper;
  std::size_t jumps = 0;
  std::size_t jumps_displaced = 0;
  std::size_t jumps_dropped = 0;
  std::vector<PathSample> paths;
};

/// n_paths paths with path indices 0..n_paths-1 of cfg.seed. Results do not
/// depend on the number of workers.
EnsembleSummary run_ensemble(const ValidatedModel& vm, const SimConfig& cfg,
                             const EnsembleOptions& opts = {});

/// Quantile by linear interpolation of order statistics, q in [0, 1].
double quantile(std::vector<double> v, double q);

struct CaptivityViolation {
  std::size_t record = 0;
  double time = 0.0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Recorded points with value < g^l(t) - tol or > g^u(t) + tol.
std::vector<CaptivityViolation> check_captivity(const PathSample& p, const BoundaryFn& lower,
                                                const BoundaryFn& upper, double tol);

struct AbsorptionReport {
  bool hit = false;
  bool ok = true;
  double tau = 0.0;
  std::optional<BoundarySide> side;
  std::optional<std::size_t> first_failure;  // record index that moved
};

/// After the first record equal to a boundary, every later value must stay
/// within 1e-12 of the hitting value. A value merely close to a boundary is
/// not a hit: sigma is still nonzero there and the path keeps moving. Throws
/// ConfigError for non-constant boundaries.
AbsorptionReport check_absorption(const PathSample& p, const BoundaryFn& lower,
                                  const BoundaryFn& upper);

/// Worker count: `requested` if non-zero, else hardware concurrency, capped by
/// CAPTIVE_THREADS when set.
std::size_t worker_count(std::size_t requested = 0);

}  // namespace captive
