#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "captive/boundary.hpp"
#include "captive/coefficients.hpp"
#include "captive/drivers.hpp"
#include "captive/random.hpp"
#include "captive/simulator.hpp"
#include "captive/time_grid.hpp"

namespace captive {

/// One boundary of a corridor stack and the closed time segment on which it
/// belongs to the stack. The function itself must be defined on [0, T].
struct StackBoundary {
  BoundaryFn fn;
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();

  /// Segment membership with a relative tolerance that absorbs grid-time
  /// rounding; segment ends are required to be grid times.
  bool active_at(double t) const noexcept {
    return t >= start - time_eps(start) && t <= end + time_eps(end);
  }
  static double time_eps(double t) noexcept {
    const double a = t < 0.0 ? -t : t;
    return 1e-12 * (a > 1.0 ? a : 1.0);
  }
};

/// Master boundaries g0 < gm with internal continuous boundaries in between.
/// Corridor j is [g_j, g_next) where g_next is the next boundary above g_j
/// that is in the stack at that time; the topmost corridor is closed.
/// weights[j] interpolates the target of the corridor whose lower boundary is
/// stack entry j:  beta = w_j g_j + (1 - w_j) g_next.
/// Dynamics: dX = kappa (beta(Psi) - X) dt + alpha prod_j (X - g_j) dW
///                + theta min(X- - g0, gm - X-) dJ.
class CorridorModel {
 public:
  /// Throws ConfigError when the stack has fewer than two entries, the
  /// masters do not cover the whole horizon, an internal boundary has jumps
  /// or a non-continuous kind, or a weight lies outside (0, 1).
  CorridorModel(std::vector<StackBoundary> stack, std::vector<double> weights, JumpSpec jumps,
                ThetaSpec theta = ThetaSpec::uniform(), double kappa = 1.0, double alpha = 1.0);

  /// Constant levels l0 < l1 < ... (all on the whole horizon).
  static CorridorModel levels(std::vector<double> levels, std::vector<double> weights,
                              JumpSpec jumps, ThetaSpec theta = ThetaSpec::uniform());

  std::span<const StackBoundary> stack() const noexcept { return stack_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const JumpSpec& jumps() const noexcept { return jumps_; }
  const ThetaSpec& theta() const noexcept { return theta_; }
  double kappa() const noexcept { return kappa_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t top() const noexcept { return stack_.size() - 1; }
  /// Number of corridor ids (stack entries below the top).
  std::size_t corridors() const noexcept { return weights_.size(); }

  /// Stack indices of the boundaries in the stack at t, in order.
  std::vector<std::size_t> active_at(double t) const;

 private:
  std::vector<StackBoundary> stack_;
  std::vector<double> weights_;
  JumpSpec jumps_;
  ThetaSpec theta_;
  double kappa_;
  double alpha_;
};

/// Corridor id (stack index of its lower boundary) containing x at t, with
/// half-open corridors and the top one closed. StateError outside [g0, gm].
std::size_t corridor_index(const CorridorModel& model, double t, double x);

/// Corridor target w_j g_j(t) + (1 - w_j) g_next(t) of corridor id j at t.
double corridor_level(const CorridorModel& model, std::size_t corridor, double t);

struct MonitorEntry {
  bool active = false;  // boundary is in the stack and its clock has started
  double x = 0.0;       // X at tau
  double tau = 0.0;

  bool operator==(const MonitorEntry&) const = default;
};

/// Monitoring process: per stack boundary, the last jump time inside its
/// segment (or the segment start) and X at that time.
struct MonitorState {
  double time = 0.0;  // time of the latest update
  double last_jump_time = 0.0;
  std::vector<MonitorEntry> entries;

  bool operator==(const MonitorState&) const = default;
};

/// Monitor at t = 0 for a path started at x0.
MonitorState initial_monitor(const CorridorModel& model, double x0);

/// Advances the monitor to t. On a jump every active entry becomes (x, t);
/// otherwise only boundaries entering (x, start) or leaving the stack change.
/// UsageError when t precedes the previous update.
MonitorState update_monitor(MonitorState ms, const CorridorModel& model, double t, double x,
                            bool jumped);

/// Corridor id selected by the monitor: the highest active entry below the
/// top whose recorded X is at or above the boundary at its clock.
/// StateError when a recorded X lies outside the master boundaries.
std::size_t monitored_corridor(const MonitorState& ms, const CorridorModel& model);

/// beta(Psi) at the monitor's time.
double corridor_target(const MonitorState& ms, const CorridorModel& model);

struct CorridorReport {
  std::optional<std::string> config_error;
  ConditionCheck ordering{"ordering", true, {}};
  ConditionCheck drift{"boundary_drift", true, {}};
  std::size_t grid_points = 0;

  bool ok() const noexcept { return !config_error && ordering.passed && drift.passed; }
};

/// Checks, on the grid: segment ends on grid times, boundary functions
/// defined on [0, T], strict ordering of the boundaries in the stack (master
/// left limits included), and the drift condition at every boundary for each
/// side the monitor can select: kappa (beta - g) >= g' for the corridor above
/// g and <= g' for the corridor below.
CorridorReport validate_corridor_model(const CorridorModel& model, const TimeGrid& grid);

struct CorridorPath {
  PathSample path;
  std::vector<std::size_t> corridor;   // tracked corridor id per record
  std::vector<MonitorState> history;   // initial monitor, then one per change
};

/// Euler path with clamping. Jump steps clamp onto the master boundaries;
/// other steps clamp onto the current corridor (the largest double below an
/// internal upper boundary keeps the half-open convention). Throws
/// ValidationError when validate_corridor_model fails, UsageError when x0 is
/// outside [g0(0), gm(0)), and NumericalError on NaN.
CorridorPath simulate_corridor_path(const CorridorModel& model, const SimConfig& cfg,
                                    const RandomSource& src, int coordinate = 1,
                                    double rho = 0.0);

struct CorridorOccupancy {
  std::vector<double> time_fraction;                  // per corridor id
  std::vector<std::vector<std::size_t>> transitions;  // [from][to] at jump records
  std::size_t changes = 0;                            // transitions with from != to
  std::size_t skips = 0;        // passed over at least one corridor
  std::size_t off_jump_changes = 0;  // corridor changed without a jump flag
};

/// Occupancy of recorded paths. Paths without a tracked corridor column are
/// classified by position.
CorridorOccupancy corridor_occupancy(std::span<const CorridorPath> paths,
                                     const CorridorModel& model);

struct CorridorEnsemble {
  std::size_t n_paths = 0;
  std::vector<std::size_t> record_index;
  std::vector<double> record_time;
  TimeStats stats;
  std::vector<double> final_values;
  std::size_t clamp_count = 0;
  std::size_t internal_clamps = 0;  // positive overshoots onto an internal boundary
  std::vector<double> overshoots;   // positive pre-clamp overshoots
  double max_overshoot = 0.0;
  std::size_t captivity_violations = 0;  // outside the masters after clamping
  std::size_t jumps = 0;
  std::size_t jumps_displaced = 0;
  std::size_t jumps_dropped = 0;
  CorridorOccupancy occupancy;  // at full grid resolution
  std::vector<CorridorPath> paths;
};

/// Conditioning steps: path is in corridor `from` with x_k in [bin_lo, bin_hi)
/// before the step. Counts those steps, the jumps among them and the jumps
/// that end the step in corridor `to`.
struct ProbeSpec {
  std::size_t from = 0;
  std::size_t to = 0;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
};

struct TransitionCounts {
  std::uint64_t paths = 0;
  std::uint64_t steps = 0;
  std::uint64_t jumps = 0;
  std::uint64_t landed = 0;
};

/// Runs paths [first_path, first_path + n_paths) of cfg.seed (cfg.n_paths is
/// ignored) and returns the probe counts.
TransitionCounts probe_transitions(const CorridorModel& model, const SimConfig& cfg,
                                   const ProbeSpec& probe, std::uint64_t first_path,
                                   std::size_t n_paths, std::size_t threads = 0);

CorridorEnsemble run_corridor_ensemble(const CorridorModel& model, const SimConfig& cfg,
                                       const EnsembleOptions& opts = {});

}  // namespace captive
