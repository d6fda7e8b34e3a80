#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "captive/coefficients.hpp"
#include "captive/corridors.hpp"
#include "captive/simulator.hpp"

namespace captive {

/// Law of the jump fraction theta, supported in [-1, 1].
class ThetaDistribution {
 public:
  virtual ~ThetaDistribution() = default;
  virtual std::string name() const = 0;
  virtual double support_lo() const = 0;
  virtual double support_hi() const = 0;
  /// Density on the support (0 for point masses).
  virtual double density(double theta) const = 0;
  /// P(theta in [lo, hi)), or [lo, hi] when `closed`.
  virtual double mass(double lo, double hi, bool closed) const = 0;
};

class UniformTheta final : public ThetaDistribution {
 public:
  /// ConfigError unless -1 <= lo < hi <= 1.
  explicit UniformTheta(double lo = -1.0, double hi = 1.0);
  std::string name() const override { return "uniform"; }
  double support_lo() const override { return lo_; }
  double support_hi() const override { return hi_; }
  double density(double theta) const override;
  double mass(double lo, double hi, bool closed) const override;

 private:
  double lo_, hi_;
};

class ConstantTheta final : public ThetaDistribution {
 public:
  explicit ConstantTheta(double value);
  std::string name() const override { return "constant"; }
  double support_lo() const override { return v_; }
  double support_hi() const override { return v_; }
  double density(double) const override { return 0.0; }
  double mass(double lo, double hi, bool closed) const override;

 private:
  double v_;
};

/// The distribution a ThetaSpec samples from; ConfigError for Kind::none.
std::shared_ptr<const ThetaDistribution> theta_distribution(const ThetaSpec& spec);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed = false;  // includes hi (the topmost corridor)

  bool contains(double x) const noexcept { return x >= lo && (closed ? x <= hi : x < hi); }
};

struct TransitionQuery {
  double x_minus = 0.0;
  Interval from;
  Interval to;
  double a = 0.0;  // master boundaries
  double d = 0.0;
  std::shared_ptr<const ThetaDistribution> theta;
  double jump_prob = 1.0;  // P(jump) per evaluation unit

  /// ConfigError on a broken query (x_minus outside `from`, jump_prob outside
  /// [0, 1], corridors outside [a, d], missing theta).
  void validate() const;
};

/// Query at time t for the corridors of a model (ids as in CorridorModel).
TransitionQuery corridor_query(const CorridorModel& model, double t, double x_minus,
                               std::size_t from, std::size_t to, double jump_prob);

/// S = [(k - x)/m, (l - x)/m) with m = min(x - a, d - x), the theta values
/// that carry x into [k, l). StateError when m = 0.
Interval s_set(const TransitionQuery& q);

/// P(theta in S) * jump_prob, with the literal 0 when the target is out of
/// reach (k - x > m upward, l - x < -m downward).
double transition_probability(const TransitionQuery& q);

struct Conditioning {
  std::size_t from = 0;
  std::size_t to = 0;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  std::uint64_t min_steps = 100000;  // conditioning steps to accumulate
  std::size_t chunk_paths = 2048;    // paths added per round
  std::size_t threads = 0;
};

inline constexpr std::uint64_t kMinConditioningSamples = 100;

struct TransitionEstimate {
  std::uint64_t paths = 0;
  std::uint64_t steps = 0;   // conditioning steps
  std::uint64_t jumps = 0;   // jumps among them
  std::uint64_t landed = 0;  // jumps ending in the target corridor
  double step_jump_prob = 0.0;  // 1 - exp(-lambda dt)
  double fraction = 0.0;        // landed / jumps
  double estimate = 0.0;        // fraction * step_jump_prob
  double ci_lo = 0.0;           // Wilson 95%, scaled by step_jump_prob
  double ci_hi = 0.0;
  double analytic_center = 0.0;   // at the bin centre
  double analytic_average = 0.0;  // averaged over the bin
  bool reached_min_steps = false;
};

/// Wilson score interval for k successes in n trials (z = 1.96); [0, 1] for
/// n = 0.
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

/// Adds chunks of paths (from path index 0 of cfg.seed, at most cfg.n_paths)
/// until min_steps conditioning steps are seen. StatisticalError below
/// kMinConditioningSamples steps.
TransitionEstimate estimate_transition_mc(const CorridorModel& model, const SimConfig& cfg,
                                          const Conditioning& cond);

}  // namespace captive
