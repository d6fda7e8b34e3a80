#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "captive/boundary.hpp"
#include "captive/bounded_map.hpp"
#include "captive/random.hpp"
#include "captive/time_grid.hpp"

namespace captive {

/// Distribution of the jump fraction theta. Draws are indexed by the jump's
/// ordinal along the path, so a path's theta sequence does not depend on dt.
struct ThetaSpec {
  enum class Kind { none, constant, uniform };
  Kind kind = Kind::none;
  double value = 0.0;  // constant
  double lo = -1.0;    // uniform support
  double hi = 1.0;

  static ThetaSpec none() { return {}; }
  static ThetaSpec constant(double v) { return {Kind::constant, v, v, v}; }
  static ThetaSpec uniform(double lo = -1.0, double hi = 1.0) {
    return {Kind::uniform, 0.0, lo, hi};
  }

  /// Throws ConfigError unless the support lies in [-1, 1] and, for a
  /// constant, theta != 0.
  void validate() const;
  bool active() const noexcept { return kind != Kind::none; }
  /// Support extremes used by the admissibility check.
  double support_lo() const noexcept { return kind == Kind::uniform ? lo : value; }
  double support_hi() const noexcept { return kind == Kind::uniform ? hi : value; }

  /// Theta of jump `ordinal`; exact zeros are redrawn.
  double sample(const RandomSource& src, Stream stream, std::uint64_t ordinal) const;
};

enum class Family { mean_reverting, bounded_map, pure_jump, zero, custom, composed };

const char* to_string(Family f) noexcept;

class CoefficientSet;

namespace family {

/// mu = kappa (beta - x), sigma = alpha (x - gl)(gu - x),
/// gamma = theta min(x - gl, gu - x). kappa, beta, alpha are deterministic
/// functions of time.
struct MeanReverting {
  BoundaryFn kappa;
  BoundaryFn beta;
  BoundaryFn alpha;
  ThetaSpec theta;
};

/// mu = f2(f_inv(x)) / 2, sigma = f1(f_inv(x)) with the branch taken from a
/// latent driver phase; no jumps.
struct Bounded {
  std::shared_ptr<const BoundedMap> map;
};

struct PureJump {
  ThetaSpec theta;
};

struct Zero {};

/// User coefficients. Jump coefficient defaults to theta min(x - gl, gu - x)
/// when `jump` is empty and theta is active.
struct Custom {
  std::function<double(double t, double x, double gl, double gu)> drift;
  std::function<double(double t, double x, double gl, double gu)> vol;
  std::function<double(double t, double x, double gl, double gu, double theta)> jump;
  ThetaSpec theta;
  std::string description;
};

/// Continuous part plus jump part, both evaluated against the outer pair.
struct Composed {
  std::shared_ptr<const CoefficientSet> continuous;
  std::shared_ptr<const CoefficientSet> jump;
};

}  // namespace family

/// Coefficient triple (mu, sigma, gamma). Immutable; evaluation throws
/// StateError when x lies outside [gl, gu] by more than state_tolerance().
class CoefficientSet {
 public:
  using Variant = std::variant<family::MeanReverting, family::Bounded, family::PureJump,
                               family::Zero, family::Custom, family::Composed>;

  static CoefficientSet mean_reverting(double kappa, double beta, double alpha, ThetaSpec theta);
  static CoefficientSet mean_reverting(BoundaryFn kappa, BoundaryFn beta, BoundaryFn alpha,
                                       ThetaSpec theta);
  /// sin(W) (variant "sin") or cos(W) ("cos") captive in [-1, 1].
  static CoefficientSet trigonometric(const std::string& variant = "sin");
  static CoefficientSet bounded(std::shared_ptr<const BoundedMap> map);
  static CoefficientSet pure_jump(ThetaSpec theta);
  static CoefficientSet zero();
  static CoefficientSet custom(family::Custom c);

  Family family() const noexcept;
  const Variant& params() const noexcept { return v_; }
  std::string name() const;

  double drift(double t, double x, double gl, double gu) const;
  /// Principal-branch volatility.
  double vol(double t, double x, double gl, double gu) const;
  /// Volatility with the sign of the branch holding the latent `phase`;
  /// equals vol() for families without a phase.
  double vol_branch(double t, double x, double gl, double gu, double phase) const;
  double jump_coeff(double t_minus, double x_minus, double gl_minus, double gu_minus,
                    double theta) const;

  /// Theta distribution of the jump part (Kind::none when gamma == 0).
  const ThetaSpec& theta() const noexcept;

  bool drift_is_zero() const noexcept;
  bool vol_is_zero() const noexcept;
  bool jump_is_zero() const noexcept;
  /// mu == gamma == 0 (continuous martingale).
  bool is_continuous_martingale() const noexcept { return drift_is_zero() && jump_is_zero(); }
  /// mu == sigma == 0.
  bool is_pure_jump() const noexcept { return drift_is_zero() && vol_is_zero(); }

  /// Families whose volatility sign follows a latent phase.
  bool has_phase() const noexcept { return bounded_map() != nullptr; }
  double phase_init(double x0) const;
  /// Latent phase consistent with post-jump value x on the branch of `phase`.
  double phase_reset(double x, double phase) const;

  double state_tolerance() const noexcept { return state_tol_; }
  CoefficientSet with_state_tolerance(double tol) const;

  /// Mean-reverting parameters, if this is (or wraps nothing but) that family.
  const family::MeanReverting* mean_reverting_params() const noexcept;

 private:
  explicit CoefficientSet(Variant v) : v_(std::move(v)) {}
  friend CoefficientSet compose(const CoefficientSet&, const CoefficientSet&, const BoundaryFn&,
                                const BoundaryFn&, const BoundaryFn&, const BoundaryFn&,
                                const TimeGrid&);
  const BoundedMap* bounded_map() const noexcept;
  void check_state(double x, double gl, double gu) const;

  Variant v_;
  double state_tol_ = 1e-9;
};

/// Superposition of a continuous captive part (gamma == 0) and a pure-jump
/// part. The result is captive in the outer pair; inner boundaries must nest
/// inside it on the grid. Throws ConfigError on any violated precondition.
CoefficientSet compose(const CoefficientSet& continuous_part, const CoefficientSet& jump_part,
                       const BoundaryFn& outer_lower, const BoundaryFn& outer_upper,
                       const BoundaryFn& inner_lower, const BoundaryFn& inner_upper,
                       const TimeGrid& grid);

struct Counterexample {
  std::size_t index = 0;
  double time = 0.0;
  double x = 0.0;
  double value = 0.0;  // evaluated coefficient (or parameter)
  double bound = 0.0;  // the bound it violated
  std::string detail;
};

struct ConditionCheck {
  std::string name;
  bool passed = true;
  std::optional<Counterexample> first;
};

struct AdmissibilityReport {
  std::string family;
  ConditionCheck parameters{"parameters", true, {}};
  ConditionCheck drift{"drift", true, {}};
  ConditionCheck vol{"vol", true, {}};
  ConditionCheck jump{"jump", true, {}};
  std::size_t grid_points = 0;
  std::size_t x_samples = 0;
  double vol_tolerance = 0.0;
  double drift_slack = 0.0;

  bool ok() const noexcept {
    return parameters.passed && drift.passed && vol.passed && jump.passed;
  }
};

/// Grid check of the inward-drift, vanishing-volatility and jump-room
/// conditions, plus family parameter invariants.
AdmissibilityReport check_admissibility(const CoefficientSet& cs, const BoundaryFn& lower,
                                        const BoundaryFn& upper, const TimeGrid& grid);

inline constexpr double kVolTolerance = 1e-12;
inline constexpr double kDriftSlack = 1e-12;
inline constexpr std::size_t kJumpSamples = 50;

}  // namespace captive
