#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "captive/boundary.hpp"
#include "captive/bounded_map.hpp"
#include "captive/coefficients.hpp"
#include "captive/simulator.hpp"

namespace captive {

/// Coefficients of X = f(W) for an admissible bounded map: drift f2(f_inv(x))/2,
/// volatility f1(f_inv(x)), no jumps, captive in [a, b]. Throws ConfigError
/// naming the first violated map condition.
CoefficientSet captive_from_bounded(std::shared_ptr<const BoundedMap> map);

/// The same coefficients on constant boundaries a, b over [0, horizon].
CaptiveModel bounded_model(std::shared_ptr<const BoundedMap> map, double horizon);

enum class Direction { increasing, decreasing };

const char* to_string(Direction d) noexcept;

/// A C2 map applied to captive paths; strictly monotone where it is used.
/// [domain_lo, domain_hi] is where f is defined at all.
struct MonotoneMap {
  std::string name;
  Direction direction = Direction::increasing;
  std::function<double(double)> f;
  std::function<double(double)> f1;
  std::function<double(double)> f2;
  double domain_lo = -std::numeric_limits<double>::infinity();
  double domain_hi = std::numeric_limits<double>::infinity();
};

/// "exp", "reciprocal" (x > 0), "identity", and "sin-construct" (sin on the
/// principal branch [-pi/2, pi/2]). ConfigError for other names.
MonotoneMap builtin_monotone_map(const std::string& name);

struct MonotoneCheck {
  bool ok = true;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t samples = 0;
  double lipschitz = 0.0;  // max |f1| over the samples
  std::optional<double> first_bad;  // sample where f1 has the wrong sign
  std::string detail;
};

inline constexpr std::size_t kMonotoneSamples = 1000;

/// Samples f1 at `samples` evenly spaced points of [lo, hi] (both ends
/// included); f1 must be strictly positive (increasing) or negative.
MonotoneCheck check_monotone(const MonotoneMap& map, double lo, double hi,
                             std::size_t samples = kMonotoneSamples);

struct MappedPath {
  PathSample path;
  BoundaryFn lower;
  BoundaryFn upper;
  MonotoneCheck check;

  /// Captivity tolerance of the mapped path for a source clamp tolerance.
  double tolerance(double clamp_tolerance) const noexcept {
    return check.lipschitz * clamp_tolerance;
  }
};

/// Y = f(X) pointwise with the mapped boundary pair, [f(L), f(U)] for
/// increasing f and [f(U), f(L)] for decreasing f. Mapped boundaries are
/// piecewise linear through the grid (or, for hand-built samples, the record
/// times) plus the mapped jumps. Jump flags are kept. Throws ConfigError
/// when f is not monotone on the boundary envelope.
MappedPath map_path(const PathSample& p, const MonotoneMap& map, const BoundaryFn& lower,
                    const BoundaryFn& upper);

}  // namespace captive
