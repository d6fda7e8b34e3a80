#pragma once

#include <functional>
#include <string>
#include <vector>

namespace captive {

/// A bounded map f: R -> [a, b] with its inverse and first two derivatives.
/// `f_inv` is the principal inverse; `f_inv_alt` returns the preimage on the
/// neighbouring branch, where f1 has the opposite sign.
struct BoundedMap {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> f_inv;
  std::function<double(double)> f_inv_alt;
  std::function<double(double)> f1;
  std::function<double(double)> f2;
  double a = 0.0;
  double b = 0.0;
  /// Optional closed forms of f1(f_inv(x)) and f2(f_inv(x)) in terms of x.
  /// They keep the coefficients exact at a and b, where f1 o f_inv would
  /// leave rounding residue (cos(asin(1)) != 0).
  std::function<double(double)> f1_of_x;
  std::function<double(double)> f2_of_x;

  /// Names of violated conditions; empty when the map is admissible.
  std::vector<std::string> violations() const;
};

/// Builtins: "sin", "cos" and "tanh" (the last fails verification).
BoundedMap builtin_bounded_map(const std::string& name);

}  // namespace captive
