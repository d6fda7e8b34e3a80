#include "captive/bounded_map.hpp"

#include <cmath>
#include <numbers>

#include "captive/error.hpp"

namespace captive {

std::vector<std::string> BoundedMap::violations() const {
  std::vector<std::string> out;
  if (!f || !f_inv || !f1 || !f2) {
    out.emplace_back("map is missing f, f_inv, f1 or f2");
    return out;
  }
  if (!(a < b)) out.emplace_back("range must satisfy a < b");
  const double ya = f_inv(a);
  const double yb = f_inv(b);
  if (!std::isfinite(ya)) out.emplace_back("f_inv(a) is not finite: f never attains a");
  if (!std::isfinite(yb)) out.emplace_back("f_inv(b) is not finite: f never attains b");
  if (!out.empty()) return out;
  if (std::abs(f(ya) - a) > 1e-10) out.emplace_back("f(f_inv(a)) != a");
  if (std::abs(f(yb) - b) > 1e-10) out.emplace_back("f(f_inv(b)) != b");
  if (std::abs(f1(ya)) > 1e-10) out.emplace_back("f1(f_inv(a)) != 0");
  if (std::abs(f1(yb)) > 1e-10) out.emplace_back("f1(f_inv(b)) != 0");
  if (f2(ya) < -1e-10) out.emplace_back("f2(f_inv(a)) < 0");
  if (f2(yb) > 1e-10) out.emplace_back("f2(f_inv(b)) > 0");
  // f1 and f2 bounded on a sampled stretch of the domain between the preimages.
  const double lo = std::min(ya, yb);
  const double hi = std::max(ya, yb);
  for (int i = 0; i <= 1000; ++i) {
    const double y = lo + (hi - lo) * i / 1000.0;
    if (!std::isfinite(f1(y)) || !std::isfinite(f2(y))) {
      out.emplace_back("f1 or f2 not finite on the sampled domain");
      break;
    }
  }
  return out;
}

BoundedMap builtin_bounded_map(const std::string& name) {
  using std::numbers::pi;
  if (name == "sin") {
    return {"sin",
            [](double y) { return std::sin(y); },
            [](double x) { return std::asin(x); },
            [](double x) { return pi - std::asin(x); },
            [](double y) { return std::cos(y); },
            [](double y) { return -std::sin(y); },
            -1.0,
            1.0,
            [](double x) { return std::sqrt((1.0 - x) * (1.0 + x)); },
            [](double x) { return -x; }};
  }
  if (name == "cos") {
    return {"cos",
            [](double y) { return std::cos(y); },
            [](double x) { return std::acos(x); },
            [](double x) { return -std::acos(x); },
            [](double y) { return -std::sin(y); },
            [](double y) { return -std::cos(y); },
            -1.0,
            1.0,
            [](double x) { return -std::sqrt((1.0 - x) * (1.0 + x)); },
            [](double x) { return -x; }};
  }
  if (name == "tanh") {
    return {"tanh",
            [](double y) { return std::tanh(y); },
            [](double x) { return std::atanh(x); },
            [](double x) { return std::atanh(x); },
            [](double y) {
              const double c = std::cosh(y);
              return 1.0 / (c * c);
            },
            [](double y) {
              const double c = std::cosh(y);
              return -2.0 * std::tanh(y) / (c * c);
            },
            -1.0,
            1.0,
            [](double x) { return (1.0 - x) * (1.0 + x); },
            [](double x) { return -2.0 * x * (1.0 - x) * (1.0 + x); }};
  }
  throw ConfigError("unknown bounded map '" + name + "' (expected sin, cos or tanh)");
}

}  // namespace captive
