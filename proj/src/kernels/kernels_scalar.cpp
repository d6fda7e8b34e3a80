#include "captive/kernels.hpp"

#include <limits>

#include "lane_math.hpp"

namespace captive::kernels {
namespace {

void captive_step_scalar(const CaptiveStep& p, double* x, const double* dw, const double* jump,
                         double* overshoot, std::size_t n) {
  captive_loop<ScalarOps>(p, x, dw, jump, overshoot, 0, n);
}

void corridor_step_scalar(const CorridorStep& p, double* x, const double* beta, const double* dw,
                          const double* jump, const double* lo, const double* hi,
                          double* overshoot, std::size_t n) {
  corridor_loop<ScalarOps>(p, x, beta, dw, jump, lo, hi, overshoot, 0, n);
}

void box_muller_scalar(const std::uint64_t* b1, const std::uint64_t* b2, double* z0, double* z1,
                       std::size_t n) {
  box_muller_loop<ScalarOps>(b1, b2, z0, z1, 0, n);
}

// Four interleaved accumulators, combined pairwise, then the tail in order.
// The AVX2 variant holds the same four accumulators in one register.
Moments moments_scalar(const double* x, std::size_t n) {
  using O = ScalarOps;
  Moments out;
  out.min = std::numeric_limits<double>::infinity();
  out.max = -std::numeric_limits<double>::infinity();
  if (n == 0) return out;

  double s[4] = {0.0, 0.0, 0.0, 0.0};
  double lo[4] = {out.min, out.min, out.min, out.min};
  double hi[4] = {out.max, out.max, out.max, out.max};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) {
      s[j] = s[j] + x[i + j];
      lo[j] = O::min(lo[j], x[i + j]);
      hi[j] = O::max(hi[j], x[i + j]);
    }
  }
  double sum = (s[0] + s[1]) + (s[2] + s[3]);
  double mn = O::min(O::min(lo[0], lo[1]), O::min(lo[2], lo[3]));
  double mx = O::max(O::max(hi[0], hi[1]), O::max(hi[2], hi[3]));
  for (; i < n; ++i) {
    sum = sum + x[i];
    mn = O::min(mn, x[i]);
    mx = O::max(mx, x[i]);
  }
  const double mean = sum / static_cast<double>(n);

  double q[4] = {0.0, 0.0, 0.0, 0.0};
  i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int j = 0; j < 4; ++j) {
      const double d = x[i + j] - mean;
      q[j] = q[j] + d * d;
    }
  }
  double m2 = (q[0] + q[1]) + (q[2] + q[3]);
  for (; i < n; ++i) {
    const double d = x[i] - mean;
    m2 = m2 + d * d;
  }
  out.sum = sum;
  out.m2 = m2;
  out.min = mn;
  out.max = mx;
  return out;
}

constexpr KernelTable kScalar{Isa::scalar, captive_step_scalar, corridor_step_scalar,
                              box_muller_scalar, moments_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

double log_ref(double x) noexcept { return log_lane<ScalarOps>(x); }

void sincos_2pi_ref(double u, double* s, double* c) noexcept {
  sincos_2pi_lane<ScalarOps>(u, *s, *c);
}

}  // namespace captive::kernels
