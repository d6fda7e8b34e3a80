// Compiled with -mavx2 (no FMA). Only reached after a runtime CPU check.

#include <immintrin.h>

#include <limits>

#include "captive/kernels.hpp"
#include "lane_math.hpp"

namespace captive::kernels {
namespace {

struct Avx2Ops {
  using D = __m256d;
  using U = __m256i;
  using M = __m256d;
  static constexpr std::size_t width = 4;
  static D load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, D v) { _mm256_storeu_pd(p, v); }
  static U loadu(const std::uint64_t* p) {
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
  }
  static D set1(double v) { return _mm256_set1_pd(v); }
  static U set1u(std::uint64_t v) { return _mm256_set1_epi64x(static_cast<long long>(v)); }
  static D add(D a, D b) { return _mm256_add_pd(a, b); }
  static D sub(D a, D b) { return _mm256_sub_pd(a, b); }
  static D mul(D a, D b) { return _mm256_mul_pd(a, b); }
  static D div(D a, D b) { return _mm256_div_pd(a, b); }
  static D sqrt(D a) { return _mm256_sqrt_pd(a); }
  static D min(D a, D b) { return _mm256_min_pd(a, b); }
  static D max(D a, D b) { return _mm256_max_pd(a, b); }
  static D floor(D a) { return _mm256_floor_pd(a); }
  static M gt(D a, D b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
  static M eq(D a, D b) { return _mm256_cmp_pd(a, b, _CMP_EQ_OQ); }
  static D select(M m, D a, D b) { return _mm256_blendv_pd(b, a, m); }
  static U asbits(D a) { return _mm256_castpd_si256(a); }
  static D asdouble(U a) { return _mm256_castsi256_pd(a); }
  static U srl(U a, int n) { return _mm256_srli_epi64(a, n); }
  static U and_(U a, U b) { return _mm256_and_si256(a, b); }
  static U or_(U a, U b) { return _mm256_or_si256(a, b); }
};

void captive_step_avx2(const CaptiveStep& p, double* x, const double* dw, const double* jump,
                       double* overshoot, std::size_t n) {
  std::size_t i = captive_loop<Avx2Ops>(p, x, dw, jump, overshoot, 0, n);
  captive_loop<ScalarOps>(p, x, dw, jump, overshoot, i, n);
}

void corridor_step_avx2(const CorridorStep& p, double* x, const double* beta, const double* dw,
                        const double* jump, const double* lo, const double* hi,
                        double* overshoot, std::size_t n) {
  std::size_t i = corridor_loop<Avx2Ops>(p, x, beta, dw, jump, lo, hi, overshoot, 0, n);
  corridor_loop<ScalarOps>(p, x, beta, dw, jump, lo, hi, overshoot, i, n);
}

void box_muller_avx2(const std::uint64_t* b1, const std::uint64_t* b2, double* z0, double* z1,
                     std::size_t n) {
  std::size_t i = box_muller_loop<Avx2Ops>(b1, b2, z0, z1, 0, n);
  box_muller_loop<ScalarOps>(b1, b2, z0, z1, i, n);
}

Moments moments_avx2(const double* x, std::size_t n) {
  using O = ScalarOps;
  Moments out;
  out.min = std::numeric_limits<double>::infinity();
  out.max = -std::numeric_limits<double>::infinity();
  if (n == 0) return out;

  __m256d s = _mm256_setzero_pd();
  __m256d lo = _mm256_set1_pd(out.min);
  __m256d hi = _mm256_set1_pd(out.max);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    s = _mm256_add_pd(s, v);
    lo = _mm256_min_pd(lo, v);
    hi = _mm256_max_pd(hi, v);
  }
  alignas(32) double sv[4], lv[4], hv[4];
  _mm256_store_pd(sv, s);
  _mm256_store_pd(lv, lo);
  _mm256_store_pd(hv, hi);
  double sum = (sv[0] + sv[1]) + (sv[2] + sv[3]);
  double mn = O::min(O::min(lv[0], lv[1]), O::min(lv[2], lv[3]));
  double mx = O::max(O::max(hv[0], hv[1]), O::max(hv[2], hv[3]));
  for (; i < n; ++i) {
    sum = sum + x[i];
    mn = O::min(mn, x[i]);
    mx = O::max(mx, x[i]);
  }
  const double mean = sum / static_cast<double>(n);

  const __m256d vm = _mm256_set1_pd(mean);
  __m256d q = _mm256_setzero_pd();
  i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vm);
    q = _mm256_add_pd(q, _mm256_mul_pd(d, d));
  }
  alignas(32) double qv[4];
  _mm256_store_pd(qv, q);
  double m2 = (qv[0] + qv[1]) + (qv[2] + qv[3]);
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

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{Isa::avx2, captive_step_avx2, corridor_step_avx2, box_muller_avx2,
                             moments_avx2};

}  // namespace captive::kernels
