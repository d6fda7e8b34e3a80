#pragma once

// Kernel bodies written once against a small lane-ops interface. The scalar
// and AVX2 translation units instantiate them with their own ops type, so the
// sequence of IEEE operations per lane is identical by construction.
//
// Ops must provide: D, U (64-bit integer lanes), M (mask), load/store,
// set1/set1u, add/sub/mul/div/sqrt, min/max with x86 operand semantics,
// floor, gt/eq, select(m, a, b) (a where m), asbits/asdouble, srl/and/or.
//
// Everything here has internal linkage: each translation unit is compiled
// with different target flags and must not share instantiations.

#include <cstddef>
#include <cstdint>

#include "captive/kernels.hpp"

namespace captive::kernels {
namespace {

constexpr std::uint64_t kOneBits = 0x3FF0000000000000ull;
constexpr std::uint64_t kMantissaMask = 0x000FFFFFFFFFFFFFull;
constexpr std::uint64_t kExpShiftBits = 0x4330000000000000ull;  // 2^52
constexpr double kTwo52 = 4503599627370496.0;
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kHalfPi = 1.5707963267948966;

// 2 s / (2k + 1) series coefficients of log((1 + s) / (1 - s)).
constexpr double kLogC[] = {
    2.0,           2.0 / 3.0,  2.0 / 5.0,  2.0 / 7.0,  2.0 / 9.0,  2.0 / 11.0,
    2.0 / 13.0,    2.0 / 15.0, 2.0 / 17.0, 2.0 / 19.0, 2.0 / 21.0, 2.0 / 23.0,
};

// Taylor coefficients of sin and cos on [-pi/4, pi/4].
constexpr double kSinC[] = {
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
};
constexpr double kCosC[] = {
    1.0,
    -1.0 / 2.0,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40320.0,
    -1.0 / 3628800.0,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
    1.0 / 20922789888000.0,
    -1.0 / 6402373705728000.0,
};

template <class O>
typename O::D horner(typename O::D z, const double* c, int n) {
  typename O::D p = O::set1(c[n - 1]);
  for (int i = n - 2; i >= 0; --i) p = O::add(O::mul(p, z), O::set1(c[i]));
  return p;
}

/// U[0,1) from the top 52 bits of a 64-bit word.
template <class O>
typename O::D uniform52(typename O::U bits) {
  const auto m = O::or_(O::srl(bits, 12), O::set1u(kOneBits));
  return O::sub(O::asdouble(m), O::set1(1.0));
}

/// Natural log for positive normal inputs.
template <class O>
typename O::D log_lane(typename O::D x) {
  using D = typename O::D;
  const auto b = O::asbits(x);
  // Biased exponent as a double via the 2^52 trick (exact for 11-bit values).
  const D eb = O::sub(O::asdouble(O::or_(O::srl(b, 52), O::set1u(kExpShiftBits))),
                      O::set1(kTwo52));
  D e = O::sub(eb, O::set1(1023.0));
  D m = O::asdouble(O::or_(O::and_(b, O::set1u(kMantissaMask)), O::set1u(kOneBits)));
  const auto big = O::gt(m, O::set1(kSqrt2));
  m = O::select(big, O::mul(m, O::set1(0.5)), m);
  e = O::select(big, O::add(e, O::set1(1.0)), e);
  const D s = O::div(O::sub(m, O::set1(1.0)), O::add(m, O::set1(1.0)));
  const D s2 = O::mul(s, s);
  const D lm = O::mul(s, horner<O>(s2, kLogC, 12));
  return O::add(O::mul(e, O::set1(kLn2Hi)), O::add(O::mul(e, O::set1(kLn2Lo)), lm));
}

/// sin and cos of 2 pi u, u in [0, 1).
template <class O>
void sincos_2pi_lane(typename O::D u, typename O::D& s, typename O::D& c) {
  using D = typename O::D;
  const D t = O::mul(u, O::set1(4.0));
  const D k = O::floor(O::add(t, O::set1(0.5)));
  const D y = O::mul(O::sub(t, k), O::set1(kHalfPi));
  const D y2 = O::mul(y, y);
  const D sy = O::mul(y, horner<O>(y2, kSinC, 9));
  const D cy = horner<O>(y2, kCosC, 10);
  const D nsy = O::sub(O::set1(0.0), sy);
  const D ncy = O::sub(O::set1(0.0), cy);
  // Quadrant k in {0, 1, 2, 3, 4}; 4 wraps to 0.
  const auto q1 = O::eq(k, O::set1(1.0));
  const auto q2 = O::eq(k, O::set1(2.0));
  const auto q3 = O::eq(k, O::set1(3.0));
  c = O::select(q1, nsy, O::select(q2, ncy, O::select(q3, sy, cy)));
  s = O::select(q1, cy, O::select(q2, nsy, O::select(q3, ncy, sy)));
}

template <class O>
void box_muller_lane(typename O::U b1, typename O::U b2, typename O::D& z0,
                     typename O::D& z1) {
  using D = typename O::D;
  const D u1 = O::sub(O::set1(1.0), uniform52<O>(b1));  // (0, 1]
  const D u2 = uniform52<O>(b2);
  const D r = O::sqrt(O::mul(O::set1(-2.0), log_lane<O>(u1)));
  D s, c;
  sincos_2pi_lane<O>(u2, s, c);
  z0 = O::mul(r, c);
  z1 = O::mul(r, s);
}

/// Euler step plus clamp; returns the clamped value and writes the overshoot.
template <class O>
typename O::D finish_step(typename O::D pre, typename O::D lo, typename O::D hi,
                          typename O::D& over) {
  over = O::max(O::set1(0.0), O::max(O::sub(lo, pre), O::sub(pre, hi)));
  return O::min(O::max(pre, lo), hi);
}

template <class O>
typename O::D captive_lane(const CaptiveStep& p, typename O::D x, typename O::D dw,
                           typename O::D jump, typename O::D& over) {
  using D = typename O::D;
  const D drift = O::mul(O::mul(O::set1(p.kappa), O::sub(O::set1(p.beta), x)), O::set1(p.dt));
  const D vol = O::mul(O::mul(O::set1(p.alpha), O::sub(x, O::set1(p.lower))),
                       O::sub(O::set1(p.upper), x));
  // Room is taken at x projected onto the left-limit interval, hence >= 0.
  const D room = O::max(O::set1(0.0), O::min(O::sub(x, O::set1(p.lower_left)),
                                             O::sub(O::set1(p.upper_left), x)));
  const D pre = O::add(O::add(O::add(x, drift), O::mul(vol, dw)), O::mul(jump, room));
  return finish_step<O>(pre, O::set1(p.lower_next), O::set1(p.upper_next), over);
}

template <class O>
typename O::D corridor_lane(const CorridorStep& p, typename O::D x, typename O::D beta,
                            typename O::D dw, typename O::D jump, typename O::D lo,
                            typename O::D hi, typename O::D& over) {
  using D = typename O::D;
  const D drift = O::mul(O::mul(O::set1(p.kappa), O::sub(beta, x)), O::set1(p.dt));
  D vol = O::set1(p.alpha);
  for (double g : p.active) vol = O::mul(vol, O::sub(x, O::set1(g)));
  const D room = O::max(O::set1(0.0), O::min(O::sub(x, O::set1(p.master_lower_left)),
                                             O::sub(O::set1(p.master_upper_left), x)));
  const D pre = O::add(O::add(O::add(x, drift), O::mul(vol, dw)), O::mul(jump, room));
  return finish_step<O>(pre, lo, hi, over);
}

/// Scalar lane ops; also used for the tails of vector loops.
struct ScalarOps {
  using D = double;
  using U = std::uint64_t;
  using M = bool;
  static constexpr std::size_t width = 1;
  static D load(const double* p) { return *p; }
  static void store(double* p, D v) { *p = v; }
  static U loadu(const std::uint64_t* p) { return *p; }
  static D set1(double v) { return v; }
  static U set1u(std::uint64_t v) { return v; }
  static D add(D a, D b) { return a + b; }
  static D sub(D a, D b) { return a - b; }
  static D mul(D a, D b) { return a * b; }
  static D div(D a, D b) { return a / b; }
  static D sqrt(D a) { return __builtin_sqrt(a); }
  // Operand semantics of minpd/maxpd: the second operand wins on NaN and on
  // equal values (including signed zeros).
  static D min(D a, D b) { return a < b ? a : b; }
  static D max(D a, D b) { return a > b ? a : b; }
  static D floor(D a) { return __builtin_floor(a); }
  static M gt(D a, D b) { return a > b; }
  static M eq(D a, D b) { return a == b; }
  static D select(M m, D a, D b) { return m ? a : b; }
  static U asbits(D a) { return __builtin_bit_cast(U, a); }
  static D asdouble(U a) { return __builtin_bit_cast(D, a); }
  static U srl(U a, int n) { return a >> n; }
  static U and_(U a, U b) { return a & b; }
  static U or_(U a, U b) { return a | b; }
};

template <class O>
std::size_t captive_loop(const CaptiveStep& p, double* x, const double* dw, const double* jump,
                         double* overshoot, std::size_t i, std::size_t n) {
  for (; i + O::width <= n; i += O::width) {
    typename O::D over;
    O::store(x + i, captive_lane<O>(p, O::load(x + i), O::load(dw + i), O::load(jump + i), over));
    O::store(overshoot + i, over);
  }
  return i;
}

template <class O>
std::size_t corridor_loop(const CorridorStep& p, double* x, const double* beta, const double* dw,
                          const double* jump, const double* lo, const double* hi,
                          double* overshoot, std::size_t i, std::size_t n) {
  for (; i + O::width <= n; i += O::width) {
    typename O::D over;
    O::store(x + i, corridor_lane<O>(p, O::load(x + i), O::load(beta + i), O::load(dw + i),
                                     O::load(jump + i), O::load(lo + i), O::load(hi + i), over));
    O::store(overshoot + i, over);
  }
  return i;
}

template <class O>
std::size_t box_muller_loop(const std::uint64_t* b1, const std::uint64_t* b2, double* z0,
                            double* z1, std::size_t i, std::size_t n) {
  for (; i + O::width <= n; i += O::width) {
    typename O::D a, b;
    box_muller_lane<O>(O::loadu(b1 + i), O::loadu(b2 + i), a, b);
    O::store(z0 + i, a);
    O::store(z1 + i, b);
  }
  return i;
}

}  // namespace
}  // namespace captive::kernels
