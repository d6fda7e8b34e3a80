#pragma once

// Lane-parallel inner loops of the ensemble simulator. Every kernel has a
// scalar reference implementation and, where the build and CPU allow, an AVX2
// variant. Variants are required to agree bit for bit with the reference:
// both use the same operation order, IEEE min/max semantics of the x86
// instructions, and no fused multiply-add.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace captive::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa) noexcept;

/// Parameters of one Euler step of the mean-reverting captive family
///   pre = x + kappa (beta - x) dt + alpha (x - lower)(upper - x) dW
///           + theta max(0, min(x - lower_left, upper_left - x))
/// followed by clamping onto [lower_next, upper_next].
struct CaptiveStep {
  double dt = 0.0;
  double kappa = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double lower = 0.0;       // boundaries at t_k (drift/vol)
  double upper = 0.0;
  double lower_left = 0.0;  // left limits at t_{k+1} (jump room)
  double upper_left = 0.0;
  double lower_next = 0.0;  // boundaries at t_{k+1} (clamp)
  double upper_next = 0.0;
};

/// Corridor variant: per-lane target beta, volatility
/// alpha * prod_j (x - g_j) over the active boundary values, jump room against
/// the master boundaries, and per-lane clamp intervals.
struct CorridorStep {
  double dt = 0.0;
  double kappa = 0.0;
  double alpha = 0.0;
  double master_lower_left = 0.0;
  double master_upper_left = 0.0;
  std::span<const double> active;  // g_j(t_k), in stack order
};

/// Batch moments: sum, sum of squared deviations from the batch mean, min, max.
struct Moments {
  double sum = 0.0;
  double m2 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct KernelTable {
  Isa isa;
  /// `jump` holds theta on lanes with a jump this step and 0 elsewhere.
  /// `overshoot` receives max(0, lower_next - pre, pre - upper_next), NaN if
  /// pre is NaN.
  void (*captive_step)(const CaptiveStep& p, double* x, const double* dw, const double* jump,
                       double* overshoot, std::size_t n);
  void (*corridor_step)(const CorridorStep& p, double* x, const double* beta, const double* dw,
                        const double* jump, const double* lower_next, const double* upper_next,
                        double* overshoot, std::size_t n);
  /// Box-Muller over 64-bit words: u1 = 1 - U(bits1), u2 = U(bits2) with
  /// 52-bit uniforms; z0 = r cos(2 pi u2), z1 = r sin(2 pi u2).
  void (*box_muller)(const std::uint64_t* bits1, const std::uint64_t* bits2, double* z0,
                     double* z1, std::size_t n);
  Moments (*moments)(const double* x, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the variant was not built or the CPU lacks the ISA.
const KernelTable* avx2_table() noexcept;

/// Table used by the simulator: the best supported ISA, unless the
/// CAPTIVE_SIMD environment variable names another ("scalar", "avx2").
const KernelTable& active() noexcept;
const KernelTable& select(std::string_view name);

/// Reference log used by box_muller, exposed for testing.
double log_ref(double x) noexcept;
/// Reference sin/cos of 2 pi u for u in [0, 1), exposed for testing.
void sincos_2pi_ref(double u, double* s, double* c) noexcept;

}  // namespace captive::kernels
