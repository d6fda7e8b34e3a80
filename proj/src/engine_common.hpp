#pragma once

// Building blocks shared by the captive, corridor and polar batch engines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "captive/coefficients.hpp"
#include "captive/drivers.hpp"
#include "captive/kernels.hpp"
#include "captive/random.hpp"
#include "captive/time_grid.hpp"

namespace captive::detail {

inline constexpr std::size_t kBatchLanes = 256;
inline constexpr std::size_t kChunkSteps = 32;

/// Brownian increments for a batch of lanes over a run of steps, laid out
/// step-major: dw(s)[lane]. Step k of a path always uses half k % 2 of
/// Box-Muller block k / 2, whatever the chunking.
class NormalChunk {
 public:
  void fill(const kernels::KernelTable& k, std::span<const RandomSource> srcs, Stream stream,
            std::size_t first_step, std::size_t count, double sqrt_dt) {
    lanes_ = srcs.size();
    const std::size_t blocks = (count + 1) / 2;
    const std::size_t total = lanes_ * blocks;
    b1_.resize(total);
    b2_.resize(total);
    z0_.resize(total);
    z1_.resize(total);
    dw_.resize(lanes_ * count);
    for (std::size_t l = 0; l < lanes_; ++l) {
      srcs[l].fill_words(stream, first_step / 2, std::span(b1_).subspan(l * blocks, blocks),
                         std::span(b2_).subspan(l * blocks, blocks));
    }
    k.box_muller(b1_.data(), b2_.data(), z0_.data(), z1_.data(), total);
    for (std::size_t s = 0; s < count; ++s) {
      const std::vector<double>& z = (s & 1) == 0 ? z0_ : z1_;
      double* out = dw_.data() + s * lanes_;
      for (std::size_t l = 0; l < lanes_; ++l) out[l] = z[l * blocks + s / 2] * sqrt_dt;
    }
  }

  const double* step(std::size_t s) const noexcept { return dw_.data() + s * lanes_; }
  double* step_mut(std::size_t s) noexcept { return dw_.data() + s * lanes_; }

 private:
  std::size_t lanes_ = 0;
  std::vector<std::uint64_t> b1_, b2_;
  std::vector<double> z0_, z1_, dw_;
};

/// Which coordinate of a two-coordinate model a path drives. Coordinate 2
/// uses dW2 = rho dW1 + sqrt(1 - rho^2) dZ and the partner jump process.
struct DriverRole {
  int coordinate = 1;
  double rho = 0.0;
};

/// Brownian increments of one role for a batch.
class IncrementSource {
 public:
  explicit IncrementSource(DriverRole role) : role_(role), c_(std::sqrt(1.0 - role.rho * role.rho)) {}

  void fill(const kernels::KernelTable& k, std::span<const RandomSource> srcs,
            std::size_t first_step, std::size_t count, double sqrt_dt) {
    lanes_ = srcs.size();
    w1_.fill(k, srcs, Stream::brownian, first_step, count, sqrt_dt);
    if (role_.coordinate == 2) {
      z2_.fill(k, srcs, Stream::brownian2, first_step, count, sqrt_dt);
      for (std::size_t s = 0; s < count; ++s) {
        const double* a = w1_.step(s);
        double* b = z2_.step_mut(s);
        for (std::size_t l = 0; l < lanes_; ++l) b[l] = role_.rho * a[l] + c_ * b[l];
      }
    }
  }

  const double* step(std::size_t s) const noexcept {
    return role_.coordinate == 2 ? z2_.step(s) : w1_.step(s);
  }

 private:
  DriverRole role_;
  double c_;
  std::size_t lanes_ = 0;
  NormalChunk w1_, z2_;
};

/// Snapped jump steps and per-jump theta of one lane.
struct LaneJumps {
  std::vector<std::size_t> steps;
  std::vector<double> theta;
  std::size_t next = 0;
  std::size_t displaced = 0;
  std::size_t dropped = 0;

  /// Theta of a jump on step k, or 0 (advances the cursor).
  double take(std::size_t k) {
    if (next < steps.size() && steps[next] == k) return theta[next++];
    return 0.0;
  }
};

inline LaneJumps plan_lane_jumps(const RandomSource& src, const JumpSpec& spec,
                                 const ThetaSpec& theta, const TimeGrid& grid, DriverRole role) {
  LaneJumps lj;
  if (!theta.active() || !(spec.intensity > 0.0)) return lj;
  const std::vector<double> times = role.coordinate == 2
                                        ? partner_jump_times(src, spec, grid.horizon())
                                        : poisson_jump_times(src, spec, grid.horizon());
  const JumpSchedule s = snap_jumps(times, grid);
  lj.steps = s.steps;
  lj.displaced = s.displaced;
  lj.dropped = s.dropped;
  lj.theta.resize(lj.steps.size());
  const Stream st = role.coordinate == 2 ? Stream::theta2 : Stream::theta;
  for (std::size_t j = 0; j < lj.steps.size(); ++j) lj.theta[j] = theta.sample(src, st, j);
  return lj;
}

/// Grid indices that are recorded: every `stride`-th index plus the last.
inline std::vector<std::size_t> record_indices(const TimeGrid& grid, std::size_t stride) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k <= grid.steps(); k += stride) out.push_back(k);
  if (out.back() != grid.steps()) out.push_back(grid.steps());
  return out;
}

/// Per-record moments merged batch by batch (Chan et al. pairwise update).
struct MomentTable {
  std::vector<double> n, mean, m2, min, max;

  void resize(std::size_t records) {
    n.assign(records, 0.0);
    mean.assign(records, 0.0);
    m2.assign(records, 0.0);
    min.assign(records, std::numeric_limits<double>::infinity());
    max.assign(records, -std::numeric_limits<double>::infinity());
  }

  void set_batch(std::size_t r, const kernels::Moments& m, std::size_t lanes) {
    n[r] = static_cast<double>(lanes);
    mean[r] = m.sum / static_cast<double>(lanes);
    m2[r] = m.m2;
    min[r] = m.min;
    max[r] = m.max;
  }

  void merge(const MomentTable& b) {
    for (std::size_t r = 0; r < n.size(); ++r) {
      if (b.n[r] == 0.0) continue;
      if (n[r] == 0.0) {
        n[r] = b.n[r];
        mean[r] = b.mean[r];
        m2[r] = b.m2[r];
        min[r] = b.min[r];
        max[r] = b.max[r];
        continue;
      }
      const double na = n[r], nb = b.n[r], nt = na + nb;
      const double delta = b.mean[r] - mean[r];
      mean[r] = mean[r] + delta * (nb / nt);
      m2[r] = m2[r] + b.m2[r] + delta * delta * (na * nb / nt);
      n[r] = nt;
      min[r] = std::min(min[r], b.min[r]);
      max[r] = std::max(max[r], b.max[r]);
    }
  }
};

/// Runs batches in rounds of `workers`, merging results in batch order, so
/// the merged outcome is independent of the worker count. An exception from
/// the lowest-numbered failing batch of a round is rethrown.
template <class R, class Make, class Merge>
void run_rounds(std::size_t n_batches, std::size_t workers, Make&& make, Merge&& merge) {
  workers = std::max<std::size_t>(1, workers);
  for (std::size_t b0 = 0; b0 < n_batches; b0 += workers) {
    const std::size_t m = std::min(workers, n_batches - b0);
    std::vector<std::optional<R>> res(m);
    std::vector<std::exception_ptr> errs(m);
    auto job = [&](std::size_t i) {
      try {
        res[i].emplace(make(b0 + i));
      } catch (...) {
        errs[i] = std::current_exception();
      }
    };
    if (m == 1) {
      job(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(m - 1);
      for (std::size_t i = 1; i < m; ++i) pool.emplace_back(job, i);
      job(0);
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (errs[i]) std::rethrow_exception(errs[i]);
    }
    for (std::size_t i = 0; i < m; ++i) merge(std::move(*res[i]));
  }
}

inline double max_ref(double a, double b) { return a > b ? a : b; }
inline double min_ref(double a, double b) { return a < b ? a : b; }

}  // namespace captive::detail
