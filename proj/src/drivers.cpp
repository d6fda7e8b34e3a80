#include "captive/drivers.hpp"

#include <cmath>

#include "captive/error.hpp"
#include "captive/kernels.hpp"

namespace captive {

const char* to_string(JumpCorrelation c) noexcept {
  switch (c) {
    case JumpCorrelation::independent:
      return "independent";
    case JumpCorrelation::common:
      return "common";
    case JumpCorrelation::thinned:
      return "thinned";
  }
  return "unknown";
}

void JumpSpec::validate() const {
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
    throw ConfigError("jump intensity must be finite and >= 0");
  }
  if (!(share >= 0.0 && share <= 1.0)) {
    throw ConfigError("thinned share must lie in [0, 1]");
  }
}

std::vector<double> brownian_increments(const RandomSource& src, double dt, std::size_t n,
                                        Stream stream) {
  std::vector<double> out(n);
  if (n == 0) return out;
  const std::size_t blocks = (n + 1) / 2;
  std::vector<std::uint64_t> b1(blocks), b2(blocks);
  std::vector<double> z0(blocks), z1(blocks);
  src.fill_words(stream, 0, b1, b2);
  const kernels::KernelTable& k = kernels::active();
  k.box_muller(b1.data(), b2.data(), z0.data(), z1.data(), blocks);
  const double sd = std::sqrt(dt);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = ((i & 1) == 0 ? z0[i / 2] : z1[i / 2]) * sd;
  }
  return out;
}

namespace {

std::vector<double> arrivals(const RandomSource& src, Stream stream, double rate,
                             double horizon) {
  std::vector<double> times;
  if (!(rate > 0.0) || !(horizon > 0.0)) return times;
  double t = 0.0;
  for (std::uint64_t i = 0;; ++i) {
    t += -std::log(src.uniform_pos(stream, i)) / rate;
    if (t > horizon) break;
    // Exponential draws are strictly positive, so times increase strictly
    // unless an increment underflows against t.
    if (!times.empty() && !(t > times.back())) continue;
    times.push_back(t);
  }
  return times;
}

}  // namespace

std::vector<double> poisson_jump_times(const RandomSource& src, const JumpSpec& spec,
                                       double horizon) {
  spec.validate();
  return arrivals(src, Stream::jumps, spec.intensity, horizon);
}

std::vector<double> partner_jump_times(const RandomSource& src, const JumpSpec& spec,
                                       double horizon) {
  spec.validate();
  switch (spec.correlation) {
    case JumpCorrelation::independent:
      return arrivals(src, Stream::jumps2, spec.intensity, horizon);
    case JumpCorrelation::common:
      return arrivals(src, Stream::jumps, spec.intensity, horizon);
    case JumpCorrelation::thinned: {
      const std::vector<double> primary = arrivals(src, Stream::jumps, spec.intensity, horizon);
      const std::vector<double> own =
          arrivals(src, Stream::jumps2, spec.intensity * (1.0 - spec.share), horizon);
      std::vector<double> kept;
      for (std::size_t i = 0; i < primary.size(); ++i) {
        if (src.uniform(Stream::thinning, i) < spec.share) kept.push_back(primary[i]);
      }
      std::vector<double> out;
      out.reserve(kept.size() + own.size());
      std::size_t i = 0, j = 0;
      while (i < kept.size() || j < own.size()) {
        double t;
        if (j == own.size() || (i < kept.size() && kept[i] <= own[j])) {
          t = kept[i++];
        } else {
          t = own[j++];
        }
        if (out.empty() || t > out.back()) out.push_back(t);
      }
      return out;
    }
  }
  return {};
}

std::pair<std::vector<double>, std::vector<double>> correlated_brownian_pair(
    const RandomSource& src, double rho, double dt, std::size_t n) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw ConfigError("correlation must lie in [-1, 1]");
  }
  std::vector<double> w1 = brownian_increments(src, dt, n, Stream::brownian);
  std::vector<double> z = brownian_increments(src, dt, n, Stream::brownian2);
  const double c = std::sqrt(1.0 - rho * rho);
  std::vector<double> w2(n);
  for (std::size_t i = 0; i < n; ++i) w2[i] = rho * w1[i] + c * z[i];
  return {std::move(w1), std::move(w2)};
}

JumpSchedule snap_jumps(const std::vector<double>& times, const TimeGrid& grid) {
  JumpSchedule s;
  s.steps.reserve(times.size());
  const std::size_t n = grid.steps();
  for (double t : times) {
    std::size_t k = grid.next_index(t);
    std::size_t step = k == 0 ? 0 : k - 1;
    if (!s.steps.empty() && step <= s.steps.back()) {
      step = s.steps.back() + 1;
      ++s.displaced;
    }
    if (step >= n) {
      ++s.dropped;
      continue;
    }
    s.steps.push_back(step);
  }
  return s;
}

}  // namespace captive
