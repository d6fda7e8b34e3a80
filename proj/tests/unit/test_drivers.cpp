#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "captive/drivers.hpp"
#include "captive/error.hpp"

using namespace captive;

TEST(Brownian, MomentsOfIncrements) {
  const double dt = 1e-3;
  const std::size_t n = 200000;
  const auto w = brownian_increments(RandomSource(5, 0), dt, n);
  double s = 0, s2 = 0, s4 = 0;
  for (double v : w) {
    s += v;
    s2 += v * v;
    s4 += v * v * v * v;
  }
  const double var = s2 / n;
  EXPECT_NEAR(s / n, 0.0, 5 * std::sqrt(dt / n));
  // Var(v^2) = 2 dt^2
  EXPECT_NEAR(var, dt, 5 * std::sqrt(2.0 / n) * dt);
  EXPECT_NEAR(s4 / n / (var * var), 3.0, 0.1);
}

TEST(Brownian, PrefixStable) {
  // The first k increments do not depend on how many are requested.
  const RandomSource src(6, 3);
  const auto a = brownian_increments(src, 0.01, 11);
  const auto b = brownian_increments(src, 0.01, 40);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Brownian, CorrelatedPair) {
  const std::size_t n = 100000;
  for (double rho : {-0.8, 0.0, 0.5, 1.0}) {
    const auto [w1, w2] = correlated_brownian_pair(RandomSource(7, 1), rho, 1.0, n);
    double s11 = 0, s22 = 0, s12 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s11 += w1[i] * w1[i];
      s22 += w2[i] * w2[i];
      s12 += w1[i] * w2[i];
    }
    EXPECT_NEAR(s12 / std::sqrt(s11 * s22), rho, 0.015) << rho;
    EXPECT_EQ(w1, brownian_increments(RandomSource(7, 1), 1.0, n));
  }
  EXPECT_THROW(correlated_brownian_pair(RandomSource(1, 1), 1.5, 1.0, 10), ConfigError);
}

TEST(Poisson, CountsMatchIntensity) {
  const JumpSpec spec{2.0};
  const double T = 10.0;
  const int paths = 4000;
  double total = 0, total2 = 0;
  for (int p = 0; p < paths; ++p) {
    const auto t = poisson_jump_times(RandomSource(8, p), spec, T);
    ASSERT_TRUE(std::is_sorted(t.begin(), t.end()));
    if (!t.empty()) {
      ASSERT_GT(t.front(), 0.0);
      ASSERT_LE(t.back(), T);
    }
    total += t.size();
    total2 += static_cast<double>(t.size()) * t.size();
  }
  const double mean = total / paths;
  const double var = total2 / paths - mean * mean;
  EXPECT_NEAR(mean, 20.0, 5 * std::sqrt(20.0 / paths));
  EXPECT_NEAR(var / mean, 1.0, 0.1);
}

TEST(Poisson, ZeroIntensityAndValidation) {
  EXPECT_TRUE(poisson_jump_times(RandomSource(1, 0), JumpSpec{0.0}, 5.0).empty());
  EXPECT_THROW(poisson_jump_times(RandomSource(1, 0), JumpSpec{-1.0}, 5.0), ConfigError);
  JumpSpec bad{1.0, JumpCorrelation::thinned, 1.5};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Partner, CommonAndIndependent) {
  const RandomSource src(9, 2);
  JumpSpec s{3.0, JumpCorrelation::common};
  EXPECT_EQ(partner_jump_times(src, s, 5.0), poisson_jump_times(src, s, 5.0));
  s.correlation = JumpCorrelation::independent;
  EXPECT_NE(partner_jump_times(src, s, 5.0), poisson_jump_times(src, s, 5.0));
}

TEST(Partner, ThinnedIsMarginallyPoissonWithSharedFraction) {
  const JumpSpec s{2.0, JumpCorrelation::thinned, 0.3};
  const int paths = 4000;
  double n = 0, shared = 0;
  for (int p = 0; p < paths; ++p) {
    const RandomSource src(10, p);
    const auto a = poisson_jump_times(src, s, 10.0);
    const auto b = partner_jump_times(src, s, 10.0);
    n += b.size();
    for (double t : b) shared += std::binary_search(a.begin(), a.end(), t);
  }
  EXPECT_NEAR(n / paths, 20.0, 5 * std::sqrt(20.0 / paths));
  EXPECT_NEAR(shared / n, 0.3, 0.02);
}

TEST(SnapJumps, AssignsToFirstStepEndingAfter) {
  const TimeGrid grid(1.0, 10);  // dt = 0.1
  const JumpSchedule s = snap_jumps({0.05, 0.1, 0.15, 0.16, 0.999, 1.0}, grid);
  // 0.05 -> step 0, 0.1 -> step 0 (end time >= t) -> displaced to 1,
  // 0.15 -> step 1 -> displaced to 2, 0.16 -> 3, 0.999 -> 9, 1.0 -> dropped.
  EXPECT_EQ(s.steps, (std::vector<std::size_t>{0, 1, 2, 3, 9}));
  EXPECT_EQ(s.displaced, 4u);
  EXPECT_EQ(s.dropped, 1u);
}
