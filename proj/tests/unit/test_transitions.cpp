#include <gtest/gtest.h>

#include <cmath>

#include "captive/corridors.hpp"
#include "captive/error.hpp"
#include "captive/transitions.hpp"
#include "generators.hpp"

using namespace captive;

namespace {

CorridorModel four_levels(ThetaSpec theta = ThetaSpec::uniform()) {
  return CorridorModel::levels({1.0, 2.0, 2.5, 3.5}, {0.5, 0.5, 0.5}, JumpSpec{2.0}, theta);
}

// Midpoint rule over theta in [lo, hi] of the density times the indicator
// that the jump lands in [k, l) (or [k, l] when closed).
double integrate_landing(double x, double a, double d, double k, double l, bool closed, double lo,
                         double hi, std::size_t n = 2000000) {
  const double m = std::min(x - a, d - x);
  const double h = (hi - lo) / static_cast<double>(n);
  const double dens = 1.0 / (hi - lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double th = lo + (static_cast<double>(i) + 0.5) * h;
    const double y = x + th * m;
    if (y >= k && (closed ? y <= l : y < l)) acc += dens * h;
  }
  return acc;
}

}  // namespace

TEST(Theta, UniformAndConstantLaws) {
  const UniformTheta u(-1.0, 1.0);
  EXPECT_DOUBLE_EQ(u.density(0.3), 0.5);
  EXPECT_EQ(u.density(1.5), 0.0);
  EXPECT_DOUBLE_EQ(u.mass(0.0, 0.5, false), 0.25);
  EXPECT_DOUBLE_EQ(u.mass(-3.0, 3.0, false), 1.0);
  EXPECT_EQ(u.mass(2.0, 3.0, false), 0.0);
  EXPECT_THROW(UniformTheta(0.5, 0.2), ConfigError);
  EXPECT_THROW(UniformTheta(-1.5, 0.2), ConfigError);

  const ConstantTheta c(0.5);
  EXPECT_EQ(c.mass(0.0, 0.5, false), 0.0);
  EXPECT_EQ(c.mass(0.0, 0.5, true), 1.0);
  EXPECT_EQ(c.mass(0.5, 0.7, false), 1.0);
  EXPECT_THROW(theta_distribution(ThetaSpec::none()), ConfigError);
  EXPECT_EQ(theta_distribution(ThetaSpec::constant(0.3))->name(), "constant");
}

TEST(Transitions, SSetFormula) {
  const CorridorModel m = four_levels();
  const TransitionQuery q = corridor_query(m, 0.0, 1.9, 0, 2, 1.0);
  const Interval s = s_set(q);
  EXPECT_DOUBLE_EQ(s.lo, (2.5 - 1.9) / 0.9);
  EXPECT_DOUBLE_EQ(s.hi, (3.5 - 1.9) / 0.9);
  EXPECT_TRUE(s.closed);

  TransitionQuery on_edge = corridor_query(m, 0.0, 1.0, 0, 1, 1.0);
  EXPECT_THROW(s_set(on_edge), StateError);
}

TEST(Transitions, AnalyticMatchesNumericIntegration) {
  const CorridorModel m = four_levels();
  const double jp = -std::expm1(-2.0 * 1e-3);
  for (double x : {1.1, 1.5, 1.9, 2.2, 2.45, 2.7, 3.0, 3.4}) {
    const std::size_t from = corridor_index(m, 0.0, x);
    for (std::size_t to = 0; to < 3; ++to) {
      const TransitionQuery q = corridor_query(m, 0.0, x, from, to, jp);
      const double lo = m.stack()[to].fn.eval(0.0), hi = m.stack()[to + 1].fn.eval(0.0);
      const double oracle = jp * integrate_landing(x, 1.0, 3.5, lo, hi, to == 2, -1.0, 1.0);
      EXPECT_NEAR(transition_probability(q), oracle, 1e-8) << "x=" << x << " to=" << to;
    }
  }
  // the reported x = 1.9 skip, unscaled
  const double p = transition_probability(corridor_query(m, 0.0, 1.9, 0, 2, 1.0));
  EXPECT_NEAR(p, integrate_landing(1.9, 1.0, 3.5, 2.5, 3.5, true, -1.0, 1.0), 1e-4);
  EXPECT_NEAR(p, 1.0 / 6.0, 1e-12);
}

TEST(Transitions, RestrictedUniformSupport) {
  const CorridorModel m = four_levels(ThetaSpec::uniform(0.2, 0.9));
  for (double x : {1.3, 1.9, 2.3}) {
    const std::size_t from = corridor_index(m, 0.0, x);
    for (std::size_t to = 0; to < 3; ++to) {
      const double lo = m.stack()[to].fn.eval(0.0), hi = m.stack()[to + 1].fn.eval(0.0);
      EXPECT_NEAR(transition_probability(corridor_query(m, 0.0, x, from, to, 1.0)),
                  integrate_landing(x, 1.0, 3.5, lo, hi, to == 2, 0.2, 0.9), 1e-6);
    }
  }
}

// Rows sum to the jump probability: every jump lands somewhere in [a, d].
TEST(TransitionProperty, RowsAreStochastic) {
  const CorridorModel m = four_levels();
  gen::Gen g(808);
  for (int c = 0; c < 500; ++c) {
    const double x = g.uniform(1.0 + 1e-6, 3.5 - 1e-6);
    const double jp = g.uniform(0.0, 1.0);
    const std::size_t from = corridor_index(m, 0.0, x);
    double sum = 0.0;
    for (std::size_t to = 0; to < 3; ++to) {
      const double p = transition_probability(corridor_query(m, 0.0, x, from, to, jp));
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, jp, 1e-12) << "x=" << x;
  }
}

TEST(Transitions, ZeroRulesAreExact) {
  const CorridorModel m = four_levels();
  // upward out of reach: k - x > m
  EXPECT_EQ(transition_probability(corridor_query(m, 0.0, 1.15, 0, 2, 1.0)), 0.0);
  EXPECT_EQ(transition_probability(corridor_query(m, 0.0, 1.15, 0, 1, 1.0)), 0.0);
  // downward out of reach: l - x < -m
  EXPECT_EQ(transition_probability(corridor_query(m, 0.0, 3.4, 2, 0, 1.0)), 0.0);
  // zero jump probability
  EXPECT_EQ(transition_probability(corridor_query(m, 0.0, 1.9, 0, 2, 0.0)), 0.0);
}

TEST(Transitions, ConstantThetaIsAPointMass) {
  const CorridorModel m = four_levels(ThetaSpec::constant(0.5));
  // 1.9 + 0.5 * 0.9 = 2.35 lands in [2, 2.5)
  EXPECT_EQ(transition_probability(corridor_query(m, 0.0, 1.9, 0, 1, 0.25)), 0.25);
  EXPECT_EQ(transition_probability(corridor_query(m, 0.0, 1.9, 0, 2, 0.25)), 0.0);
  EXPECT_EQ(transition_probability(corridor_query(m, 0.0, 1.9, 0, 0, 0.25)), 0.0);
}

TEST(Transitions, QueryValidation) {
  const CorridorModel m = four_levels();
  EXPECT_THROW(transition_probability(corridor_query(m, 0.0, 2.2, 0, 2, 1.0)), ConfigError);
  EXPECT_THROW(transition_probability(corridor_query(m, 0.0, 1.9, 0, 2, 1.5)), ConfigError);
  EXPECT_THROW(corridor_query(m, 0.0, 1.9, 0, 3, 1.0), ConfigError);
}

TEST(Wilson, MatchesClosedForm) {
  // independent evaluation: roots of (p - phat)^2 = z^2 p (1 - p) / n
  for (auto [k, n] : {std::pair<std::uint64_t, std::uint64_t>{10, 100}, {1, 7}, {500, 1000}, {3, 100000}}) {
    const double z = 1.959963984540054;
    const double ph = static_cast<double>(k) / n;
    const double A = 1.0 + z * z / n, B = -(2.0 * ph + z * z / n), C = ph * ph;
    const double disc = std::sqrt(B * B - 4.0 * A * C);
    const Interval w = wilson_interval(k, n);
    EXPECT_NEAR(w.lo, (-B - disc) / (2.0 * A), 1e-12) << k << "/" << n;
    EXPECT_NEAR(w.hi, (-B + disc) / (2.0 * A), 1e-12) << k << "/" << n;
  }
  const Interval w = wilson_interval(10, 100);
  EXPECT_NEAR(w.lo, 0.0552, 1e-4);
  EXPECT_NEAR(w.hi, 0.1744, 1e-4);
  EXPECT_EQ(wilson_interval(0, 50).lo, 0.0);
  EXPECT_EQ(wilson_interval(50, 50).hi, 1.0);
  EXPECT_EQ(wilson_interval(0, 0).hi, 1.0);
}

TEST(TransitionMc, EstimateBracketsAnalytic) {
  const CorridorModel m = four_levels();
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 10.0;
  cfg.n_paths = 4096;
  cfg.x0 = 1.5;
  cfg.seed = 31;
  Conditioning c;
  c.from = 0;
  c.to = 1;
  c.bin_lo = 1.85;
  c.bin_hi = 1.95;
  c.min_steps = 30000;
  const TransitionEstimate e = estimate_transition_mc(m, cfg, c);
  EXPECT_TRUE(e.reached_min_steps);
  EXPECT_GE(e.steps, 30000u);
  EXPECT_NEAR(e.step_jump_prob, -std::expm1(-2e-3), 1e-15);
  EXPECT_LE(e.ci_lo, e.analytic_average);
  EXPECT_GE(e.ci_hi, e.analytic_average);
  EXPECT_DOUBLE_EQ(e.estimate, e.fraction * e.step_jump_prob);
}

TEST(TransitionMc, ZeroRuleBinSeesNoEvents) {
  const CorridorModel m = four_levels();
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 10.0;
  cfg.n_paths = 2048;
  cfg.x0 = 1.15;
  cfg.seed = 32;
  Conditioning c{0, 2, 1.1, 1.2, 20000};
  const TransitionEstimate e = estimate_transition_mc(m, cfg, c);
  EXPECT_EQ(e.analytic_average, 0.0);
  EXPECT_EQ(e.landed, 0u);
  EXPECT_GT(e.jumps, 0u);
}

TEST(TransitionMc, TooFewSamplesIsStatisticalError) {
  const CorridorModel m = four_levels();
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.horizon = 0.1;
  cfg.n_paths = 1;
  cfg.x0 = 1.5;
  Conditioning c{0, 2, 1.85, 1.95, 1000};
  EXPECT_THROW(estimate_transition_mc(m, cfg, c), StatisticalError);
}
