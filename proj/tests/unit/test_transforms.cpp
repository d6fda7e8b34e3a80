#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "captive/error.hpp"
#include "captive/simulator.hpp"
#include "captive/transforms.hpp"
#include "generators.hpp"

using namespace captive;

namespace {

SimConfig config(double dt, double T, std::size_t n, double x0, std::uint64_t seed = 1) {
  SimConfig c;
  c.dt = dt;
  c.horizon = T;
  c.n_paths = n;
  c.x0 = x0;
  c.seed = seed;
  return c;
}

CaptiveModel moving_band(double T) {
  // upper boundary drifts up; jumps on
  return CaptiveModel{CoefficientSet::mean_reverting(1.0, 2.5, 1.0, ThetaSpec::uniform()),
                      BoundaryFn::constant(2.0, T, BoundaryKind::lower_admissible),
                      BoundaryFn::linear(3.0, 0.05, T, BoundaryKind::upper_admissible), JumpSpec{3.0}};
}

}  // namespace

TEST(Monotone, Builtins) {
  const MonotoneMap e = builtin_monotone_map("exp");
  EXPECT_EQ(e.direction, Direction::increasing);
  EXPECT_DOUBLE_EQ(e.f(1.0), std::exp(1.0));
  const MonotoneMap r = builtin_monotone_map("reciprocal");
  EXPECT_EQ(r.direction, Direction::decreasing);
  EXPECT_DOUBLE_EQ(r.f1(2.0), -0.25);
  EXPECT_DOUBLE_EQ(r.f2(2.0), 0.25);
  EXPECT_EQ(builtin_monotone_map("identity").f(3.25), 3.25);
  EXPECT_THROW(builtin_monotone_map("square"), ConfigError);
}

TEST(Monotone, CheckFindsWrongSign) {
  const MonotoneCheck ok = check_monotone(builtin_monotone_map("exp"), 2.0, 3.0);
  EXPECT_TRUE(ok.ok);
  EXPECT_EQ(ok.samples, kMonotoneSamples);
  EXPECT_NEAR(ok.lipschitz, std::exp(3.0), 1e-12);

  const MonotoneCheck sc = check_monotone(builtin_monotone_map("sin-construct"), -1.0, 1.0);
  EXPECT_TRUE(sc.ok);
  EXPECT_NEAR(sc.lipschitz, 1.0, 1e-6);  // 0 is not a sample point

  MonotoneMap cosine = builtin_monotone_map("identity");
  cosine.name = "cos-slope";
  cosine.f1 = [](double x) { return std::cos(x); };
  const MonotoneCheck bad = check_monotone(cosine, 0.0, 4.0, 1000);
  EXPECT_FALSE(bad.ok);
  ASSERT_TRUE(bad.first_bad);
  const double step = 4.0 / 999.0;
  EXPECT_GE(*bad.first_bad, std::numbers::pi / 2);
  EXPECT_LT(*bad.first_bad, std::numbers::pi / 2 + step);

  // envelope outside the domain
  EXPECT_FALSE(check_monotone(builtin_monotone_map("reciprocal"), -1.0, 1.0).ok);
  EXPECT_FALSE(check_monotone(builtin_monotone_map("sin-construct"), -2.0, 0.0).ok);
}

TEST(Transforms, ExpMapPreservesCaptivityAndFlags) {
  const double T = 1.0;
  SimConfig cfg = config(1e-3, T, 20, 2.5, 5);
  const ValidatedModel vm = validate(moving_band(T), cfg.grid());
  EnsembleOptions o;
  o.keep_paths = 20;
  const EnsembleSummary s = run_ensemble(vm, cfg, o);
  const MonotoneMap f = builtin_monotone_map("exp");
  for (const PathSample& p : s.paths) {
    const MappedPath mp = map_path(p, f, vm.model().lower, vm.model().upper);
    EXPECT_EQ(mp.path.jump_flags, p.jump_flags);
    EXPECT_EQ(mp.path.times, p.times);
    for (std::size_t k = 0; k < p.values.size(); ++k) EXPECT_EQ(mp.path.values[k], std::exp(p.values[k]));
    EXPECT_TRUE(check_captivity(mp.path, mp.lower, mp.upper, mp.tolerance(cfg.clamp_tolerance)).empty());
    EXPECT_DOUBLE_EQ(mp.lower.eval(0.5), std::exp(2.0));
    EXPECT_NEAR(mp.upper.eval(0.5), std::exp(3.025), 1e-9);
  }
}

TEST(Transforms, ReciprocalSwapsBoundaries) {
  const double T = 1.0;
  SimConfig cfg = config(1e-3, T, 10, 2.2, 6);
  const ValidatedModel vm = validate(moving_band(T), cfg.grid());
  EnsembleOptions o;
  o.keep_paths = 10;
  const EnsembleSummary s = run_ensemble(vm, cfg, o);
  const MonotoneMap f = builtin_monotone_map("reciprocal");
  for (const PathSample& p : s.paths) {
    const MappedPath mp = map_path(p, f, vm.model().lower, vm.model().upper);
    EXPECT_NEAR(mp.lower.eval(0.0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(mp.upper.eval(0.0), 0.5, 1e-15);
    EXPECT_EQ(mp.path.jump_flags, p.jump_flags);
    EXPECT_TRUE(check_captivity(mp.path, mp.lower, mp.upper, mp.tolerance(cfg.clamp_tolerance)).empty());
  }
}

TEST(Transforms, MappedBoundaryJumpsFollowTheMap) {
  const double T = 1.0;
  const BoundaryFn lo = BoundaryFn::constant(1.0, T, BoundaryKind::lower_admissible);
  const BoundaryFn up({{0.0, T, shape::Constant{2.0}}}, {{0.5, 1.0}}, BoundaryKind::upper_admissible);
  PathSample p;
  p.times = {0.0, 0.25, 0.5, 0.75, 1.0};
  p.values = {1.5, 1.9, 2.9, 2.0, 1.2};
  p.jump_flags = {0, 0, 1, 0, 0};
  const MappedPath e = map_path(p, builtin_monotone_map("exp"), lo, up);
  EXPECT_NEAR(e.upper.eval_left(0.5), std::exp(2.0), 1e-12);
  EXPECT_NEAR(e.upper.eval(0.5), std::exp(3.0), 1e-12);
  EXPECT_EQ(e.upper.kind(), BoundaryKind::upper_admissible);
  EXPECT_TRUE(check_captivity(e.path, e.lower, e.upper, 0.0).empty());

  // decreasing map: the upper jump up becomes a lower jump down
  const MappedPath r = map_path(p, builtin_monotone_map("reciprocal"), lo, up);
  EXPECT_NEAR(r.lower.eval_left(0.5), 0.5, 1e-12);
  EXPECT_NEAR(r.lower.eval(0.5), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(r.lower.kind(), BoundaryKind::lower_admissible);
  EXPECT_TRUE(check_captivity(r.path, r.lower, r.upper, 0.0).empty());
}

TEST(Transforms, NonMonotoneEnvelopeIsRejected) {
  const double T = 1.0;
  PathSample p;
  p.times = {0.0, 1.0};
  p.values = {0.5, 0.5};
  p.jump_flags = {0, 0};
  EXPECT_THROW(map_path(p, builtin_monotone_map("reciprocal"), BoundaryFn::constant(-1.0, T),
                        BoundaryFn::constant(1.0, T)),
               ConfigError);
}

TEST(BoundedMaps, CaptiveFromBounded) {
  EXPECT_THROW(captive_from_bounded(std::make_shared<BoundedMap>(builtin_bounded_map("tanh"))), ConfigError);
  const CoefficientSet cs = captive_from_bounded(std::make_shared<BoundedMap>(builtin_bounded_map("sin")));
  EXPECT_EQ(cs.family(), Family::bounded_map);
  EXPECT_TRUE(cs.jump_is_zero());
  EXPECT_EQ(cs.vol(0.0, 1.0, -1.0, 1.0), 0.0);
  EXPECT_EQ(cs.vol(0.0, -1.0, -1.0, 1.0), 0.0);
  gen::Gen g(909);
  for (int i = 0; i < 200; ++i) {
    const double x = g.uniform(-1.0, 1.0);
    // X = sin W: drift -X/2, |vol| = sqrt(1 - X^2)
    EXPECT_NEAR(cs.drift(0.0, x, -1.0, 1.0), -0.5 * x, 1e-12);
    EXPECT_NEAR(std::fabs(cs.vol(0.0, x, -1.0, 1.0)), std::sqrt(1.0 - x * x), 1e-12);
  }
  const CaptiveModel m = bounded_model(std::make_shared<BoundedMap>(builtin_bounded_map("cos")), 1.0);
  EXPECT_TRUE(validation_report(m, TimeGrid::from_step(1e-3, 1.0)).ok());
}
