#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "captive/drivers.hpp"
#include "captive/error.hpp"
#include "captive/simulator.hpp"
#include "generators.hpp"

using namespace captive;

namespace {

BoundaryFn lower(double v, double T) { return BoundaryFn::constant(v, T, BoundaryKind::lower_admissible); }
BoundaryFn upper(double v, double T) { return BoundaryFn::constant(v, T, BoundaryKind::upper_admissible); }

CaptiveModel band_model(double T, double lambda = 2.0) {
  return CaptiveModel{CoefficientSet::mean_reverting(1.0, 2.5, 1.0, ThetaSpec::uniform()), lower(2, T), upper(3, T),
                      JumpSpec{lambda}};
}

SimConfig config(double dt, double T, std::size_t n, double x0, std::uint64_t seed = 1) {
  SimConfig c;
  c.dt = dt;
  c.horizon = T;
  c.n_paths = n;
  c.x0 = x0;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Simulator, ZeroFamilyIsConstant) {
  const SimConfig cfg = config(0.01, 1.0, 1, 2.5);
  const ValidatedModel vm = validate(CaptiveModel{CoefficientSet::zero(), lower(2, 1), upper(3, 1), {}}, cfg.grid());
  const PathSample p = simulate_path(vm, cfg, RandomSource(1, 0));
  ASSERT_EQ(p.values.size(), 101u);
  for (double v : p.values) EXPECT_EQ(v, 2.5);
}

TEST(Simulator, JumpingPathStaysInside) {
  const SimConfig cfg = config(1e-3, 10.0, 1, 2.5);
  const ValidatedModel vm = validate(band_model(10.0), cfg.grid());
  const PathSample p = simulate_path(vm, cfg, RandomSource(cfg.seed, 0));
  EXPECT_GE(*std::min_element(p.values.begin(), p.values.end()), 2.0);
  EXPECT_LE(*std::max_element(p.values.begin(), p.values.end()), 3.0);
  EXPECT_GT(p.jumps, 0u);
  EXPECT_TRUE(check_captivity(p, vm.model().lower, vm.model().upper, 0.0).empty());
}

TEST(Simulator, SinglePathEnsembleMatchesSimulatePath) {
  SimConfig cfg = config(1e-3, 2.0, 1, 2.3, 99);
  const ValidatedModel vm = validate(band_model(2.0), cfg.grid());
  EnsembleOptions o;
  o.keep_paths = 1;
  const EnsembleSummary s = run_ensemble(vm, cfg, o);
  const PathSample p = simulate_path(vm, cfg, RandomSource(99, 0));
  ASSERT_EQ(s.paths.size(), 1u);
  EXPECT_EQ(s.paths[0].values, p.values);
  EXPECT_EQ(s.paths[0].jump_flags, p.jump_flags);
  EXPECT_EQ(s.final_values.front(), p.values.back());
}

TEST(Simulator, WorkerCountDoesNotChangeResults) {
  SimConfig cfg = config(1e-3, 1.0, 700, 2.5, 5);
  const ValidatedModel vm = validate(band_model(1.0), cfg.grid());
  EnsembleOptions o;
  o.keep_paths = 3;
  o.threads = 1;
  const EnsembleSummary a = run_ensemble(vm, cfg, o);
  o.threads = 3;
  const EnsembleSummary b = run_ensemble(vm, cfg, o);
  EXPECT_EQ(a.stats.mean, b.stats.mean);
  EXPECT_EQ(a.stats.variance, b.stats.variance);
  EXPECT_EQ(a.final_values, b.final_values);
  EXPECT_EQ(a.overshoots, b.overshoots);
  EXPECT_EQ(a.paths[2].values, b.paths[2].values);
}

TEST(Simulator, StatsAgainstIndependentReduction) {
  SimConfig cfg = config(1e-2, 1.0, 300, 2.5, 8);
  const ValidatedModel vm = validate(band_model(1.0), cfg.grid());
  EnsembleOptions o;
  o.keep_paths = 300;
  const EnsembleSummary s = run_ensemble(vm, cfg, o);
  for (std::size_t r : {std::size_t{0}, std::size_t{37}, s.record_time.size() - 1}) {
    double m = 0, mn = INFINITY, mx = -INFINITY;
    for (const PathSample& p : s.paths) {
      m += p.values[r];
      mn = std::min(mn, p.values[r]);
      mx = std::max(mx, p.values[r]);
    }
    m /= s.paths.size();
    double v = 0;
    for (const PathSample& p : s.paths) v += (p.values[r] - m) * (p.values[r] - m);
    v /= s.paths.size();
    EXPECT_NEAR(s.stats.mean[r], m, 1e-13);
    EXPECT_NEAR(s.stats.variance[r], v, 1e-13);
    EXPECT_EQ(s.stats.min[r], mn);
    EXPECT_EQ(s.stats.max[r], mx);
  }
}

TEST(Simulator, RecordStride) {
  SimConfig cfg = config(1e-2, 1.05, 1, 2.5, 8);
  cfg.record_stride = 10;
  const ValidatedModel vm = validate(band_model(1.05), cfg.grid());
  const PathSample p = simulate_path(vm, cfg, RandomSource(8, 0));
  // 105 steps: records at 0, 10, ..., 100 and the final point.
  EXPECT_EQ(p.step_index.size(), 12u);
  EXPECT_EQ(p.step_index.back(), 105u);
  EXPECT_EQ(p.times.back(), 1.05);
  // Jump flags OR over the skipped steps; with full resolution they sum to p.jumps.
  cfg.record_stride = 1;
  const PathSample f = simulate_path(vm, cfg, RandomSource(8, 0));
  std::size_t flagged = 0;
  for (auto j : f.jump_flags) flagged += j;
  EXPECT_EQ(flagged, f.jumps);
  for (std::size_t i = 0; i < p.step_index.size(); ++i) EXPECT_EQ(p.values[i], f.values[p.step_index[i]]);
}

TEST(Simulator, ClampCountShrinksWithStep) {
  const ValidatedModel coarse = validate(band_model(1.0), TimeGrid::from_step(1e-3, 1.0));
  const ValidatedModel fine = validate(band_model(1.0), TimeGrid::from_step(1e-4, 1.0));
  const EnsembleSummary a = run_ensemble(coarse, config(1e-3, 1.0, 100, 2.5, 3));
  const EnsembleSummary b = run_ensemble(fine, config(1e-4, 1.0, 100, 2.5, 3));
  EXPECT_GE(a.clamp_count, b.clamp_count);
  EXPECT_GE(a.max_overshoot, b.max_overshoot);
}

TEST(Simulator, RefusesMismatchedGridAndBadStart) {
  const ValidatedModel vm = validate(band_model(1.0), TimeGrid::from_step(1e-2, 1.0));
  EXPECT_THROW(simulate_path(vm, config(1e-3, 1.0, 1, 2.5), RandomSource(1, 0)), UsageError);
  EXPECT_THROW(simulate_path(vm, config(1e-2, 1.0, 1, 3.5), RandomSource(1, 0)), UsageError);
}

TEST(Simulator, ValidationFailureThrowsWithReport) {
  CaptiveModel m = band_model(1.0);
  m.coefficients = CoefficientSet::mean_reverting(1.0, 1.5, 1.0, ThetaSpec::uniform());
  try {
    validate(m, TimeGrid::from_step(1e-2, 1.0));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(e.details().find("\"ok\":false"), std::string::npos);
  }
}

TEST(Simulator, NaNCoefficientIsNumericalError) {
  family::Custom c;
  c.drift = [](double, double x, double gl, double gu) { return 2.5 - x + 0 * gl * gu; };
  c.vol = [](double, double x, double gl, double gu) {
    return x > 2.45 && x < 2.55 ? std::numeric_limits<double>::quiet_NaN() : (x - gl) * (gu - x);
  };
  const CaptiveModel m{CoefficientSet::custom(c), lower(2, 1), upper(3, 1), {}};
  const SimConfig cfg = config(1e-2, 1.0, 1, 2.5);
  const ValidatedModel vm = validate(m, cfg.grid());
  EXPECT_THROW(simulate_path(vm, cfg, RandomSource(1, 0)), NumericalError);
}

// Random admissible models with jumping boundaries: every recorded value is
// inside the boundaries exactly after clamping.
TEST(SimulatorProperty, CaptivityOnRandomModels) {
  gen::Gen g(41);
  int ran = 0;
  for (int c = 0; c < 40; ++c) {
    SCOPED_TRACE(c);
    const double T = 1.0, dt = 1e-3;
    const double base = g.uniform(-2, 2);
    const BoundaryFn lo = g.boundary(base, 0.3, T, dt, g.index(0, 2), -1, BoundaryKind::lower_admissible);
    const BoundaryFn up = g.boundary(base + g.uniform(1.5, 3), 0.3, T, dt, g.index(0, 2), 1,
                                     BoundaryKind::upper_admissible);
    const double beta = base + g.uniform(0.7, 1.3);
    const CaptiveModel m{CoefficientSet::mean_reverting(g.uniform(2, 8), beta, g.uniform(0.1, 3), ThetaSpec::uniform()),
                         lo, up, JumpSpec{g.uniform(0, 10)}};
    SimConfig cfg = config(dt, T, 64, 0.5 * (lo.eval(0) + up.eval(0)), g.bits());
    const ValidationReport rep = validation_report(m, cfg.grid());
    if (!rep.ok()) continue;
    ++ran;
    EnsembleOptions o;
    o.keep_paths = 64;
    const EnsembleSummary s = run_ensemble(validate(m, cfg.grid()), cfg, o);
    EXPECT_EQ(s.captivity_violations, 0u);
    for (const PathSample& p : s.paths) ASSERT_TRUE(check_captivity(p, lo, up, 0.0).empty());
  }
  EXPECT_GE(ran, 20);
}

TEST(CheckCaptivity, HandBuiltPaths) {
  PathSample p;
  p.times = {0.0, 0.5, 1.0};
  p.values = {2.5, 3.2, 2.9};
  const BoundaryFn lo = lower(2, 1), up = upper(3, 1);
  const auto v = check_captivity(p, lo, up, 1e-9);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].record, 1u);
  EXPECT_EQ(v[0].time, 0.5);
  EXPECT_TRUE(check_captivity(p, lo, up, std::numeric_limits<double>::infinity()).empty());
}

TEST(CheckAbsorption, Cases) {
  const BoundaryFn lo = lower(2, 1), up = upper(3, 1);
  PathSample p;
  p.times = {0.0, 0.25, 0.5, 0.75, 1.0};
  p.values = {2.5, 2.2, 2.0, 2.0, 2.0};
  AbsorptionReport r = check_absorption(p, lo, up);
  EXPECT_TRUE(r.hit);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.tau, 0.5);
  EXPECT_EQ(r.side, BoundarySide::lower);

  p.values = {2.5, 2.2, 2.0, 2.1, 2.0};
  r = check_absorption(p, lo, up);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.first_failure, 3u);

  p.values = {2.5, 2.6, 2.7, 2.6, 2.5};
  r = check_absorption(p, lo, up);
  EXPECT_FALSE(r.hit);
  EXPECT_TRUE(r.ok);

  // close to L but not on it, then away: no hit
  p.values = {2.5, 2.0 + 5e-13, 2.0 + 2e-12, 2.1, 2.2};
  r = check_absorption(p, lo, up);
  EXPECT_FALSE(r.hit);

  p.values = {2.5, 3.0, 3.0, 3.0 - 5e-13, 3.0};
  r = check_absorption(p, lo, up);
  EXPECT_TRUE(r.hit);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.side, BoundarySide::upper);

  EXPECT_THROW(check_absorption(p, BoundaryFn::linear(2, -0.1, 1, BoundaryKind::lower_admissible), up), ConfigError);
}

TEST(MonotoneBounds, Cases) {
  const TimeGrid grid = TimeGrid::from_step(0.01, 1.0);
  const CoefficientSet pj = CoefficientSet::pure_jump(ThetaSpec::uniform());
  EXPECT_TRUE(validate_monotone_bounds(pj, lower(2, 1), upper(3, 1), grid).ok);
  const BoundaryFn falling = BoundaryFn::linear(3.0, -0.1, 1.0, BoundaryKind::upper_admissible);
  const MonotoneReport r = validate_monotone_bounds(pj, lower(2, 1), falling, grid);
  EXPECT_TRUE(r.applies);
  EXPECT_FALSE(r.ok);
  const CoefficientSet full = CoefficientSet::mean_reverting(1.0, 2.5, 1.0, ThetaSpec::uniform());
  EXPECT_TRUE(validate_monotone_bounds(full, lower(2, 1), falling, grid).ok);
}

TEST(Quantile, OrderStatistics) {
  EXPECT_EQ(quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(quantile({1, 2, 3, 4}, 0.0), 1.0);
  EXPECT_EQ(quantile({1, 2, 3, 4}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
}

TEST(WorkerCount, ExplicitRequestWins) { EXPECT_EQ(worker_count(3), 3u); }
