#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "captive/corridors.hpp"
#include "captive/error.hpp"
#include "generators.hpp"

using namespace captive;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CorridorModel four_levels(double lambda = 2.0) {
  return CorridorModel::levels({1.0, 2.0, 2.5, 3.5}, {0.5, 0.5, 0.5}, JumpSpec{lambda});
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

// Internal boundary 2.2 that is only in the stack on [1, 3].
CorridorModel segmented(double T) {
  std::vector<StackBoundary> s;
  s.push_back({BoundaryFn::constant(1.0, T, BoundaryKind::lower_admissible), 0.0, kInf});
  s.push_back({BoundaryFn::constant(2.2, T), 1.0, 3.0});
  s.push_back({BoundaryFn::constant(3.5, T, BoundaryKind::upper_admissible), 0.0, kInf});
  return CorridorModel(std::move(s), {0.5, 0.5}, JumpSpec{3.0});
}

}  // namespace

TEST(Corridors, IndexIsHalfOpenWithClosedTop) {
  const CorridorModel m = four_levels();
  EXPECT_EQ(corridor_index(m, 0.0, 1.0), 0u);
  EXPECT_EQ(corridor_index(m, 0.0, 1.999), 0u);
  EXPECT_EQ(corridor_index(m, 0.0, 2.0), 1u);
  EXPECT_EQ(corridor_index(m, 0.0, 2.5), 2u);
  EXPECT_EQ(corridor_index(m, 0.0, 3.5), 2u);
  EXPECT_THROW(corridor_index(m, 0.0, 0.99), StateError);
  EXPECT_THROW(corridor_index(m, 0.0, 3.51), StateError);
}

TEST(Corridors, LevelInterpolatesNeighbours) {
  const CorridorModel m = four_levels();
  EXPECT_DOUBLE_EQ(corridor_level(m, 0, 0.0), 1.5);
  EXPECT_DOUBLE_EQ(corridor_level(m, 1, 0.0), 2.25);
  EXPECT_DOUBLE_EQ(corridor_level(m, 2, 0.0), 3.0);
  EXPECT_THROW(corridor_level(m, 3, 0.0), UsageError);
}

TEST(Corridors, SegmentedBoundaryLeavesTheStack) {
  const CorridorModel m = segmented(5.0);
  EXPECT_EQ(m.active_at(0.5), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(m.active_at(2.0), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(m.active_at(4.0), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(corridor_index(m, 0.5, 3.0), 0u);
  EXPECT_EQ(corridor_index(m, 2.0, 3.0), 1u);
  // the corridor below 2.2 reaches the top master while 2.2 is out
  EXPECT_DOUBLE_EQ(corridor_level(m, 0, 0.5), 2.25);
  EXPECT_DOUBLE_EQ(corridor_level(m, 0, 2.0), 1.6);
}

TEST(Corridors, ConstructorRejectsBadStacks) {
  const double T = 1.0;
  auto lo = [&] { return StackBoundary{BoundaryFn::constant(1.0, T, BoundaryKind::lower_admissible)}; };
  auto hi = [&] { return StackBoundary{BoundaryFn::constant(3.0, T, BoundaryKind::upper_admissible)}; };
  EXPECT_THROW(CorridorModel({lo()}, {}, {}), ConfigError);
  EXPECT_THROW(CorridorModel({lo(), hi()}, {0.5, 0.5}, {}), ConfigError);
  EXPECT_THROW(CorridorModel({lo(), hi()}, {0.0}, {}), ConfigError);
  EXPECT_THROW(CorridorModel({lo(), hi()}, {1.0}, {}), ConfigError);
  EXPECT_NO_THROW(CorridorModel({lo(), hi()}, {0.5}, {}));

  // internal boundary with a jump
  const BoundaryFn jumpy({{0.0, T, shape::Constant{2.0}}}, {{0.5, 0.1}}, BoundaryKind::upper_admissible);
  EXPECT_THROW(CorridorModel({lo(), {jumpy}, hi()}, {0.5, 0.5}, {}), ConfigError);
  // internal boundary of an admissible kind
  EXPECT_THROW(CorridorModel({lo(), {BoundaryFn::constant(2.0, T, BoundaryKind::lower_admissible)}, hi()},
                             {0.5, 0.5}, {}),
               ConfigError);
  // master that starts late
  EXPECT_THROW(CorridorModel({{BoundaryFn::constant(1.0, T, BoundaryKind::lower_admissible), 0.2}, hi()},
                             {0.5}, {}),
               ConfigError);
  EXPECT_THROW(CorridorModel({lo(), hi()}, {0.5}, {}, ThetaSpec::uniform(), -1.0), ConfigError);
}

TEST(Corridors, FourLevelsValidate) {
  const CorridorReport r = validate_corridor_model(four_levels(), TimeGrid::from_step(1e-3, 10.0));
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.grid_points, 10001u);
}

TEST(Corridors, ValidationFindsOrderingAndDriftFailures) {
  const double T = 1.0;
  const TimeGrid grid = TimeGrid::from_step(0.01, T);
  const StackBoundary lo{BoundaryFn::constant(1.0, T, BoundaryKind::lower_admissible)};
  const StackBoundary hi{BoundaryFn::constant(3.0, T, BoundaryKind::upper_admissible)};

  // internal boundary crosses the top master at t = 0.5
  const CorridorReport order =
      validate_corridor_model(CorridorModel({lo, {BoundaryFn::linear(2.0, 2.0, T)}, hi}, {0.5, 0.5}, {}), grid);
  EXPECT_FALSE(order.ok());
  EXPECT_FALSE(order.ordering.passed);
  ASSERT_TRUE(order.ordering.first);
  EXPECT_NEAR(order.ordering.first->time, 0.5, 1e-12);

  // a fast rising internal boundary outruns the target drift of the corridor above
  const CorridorReport drift =
      validate_corridor_model(CorridorModel({lo, {BoundaryFn::linear(1.5, 1.0, T)}, hi}, {0.5, 0.5}, {}), grid);
  EXPECT_TRUE(drift.ordering.passed);
  EXPECT_FALSE(drift.drift.passed);

  // internal segment end off the grid
  const CorridorReport seg = validate_corridor_model(
      CorridorModel({lo, {BoundaryFn::constant(2.0, T), 0.0, 0.505}, hi}, {0.5, 0.5}, {}), grid);
  EXPECT_TRUE(seg.config_error);
}

TEST(Corridors, SimulationRequiresValidModel) {
  const double T = 1.0;
  const StackBoundary lo{BoundaryFn::constant(1.0, T, BoundaryKind::lower_admissible)};
  const StackBoundary hi{BoundaryFn::constant(3.0, T, BoundaryKind::upper_admissible)};
  const CorridorModel bad({lo, {BoundaryFn::linear(1.5, 1.0, T)}, hi}, {0.5, 0.5}, {});
  EXPECT_THROW(simulate_corridor_path(bad, config(0.01, T, 1, 1.2), RandomSource(1, 0)), ValidationError);
  EXPECT_THROW(simulate_corridor_path(four_levels(), config(0.01, T, 1, 0.5), RandomSource(1, 0)), UsageError);
}

TEST(Corridors, InitialMonitorSelectsStartingCorridor) {
  const CorridorModel m = four_levels();
  for (double x0 : {1.0, 1.7, 2.0, 2.6, 3.5}) {
    const MonitorState ms = initial_monitor(m, x0);
    EXPECT_EQ(monitored_corridor(ms, m), corridor_index(m, 0.0, x0)) << x0;
  }
  EXPECT_DOUBLE_EQ(corridor_target(initial_monitor(m, 2.7), m), 3.0);
  MonitorState ms = update_monitor(initial_monitor(m, 1.5), m, 0.2, 3.0, true);
  EXPECT_EQ(monitored_corridor(ms, m), 2u);
  EXPECT_EQ(ms.last_jump_time, 0.2);
  EXPECT_THROW(update_monitor(ms, m, 0.1, 3.0, false), UsageError);
}

// Replaying the monitor along a recorded path reproduces the tracked corridor
// and the monitor history of the engine.
TEST(CorridorProperty, MonitorReplayReproducesEngine) {
  const CorridorModel m = four_levels(4.0);
  gen::Gen g(404);
  for (int c = 0; c < 20; ++c) {
    SCOPED_TRACE(c);
    const SimConfig cfg = config(1e-3, 3.0, 1, g.uniform(1.0, 3.5), 600 + c);
    const CorridorPath cp = simulate_corridor_path(m, cfg, RandomSource(cfg.seed, 0));
    const PathSample& p = cp.path;
    ASSERT_EQ(cp.corridor.size(), p.values.size());
    MonitorState ms = initial_monitor(m, p.values[0]);
    std::vector<MonitorState> hist{ms};
    EXPECT_EQ(monitored_corridor(ms, m), cp.corridor[0]);
    for (std::size_t k = 1; k < p.values.size(); ++k) {
      if (p.jump_flags[k]) {
        ms = update_monitor(ms, m, p.times[k], p.values[k], true);
        hist.push_back(ms);
      }
      ASSERT_EQ(monitored_corridor(ms, m), cp.corridor[k]) << "k=" << k;
    }
    EXPECT_EQ(hist, cp.history);
  }
}

TEST(CorridorProperty, ReplayAcrossStackChanges) {
  const CorridorModel m = segmented(5.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SimConfig cfg = config(1e-3, 5.0, 1, 2.4, seed);
    const CorridorPath cp = simulate_corridor_path(m, cfg, RandomSource(seed, 0));
    const PathSample& p = cp.path;
    MonitorState ms = initial_monitor(m, p.values[0]);
    for (std::size_t k = 1; k < p.values.size(); ++k) {
      ms = update_monitor(ms, m, p.times[k], p.values[k], p.jump_flags[k] != 0);
      ASSERT_EQ(monitored_corridor(ms, m), cp.corridor[k]) << "seed " << seed << " k=" << k;
    }
  }
}

// Corridor confinement: inside the masters always, inside the tracked
// corridor between jumps, and corridor changes only at jumps.
TEST(CorridorProperty, ConfinementBetweenJumps) {
  const CorridorModel m = four_levels();
  gen::Gen g(505);
  for (int c = 0; c < 30; ++c) {
    SCOPED_TRACE(c);
    const SimConfig cfg = config(1e-3, 2.0, 1, g.uniform(1.0, 3.5), 700 + c);
    const CorridorPath cp = simulate_corridor_path(m, cfg, RandomSource(cfg.seed, 0));
    const PathSample& p = cp.path;
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      ASSERT_GE(p.values[k], 1.0);
      ASSERT_LE(p.values[k], 3.5);
      const std::size_t j = cp.corridor[k];
      const double lo = m.stack()[j].fn.eval(p.times[k]);
      const double hi = m.stack()[j + 1].fn.eval(p.times[k]);
      ASSERT_GE(p.values[k], lo);
      if (j + 1 == m.top()) {
        ASSERT_LE(p.values[k], hi);
      } else {
        ASSERT_LT(p.values[k], hi);
      }
      if (k > 0 && !p.jump_flags[k]) {
        ASSERT_EQ(cp.corridor[k], cp.corridor[k - 1]);
      }
    }
  }
}

TEST(Corridors, OccupancyOfHandBuiltPath) {
  const CorridorModel m = four_levels();
  CorridorPath cp;
  cp.path.times = {0.0, 0.1, 0.2, 0.3, 0.4};
  cp.path.values = {1.5, 1.6, 3.0, 3.1, 2.2};
  cp.path.jump_flags = {0, 0, 1, 0, 1};
  cp.corridor = {0, 0, 2, 2, 1};
  const std::vector<CorridorPath> paths{cp};
  const CorridorOccupancy occ = corridor_occupancy(paths, m);
  EXPECT_EQ(occ.changes, 2u);
  EXPECT_EQ(occ.skips, 1u);
  EXPECT_EQ(occ.off_jump_changes, 0u);
  EXPECT_EQ(occ.transitions[0][2], 1u);
  EXPECT_EQ(occ.transitions[2][1], 1u);
  EXPECT_DOUBLE_EQ(occ.time_fraction[0], 0.4);
  EXPECT_DOUBLE_EQ(occ.time_fraction[1], 0.2);
  EXPECT_DOUBLE_EQ(occ.time_fraction[2], 0.4);

  // without a corridor column the position decides; an unflagged change counts
  CorridorPath bare = cp;
  bare.corridor.clear();
  bare.path.jump_flags = {0, 0, 0, 0, 1};
  const std::vector<CorridorPath> b{bare};
  const CorridorOccupancy ob = corridor_occupancy(b, m);
  EXPECT_EQ(ob.off_jump_changes, 1u);
  EXPECT_EQ(ob.changes, 1u);
}

TEST(Corridors, EnsembleIsThreadInvariantAndSkips) {
  const CorridorModel m = four_levels();
  SimConfig cfg = config(1e-3, 5.0, 300, 1.5, 7);
  EnsembleOptions one, many;
  one.threads = 1;
  many.threads = 3;
  one.keep_paths = many.keep_paths = 3;
  const CorridorEnsemble a = run_corridor_ensemble(m, cfg, one);
  const CorridorEnsemble b = run_corridor_ensemble(m, cfg, many);
  EXPECT_EQ(a.final_values, b.final_values);
  EXPECT_EQ(a.stats.mean, b.stats.mean);
  EXPECT_EQ(a.occupancy.changes, b.occupancy.changes);
  ASSERT_EQ(a.paths.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.paths[i].path.values, b.paths[i].path.values);
  EXPECT_EQ(a.captivity_violations, 0u);
  EXPECT_EQ(a.occupancy.off_jump_changes, 0u);
  EXPECT_GT(a.occupancy.skips, 0u);

  // kept path 0 equals the single-path engine
  const CorridorPath p0 = simulate_corridor_path(m, cfg, RandomSource(7, 0));
  EXPECT_EQ(p0.path.values, a.paths[0].path.values);
  EXPECT_EQ(p0.corridor, a.paths[0].corridor);
}

TEST(Corridors, ProbeCountsAreAdditive) {
  const CorridorModel m = four_levels();
  const SimConfig cfg = config(1e-3, 2.0, 1, 1.5, 11);
  const ProbeSpec pr{0, 2, 1.8, 2.0};
  const TransitionCounts all = probe_transitions(m, cfg, pr, 0, 40, 2);
  const TransitionCounts a = probe_transitions(m, cfg, pr, 0, 25, 1);
  const TransitionCounts b = probe_transitions(m, cfg, pr, 25, 15, 1);
  EXPECT_EQ(all.paths, 40u);
  EXPECT_EQ(all.steps, a.steps + b.steps);
  EXPECT_EQ(all.jumps, a.jumps + b.jumps);
  EXPECT_EQ(all.landed, a.landed + b.landed);
  EXPECT_GT(all.steps, 0u);
  EXPECT_LE(all.landed, all.jumps);
}
