#include "captive/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "captive/error.hpp"

namespace captive {

std::vector<Point2> to_cartesian(std::span<const double> radius, std::span<const double> angle) {
  if (radius.size() != angle.size()) {
    throw ConfigError("radius and angle lengths differ (" + std::to_string(radius.size()) +
                      " vs " + std::to_string(angle.size()) + ")");
  }
  std::vector<Point2> out(radius.size());
  for (std::size_t i = 0; i < radius.size(); ++i) {
    out[i] = {radius[i] * std::cos(angle[i]), radius[i] * std::sin(angle[i])};
  }
  return out;
}

std::vector<std::size_t> annulus_check(const PolarTrajectory& traj, double a, double d,
                                       double tol) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const double r = std::hypot(traj.points[i][0], traj.points[i][1]);
    if (r < a - tol || r > d + tol || std::isnan(r)) out.push_back(i);
  }
  return out;
}

CaptiveModel PolarCoordinate::model(double horizon) const {
  return CaptiveModel{CoefficientSet::mean_reverting(kappa, beta, alpha, theta),
                      BoundaryFn::constant(lo, horizon, BoundaryKind::lower_admissible),
                      BoundaryFn::constant(hi, horizon, BoundaryKind::upper_admissible), jumps};
}

double PolarModel::inner() const {
  if (corridors) return corridors->stack().front().fn.eval(0.0);
  if (radial) return radial->lo;
  throw ConfigError("polar model has no radial coordinate");
}

double PolarModel::outer() const {
  if (corridors) return corridors->stack().back().fn.eval(0.0);
  if (radial) return radial->hi;
  throw ConfigError("polar model has no radial coordinate");
}

RadialHistogram radial_histogram(std::span<const PolarTrajectory> trajs, double a, double d,
                                 std::size_t bins) {
  if (bins == 0 || !(a < d)) throw ConfigError("radial histogram needs bins >= 1 and a < d");
  RadialHistogram h;
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(a + (d - a) * static_cast<double>(b) / static_cast<double>(bins));
  }
  std::size_t total = 0;
  for (const PolarTrajectory& t : trajs) {
    for (double r : t.radius) {
      const double u = (r - a) / (d - a) * static_cast<double>(bins);
      const std::size_t b = u <= 0.0 ? 0 : std::min(bins - 1, static_cast<std::size_t>(u));
      ++h.counts[b];
      ++total;
    }
  }
  h.fraction.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    h.fraction[b] = total > 0 ? static_cast<double>(h.counts[b]) / static_cast<double>(total) : 0.0;
  }
  return h;
}

PolarEnsemble run_polar(const PolarModel& model, const SimConfig& cfg, double phi0,
                        std::size_t hist_bins, std::size_t threads) {
  if (model.radial.has_value() == model.corridors.has_value()) {
    throw ConfigError("polar model needs exactly one of a radial coordinate or corridors");
  }
  if (!(model.rho >= -1.0 && model.rho <= 1.0)) throw ConfigError("rho must lie in [-1, 1]");
  const JumpSpec& rj = model.corridors ? model.corridors->jumps() : model.radial->jumps;
  if (model.angle.jumps.correlation != JumpCorrelation::independent &&
      model.angle.jumps.intensity != rj.intensity) {
    throw ConfigError("correlated jump processes need equal intensities");
  }

  SimConfig acfg = cfg;
  acfg.x0 = phi0;
  EnsembleOptions aopts;
  aopts.keep_paths = cfg.n_paths;
  aopts.threads = threads;
  aopts.coordinate = 2;
  aopts.rho = model.rho;
  const TimeGrid grid = cfg.grid();
  const ValidatedModel av = validate(model.angle.model(cfg.horizon), grid);
  EnsembleSummary ang = run_ensemble(av, acfg, aopts);

  EnsembleOptions ropts;
  ropts.keep_paths = cfg.n_paths;
  ropts.threads = threads;
  PolarEnsemble out;
  std::vector<PathSample> radial;
  std::vector<std::vector<std::size_t>> corridor;
  if (model.corridors) {
    CorridorEnsemble ce = run_corridor_ensemble(*model.corridors, cfg, ropts);
    out.radial_violations = ce.captivity_violations;
    out.radial_jumps = ce.jumps;
    for (CorridorPath& cp : ce.paths) {
      radial.push_back(std::move(cp.path));
      corridor.push_back(std::move(cp.corridor));
    }
  } else {
    const ValidatedModel rv = validate(model.radial->model(cfg.horizon), grid);
    EnsembleSummary rs = run_ensemble(rv, cfg, ropts);
    out.radial_violations = rs.captivity_violations;
    out.radial_jumps = rs.jumps;
    radial = std::move(rs.paths);
  }
  out.angular_violations = ang.captivity_violations;
  out.angular_jumps = ang.jumps;

  out.trajectories.resize(radial.size());
  for (std::size_t i = 0; i < radial.size(); ++i) {
    PolarTrajectory& t = out.trajectories[i];
    t.path_index = radial[i].path_index;
    t.times = radial[i].times;
    t.radius = std::move(radial[i].values);
    t.angle = std::move(ang.paths[i].values);
    t.radial_jumps = std::move(radial[i].jump_flags);
    t.angular_jumps = std::move(ang.paths[i].jump_flags);
    if (!corridor.empty()) t.corridor = std::move(corridor[i]);
    t.points = to_cartesian(t.radius, t.angle);
  }
  out.histogram = radial_histogram(out.trajectories, model.inner(), model.outer(), hist_bins);
  return out;
}

}  // namespace captive
