#include "captive/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "captive/error.hpp"

namespace captive {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_const_zero(const BoundaryFn& f) { return f.is_constant() && f.eval(0.0) == 0.0; }

double theta_min(double x, double gl, double gu, double theta) {
  return theta * std::min(x - gl, gu - x);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

void ThetaSpec::validate() const {
  switch (kind) {
    case Kind::none:
      return;
    case Kind::constant:
      if (!(value >= -1.0 && value <= 1.0)) throw ConfigError("theta must lie in [-1, 1]");
      if (value == 0.0) throw ConfigError("theta = 0 is excluded; use no jump part instead");
      return;
    case Kind::uniform:
      if (!(lo >= -1.0 && hi <= 1.0 && lo < hi)) {
        throw ConfigError("uniform theta support must satisfy -1 <= lo < hi <= 1");
      }
      return;
  }
}

double ThetaSpec::sample(const RandomSource& src, Stream stream, std::uint64_t ordinal) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::constant:
      return value;
    case Kind::uniform:
      for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
        const double th = lo + (hi - lo) * src.uniform(stream, ordinal * 16 + attempt);
        if (th != 0.0) return th;
      }
      return hi;
  }
  return 0.0;
}

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::mean_reverting:
      return "mean-reverting";
    case Family::bounded_map:
      return "bounded-map";
    case Family::pure_jump:
      return "pure-jump";
    case Family::zero:
      return "zero";
    case Family::custom:
      return "custom";
    case Family::composed:
      return "composed";
  }
  return "unknown";
}

CoefficientSet CoefficientSet::mean_reverting(double kappa, double beta, double alpha,
                                              ThetaSpec theta) {
  return mean_reverting(BoundaryFn::constant(kappa), BoundaryFn::constant(beta),
                        BoundaryFn::constant(alpha), theta);
}

CoefficientSet CoefficientSet::mean_reverting(BoundaryFn kappa, BoundaryFn beta, BoundaryFn alpha,
                                              ThetaSpec theta) {
  theta.validate();
  return CoefficientSet(family::MeanReverting{std::move(kappa), std::move(beta),
                                              std::move(alpha), theta});
}

CoefficientSet CoefficientSet::trigonometric(const std::string& variant) {
  if (variant != "sin" && variant != "cos") {
    throw ConfigError("trigonometric variant must be sin or cos");
  }
  return bounded(std::make_shared<const BoundedMap>(builtin_bounded_map(variant)));
}

CoefficientSet CoefficientSet::bounded(std::shared_ptr<const BoundedMap> map) {
  if (!map) throw ConfigError("bounded-map family needs a map");
  return CoefficientSet(family::Bounded{std::move(map)});
}

CoefficientSet CoefficientSet::pure_jump(ThetaSpec theta) {
  theta.validate();
  if (!theta.active()) throw ConfigError("pure-jump family needs a theta distribution");
  return CoefficientSet(family::PureJump{theta});
}

CoefficientSet CoefficientSet::zero() { return CoefficientSet(family::Zero{}); }

CoefficientSet CoefficientSet::custom(family::Custom c) {
  c.theta.validate();
  if (c.jump && !c.theta.active()) {
    throw ConfigError("custom jump coefficient given without a theta distribution");
  }
  return CoefficientSet(std::move(c));
}

Family CoefficientSet::family() const noexcept {
  return static_cast<Family>(v_.index());
}

std::string CoefficientSet::name() const {
  return std::visit(Overloaded{
                        [](const family::MeanReverting&) { return std::string("mean-reverting"); },
                        [](const family::Bounded& b) { return "bounded-map(" + b.map->name + ")"; },
                        [](const family::PureJump&) { return std::string("pure-jump"); },
                        [](const family::Zero&) { return std::string("zero"); },
                        [](const family::Custom& c) {
                          return c.description.empty() ? std::string("custom")
                                                       : "custom(" + c.description + ")";
                        },
                        [](const family::Composed& c) {
                          return "composed(" + c.continuous->name() + " + " + c.jump->name() +
                                 ")";
                        },
                    },
                    v_);
}

void CoefficientSet::check_state(double x, double gl, double gu) const {
  if (!(x >= gl - state_tol_ && x <= gu + state_tol_)) {
    std::ostringstream os;
    os.precision(17);
    os << "state x = " << x << " outside [" << gl << ", " << gu << "]";
    throw StateError(os.str());
  }
}

const BoundedMap* CoefficientSet::bounded_map() const noexcept {
  if (const auto* b = std::get_if<family::Bounded>(&v_)) return b->map.get();
  if (const auto* c = std::get_if<family::Composed>(&v_)) return c->continuous->bounded_map();
  return nullptr;
}

double CoefficientSet::drift(double t, double x, double gl, double gu) const {
  check_state(x, gl, gu);
  return std::visit(
      Overloaded{
          [&](const family::MeanReverting& m) { return m.kappa.eval(t) * (m.beta.eval(t) - x); },
          [&](const family::Bounded& b) {
            const double xc = std::clamp(x, b.map->a, b.map->b);
            return 0.5 * (b.map->f2_of_x ? b.map->f2_of_x(xc) : b.map->f2(b.map->f_inv(xc)));
          },
          [](const family::PureJump&) { return 0.0; },
          [](const family::Zero&) { return 0.0; },
          [&](const family::Custom& c) { return c.drift ? c.drift(t, x, gl, gu) : 0.0; },
          [&](const family::Composed& c) { return c.continuous->drift(t, x, gl, gu); },
      },
      v_);
}

double CoefficientSet::vol(double t, double x, double gl, double gu) const {
  check_state(x, gl, gu);
  return std::visit(
      Overloaded{
          [&](const family::MeanReverting& m) { return m.alpha.eval(t) * (x - gl) * (gu - x); },
          [&](const family::Bounded& b) {
            const double xc = std::clamp(x, b.map->a, b.map->b);
            return b.map->f1_of_x ? b.map->f1_of_x(xc) : b.map->f1(b.map->f_inv(xc));
          },
          [](const family::PureJump&) { return 0.0; },
          [](const family::Zero&) { return 0.0; },
          [&](const family::Custom& c) { return c.vol ? c.vol(t, x, gl, gu) : 0.0; },
          [&](const family::Composed& c) { return c.continuous->vol(t, x, gl, gu); },
      },
      v_);
}

double CoefficientSet::vol_branch(double t, double x, double gl, double gu, double phase) const {
  const BoundedMap* m = bounded_map();
  const double v = vol(t, x, gl, gu);
  if (m == nullptr) return v;
  const int s = sign_of(m->f1(phase));
  return s == 0 ? 0.0 : std::abs(v) * s;
}

double CoefficientSet::jump_coeff(double t_minus, double x_minus, double gl_minus,
                                  double gu_minus, double theta) const {
  check_state(x_minus, gl_minus, gu_minus);
  return std::visit(
      Overloaded{
          [&](const family::MeanReverting& m) {
            return m.theta.active() ? theta_min(x_minus, gl_minus, gu_minus, theta) : 0.0;
          },
          [](const family::Bounded&) { return 0.0; },
          [&](const family::PureJump&) { return theta_min(x_minus, gl_minus, gu_minus, theta); },
          [](const family::Zero&) { return 0.0; },
          [&](const family::Custom& c) {
            if (!c.theta.active()) return 0.0;
            return c.jump ? c.jump(t_minus, x_minus, gl_minus, gu_minus, theta)
                          : theta_min(x_minus, gl_minus, gu_minus, theta);
          },
          [&](const family::Composed& c) {
            return c.jump->jump_coeff(t_minus, x_minus, gl_minus, gu_minus, theta);
          },
      },
      v_);
}

const ThetaSpec& CoefficientSet::theta() const noexcept {
  static const ThetaSpec kNone{};
  return std::visit(Overloaded{
                        [](const family::MeanReverting& m) -> const ThetaSpec& { return m.theta; },
                        [](const family::Bounded&) -> const ThetaSpec& { return kNone; },
                        [](const family::PureJump& p) -> const ThetaSpec& { return p.theta; },
                        [](const family::Zero&) -> const ThetaSpec& { return kNone; },
                        [](const family::Custom& c) -> const ThetaSpec& { return c.theta; },
                        [](const family::Composed& c) -> const ThetaSpec& {
                          return c.jump->theta();
                        },
                    },
                    v_);
}

bool CoefficientSet::drift_is_zero() const noexcept {
  return std::visit(Overloaded{
                        [](const family::MeanReverting& m) { return is_const_zero(m.kappa); },
                        [](const family::Bounded&) { return false; },
                        [](const family::PureJump&) { return true; },
                        [](const family::Zero&) { return true; },
                        [](const family::Custom& c) { return !c.drift; },
                        [](const family::Composed& c) { return c.continuous->drift_is_zero(); },
                    },
                    v_);
}

bool CoefficientSet::vol_is_zero() const noexcept {
  return std::visit(Overloaded{
                        [](const family::MeanReverting& m) { return is_const_zero(m.alpha); },
                        [](const family::Bounded&) { return false; },
                        [](const family::PureJump&) { return true; },
                        [](const family::Zero&) { return true; },
                        [](const family::Custom& c) { return !c.vol; },
                        [](const family::Composed& c) { return c.continuous->vol_is_zero(); },
                    },
                    v_);
}

bool CoefficientSet::jump_is_zero() const noexcept { return !theta().active(); }

double CoefficientSet::phase_init(double x0) const {
  const BoundedMap* m = bounded_map();
  if (m == nullptr) return 0.0;
  return m->f_inv(std::clamp(x0, m->a, m->b));
}

double CoefficientSet::phase_reset(double x, double phase) const {
  const BoundedMap* m = bounded_map();
  if (m == nullptr) return 0.0;
  const double xc = std::clamp(x, m->a, m->b);
  const double y = m->f_inv(xc);
  const int want = sign_of(m->f1(phase));
  if (want == 0 || sign_of(m->f1(y)) == want || !m->f_inv_alt) return y;
  return m->f_inv_alt(xc);
}

CoefficientSet CoefficientSet::with_state_tolerance(double tol) const {
  if (!(tol >= 0.0)) throw ConfigError("state tolerance must be >= 0");
  CoefficientSet c = *this;
  c.state_tol_ = tol;
  return c;
}

const family::MeanReverting* CoefficientSet::mean_reverting_params() const noexcept {
  return std::get_if<family::MeanReverting>(&v_);
}

CoefficientSet compose(const CoefficientSet& continuous_part, const CoefficientSet& jump_part,
                       const BoundaryFn& outer_lower, const BoundaryFn& outer_upper,
                       const BoundaryFn& inner_lower, const BoundaryFn& inner_upper,
                       const TimeGrid& grid) {
  if (!continuous_part.jump_is_zero()) {
    throw ConfigError("continuous part of a composition must have gamma == 0");
  }
  if (!jump_part.drift_is_zero() || !jump_part.vol_is_zero()) {
    throw ConfigError("jump part of a composition must have mu == sigma == 0");
  }
  const ThetaSpec& th = jump_part.theta();
  if (!th.active()) throw ConfigError("jump part of a composition needs theta != 0");
  th.validate();
  for (std::size_t k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    if (inner_lower.eval(t) < outer_lower.eval(t) || inner_upper.eval(t) > outer_upper.eval(t)) {
      throw ConfigError("inner boundaries of a composition leave the outer pair at t = " +
                        std::to_string(t));
    }
  }
  CoefficientSet out(family::Composed{std::make_shared<const CoefficientSet>(continuous_part),
                                      std::make_shared<const CoefficientSet>(jump_part)});
  out.state_tol_ = continuous_part.state_tolerance();
  return out;
}

namespace {

void fail(ConditionCheck& c, std::size_t k, double t, double x, double value, double bound,
          std::string detail) {
  if (!c.passed) return;
  c.passed = false;
  c.first = Counterexample{k, t, x, value, bound, std::move(detail)};
}

void check_parameters(const CoefficientSet& cs, const BoundaryFn& lower, const BoundaryFn& upper,
                      const TimeGrid& grid, ConditionCheck& out) {
  std::visit(
      Overloaded{
          [&](const family::MeanReverting& m) {
            for (std::size_t k = 0; k < grid.points() && out.passed; ++k) {
              const double t = grid.time(k);
              const double kappa = m.kappa.eval(t);
              const double beta = m.beta.eval(t);
              const double alpha = m.alpha.eval(t);
              if (!(kappa >= 0.0)) {
                fail(out, k, t, 0.0, kappa, 0.0, "kappa must be >= 0");
              } else if (!std::isfinite(alpha)) {
                fail(out, k, t, 0.0, alpha, 0.0, "alpha must be finite");
              } else if (kappa > 0.0) {
                const double gl = lower.eval(t);
                const double gu = upper.eval(t);
                if (!(beta > gl)) fail(out, k, t, 0.0, beta, gl, "beta must exceed the lower boundary");
                else if (!(beta < gu)) fail(out, k, t, 0.0, beta, gu, "beta must stay below the upper boundary");
              }
            }
          },
          [&](const family::Bounded& b) {
            const auto v = b.map->violations();
            if (!v.empty()) fail(out, 0, 0.0, 0.0, 0.0, 0.0, "bounded map: " + v.front());
          },
          [](const family::PureJump&) {},
          [](const family::Zero&) {},
          [](const family::Custom&) {},
          [&](const family::Composed& c) {
            check_parameters(*c.continuous, lower, upper, grid, out);
            check_parameters(*c.jump, lower, upper, grid, out);
          },
      },
      cs.params());
}

}  // namespace

AdmissibilityReport check_admissibility(const CoefficientSet& cs, const BoundaryFn& lower,
                                        const BoundaryFn& upper, const TimeGrid& grid) {
  AdmissibilityReport r;
  r.family = cs.name();
  r.grid_points = grid.points();
  r.x_samples = kJumpSamples;
  r.vol_tolerance = kVolTolerance;
  r.drift_slack = kDriftSlack;

  try {
    cs.theta().validate();
  } catch (const ConfigError& e) {
    fail(r.parameters, 0, 0.0, 0.0, 0.0, 0.0, e.what());
  }
  check_parameters(cs, lower, upper, grid, r.parameters);

  const bool jumps = !cs.jump_is_zero();
  const double th_lo = cs.theta().support_lo();
  const double th_hi = cs.theta().support_hi();

  for (std::size_t k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    const double gl = lower.eval(t);
    const double gu = upper.eval(t);
    const double gll = k > 0 ? lower.eval_left(t) : gl;
    const double gul = k > 0 ? upper.eval_left(t) : gu;
    const double dgl = lower.right_derivative(t) + (gl - gll);
    const double dgu = upper.right_derivative(t) + (gu - gul);

    if (r.drift.passed) {
      const double ml = cs.drift(t, gll, gl, gu);
      if (!(ml >= dgl - kDriftSlack)) {
        fail(r.drift, k, t, gll, ml, dgl, "drift at the lower boundary does not point inward");
      }
      const double mu = cs.drift(t, gul, gl, gu);
      if (!(mu <= dgu + kDriftSlack)) {
        fail(r.drift, k, t, gul, mu, dgu, "drift at the upper boundary does not point inward");
      }
    }

    if (r.vol.passed) {
      const auto check_vol = [&](double x, double a, double b, const char* what) {
        const double s = cs.vol(t, x, a, b);
        if (!(std::abs(s) <= kVolTolerance)) fail(r.vol, k, t, x, s, kVolTolerance, what);
      };
      check_vol(gl, gl, gu, "volatility does not vanish at the lower boundary");
      check_vol(gu, gl, gu, "volatility does not vanish at the upper boundary");
      if (gll != gl || gul != gu) {
        check_vol(gll, gll, gul, "volatility does not vanish at the lower left limit");
        check_vol(gul, gll, gul, "volatility does not vanish at the upper left limit");
      }
    }

    if (jumps && r.jump.passed) {
      for (std::size_t i = 0; i < kJumpSamples && r.jump.passed; ++i) {
        const double x = i + 1 == kJumpSamples
                             ? gul
                             : gll + (gul - gll) * static_cast<double>(i) /
                                         static_cast<double>(kJumpSamples - 1);
        for (double th : {th_lo, th_hi}) {
          const double g = cs.jump_coeff(t, x, gll, gul, th);
          if (!(g >= gll - x - kDriftSlack)) {
            fail(r.jump, k, t, x, g, gll - x, "jump can leave through the lower boundary");
          } else if (!(g <= gul - x + kDriftSlack)) {
            fail(r.jump, k, t, x, g, gul - x, "jump can leave through the upper boundary");
          }
        }
      }
    }
    if (!r.drift.passed && !r.vol.passed && (!jumps || !r.jump.passed)) break;
  }
  return r;
}

}  // namespace captive
