#include "kepreg/kepler.hpp"

#include <cmath>
#include <numbers>
#include <type_traits>

#include "kepreg/errors.hpp"

namespace kepreg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

void check_physical(const Eigen::VectorXd& q, const ForcingSpec& forcing, double floor) {
  const double r = q.norm();
  if (r < floor) throw CollisionProximity("|q| = " + std::to_string(r) + " below collision floor");
  if (r >= forcing.rho()) throw OutsideDomain("|q| = " + std::to_string(r) + " outside forcing domain");
}

// Planar elements in a frame where the angular momentum is positive.
struct PlanarElements {
  double a, e, g, l;
};

PlanarElements planar_from_direct(const Eigen::Vector2d& q, const Eigen::Vector2d& p) {
  const double r = q.norm();
  const double v2 = p.squaredNorm();
  const double energy = 0.5 * v2 - 1.0 / r;
  if (energy >= 0.0) throw HyperbolicOrParabolic("Kepler energy is nonnegative");
  const double a = -0.5 / energy;
  const double rv = q.dot(p);
  const Eigen::Vector2d ev = (v2 - 1.0 / r) * q - rv * p;
  const double e = ev.norm();
  PlanarElements el{a, e, 0.0, 0.0};
  if (e < 1e-14) {
    el.e = 0.0;
    el.l = wrap_angle(std::atan2(q.y(), q.x()));
    return el;
  }
  el.g = wrap_angle(std::atan2(ev.y(), ev.x()));
  const double cos_e = (1.0 - r / a) / e;
  const double sin_e = rv / (e * std::sqrt(a));
  const double ecc_anomaly = std::atan2(sin_e, cos_e);
  el.l = wrap_angle(ecc_anomaly - e * std::sin(ecc_anomaly));
  return el;
}

// Position and velocity in the perifocal frame.
void perifocal(double a, double e, double mean_anomaly, Eigen::Vector2d& x, Eigen::Vector2d& v) {
  const double ecc = solve_kepler_equation(mean_anomaly, e);
  const double ce = std::cos(ecc), se = std::sin(ecc);
  const double b = a * std::sqrt(1.0 - e * e);
  const double edot = std::pow(a, -1.5) / (1.0 - e * ce);
  x = {a * (ce - e), b * se};
  v = {-a * se * edot, b * ce * edot};
}

}  // namespace

double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

double OrbitalElements::period() const { return kTwoPi * std::pow(a, 1.5); }
double OrbitalElements::mean_motion() const { return std::pow(a, -1.5); }

CartesianExtState cartesian_vector_field(const CartesianExtState& s, const ForcingSpec& forcing,
                                         double collision_floor) {
  check_physical(s.q, forcing, collision_floor);
  const double r = s.q.norm();
  CartesianExtState d;
  d.q = s.p;
  d.p = -s.q / (r * r * r);
  d.t = 1.0;
  d.tau = 0.0;
  if (!forcing.inactive()) {
    const ForcingJet j = forcing.jet(s.q, s.t, 1);
    d.p -= forcing.epsilon() * j.grad;
    d.tau = -forcing.epsilon() * j.dt;
  }
  return d;
}

double eval_energy(const CartesianExtState& s, const ForcingSpec& forcing) {
  const double r = s.q.norm();
  if (r == 0.0) throw CollisionPoint("energy undefined at q = 0");
  double e = 0.5 * s.p.squaredNorm() - 1.0 / r;
  if (!forcing.inactive()) e += forcing.epsilon() * forcing.value(s.q, s.t);
  return e;
}

double extended_energy(const CartesianExtState& s, const ForcingSpec& forcing) {
  return eval_energy(s, forcing) + s.tau;
}

double solve_kepler_equation(double mean_anomaly, double e) {
  if (!(e >= 0.0 && e < 1.0)) throw InvalidArgument("eccentricity must lie in [0,1)");
  const double turns = std::floor((mean_anomaly + kPi) / kTwoPi);
  const double m = mean_anomaly - turns * kTwoPi;  // in [-pi, pi)
  double lo = m - e, hi = m + e;
  double x = m + e * std::sin(m);
  x = std::clamp(x, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double f = x - e * std::sin(x) - m;
    if (std::abs(f) <= 1e-15 * std::max(1.0, std::abs(m))) return x + turns * kTwoPi;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    const double fp = 1.0 - e * std::cos(x);
    double next = x - f / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x)) || hi - lo < 1e-15) {
      return next + turns * kTwoPi;
    }
    x = next;
  }
  throw NoConvergence("Kepler equation solver did not converge");
}

CartesianExtState state_from_elements(const OrbitalElements& el) {
  if (!(el.a > 0.0)) throw InvalidArgument("semimajor axis must be positive");
  Eigen::Vector2d x, v;
  perifocal(el.a, el.e, el.l, x, v);
  CartesianExtState s;
  s.tau = 0.5 / el.a;
  if (el.dim == 2) {
    const double sense = el.inclination > 0.5 * kPi ? -1.0 : 1.0;
    const double c = std::cos(el.g), sn = std::sin(el.g);
    Eigen::Matrix2d r;
    r << c, -sn, sn, c;
    s.q = r * Eigen::Vector2d(x.x(), sense * x.y());
    s.p = r * Eigen::Vector2d(v.x(), sense * v.y());
  } else if (el.dim == 3) {
    const Eigen::Matrix3d r = rot_z(el.node) * rot_x(el.inclination) * rot_z(el.g);
    s.q = r * Eigen::Vector3d(x.x(), x.y(), 0.0);
    s.p = r * Eigen::Vector3d(v.x(), v.y(), 0.0);
  } else {
    throw InvalidArgument("orbital elements are defined for dimension 2 or 3");
  }
  return s;
}

CartesianExtState kepler_solve(const OrbitalElements& el, double t) {
  OrbitalElements moved = el;
  moved.l = el.l + el.mean_motion() * t;
  CartesianExtState s = state_from_elements(moved);
  s.t = t;
  return s;
}

OrbitalElements elements_from_state(const CartesianExtState& s) {
  const int d = s.dim();
  const double r = s.q.norm();
  if (r == 0.0) throw CollisionPoint("elements undefined at q = 0");
  OrbitalElements el;
  el.dim = d;
  if (d == 2) {
    const double h = s.q.x() * s.p.y() - s.q.y() * s.p.x();
    if (std::abs(h) <= 1e-14 * r * std::max(s.p.norm(), 1e-300))
      throw RectilinearOrbit("zero angular momentum");
    const double sense = h > 0.0 ? 1.0 : -1.0;
    const Eigen::Vector2d q(s.q.x(), sense * s.q.y());
    const Eigen::Vector2d p(s.p.x(), sense * s.p.y());
    const PlanarElements pe = planar_from_direct(q, p);
    el.a = pe.a;
    el.e = pe.e;
    el.l = pe.l;
    el.g = sense > 0.0 ? pe.g : wrap_angle(-pe.g);
    el.inclination = sense > 0.0 ? 0.0 : kPi;
    return el;
  }
  if (d != 3) throw InvalidArgument("orbital elements are defined for dimension 2 or 3");
  const Eigen::Vector3d q = s.q, p = s.p;
  const Eigen::Vector3d h = q.cross(p);
  if (h.norm() <= 1e-14 * r * std::max(p.norm(), 1e-300))
    throw RectilinearOrbit("zero angular momentum");
  el.inclination = std::acos(std::clamp(h.z() / h.norm(), -1.0, 1.0));
  const double nodal = std::hypot(h.x(), h.y());
  el.node = nodal > 1e-14 * h.norm() ? wrap_angle(std::atan2(h.x(), -h.y())) : 0.0;
  const Eigen::Matrix3d frame = rot_z(el.node) * rot_x(el.inclination);
  const Eigen::Vector3d qp = frame.transpose() * q, pp = frame.transpose() * p;
  const PlanarElements pe =
      planar_from_direct(Eigen::Vector2d(qp.x(), qp.y()), Eigen::Vector2d(pp.x(), pp.y()));
  el.a = pe.a;
  el.e = pe.e;
  el.g = pe.g;
  el.l = pe.l;
  return el;
}

std::unique_ptr<HamiltonianSystem> cartesian_system(const ForcingSpec& forcing, double collision_floor) {
  const int d = forcing.dim();
  auto f = [forcing, d, collision_floor](const auto* x) {
    using S = std::remove_cv_t<std::remove_pointer_t<decltype(x)>>;
    S r2 = x[0] * x[0];
    S p2 = x[d + 1] * x[d + 1];
    for (int i = 1; i < d; ++i) {
      r2 = r2 + x[i] * x[i];
      p2 = p2 + x[d + 1 + i] * x[d + 1 + i];
    }
    const double r = std::sqrt(value_of(r2));
    if (r < collision_floor) throw CollisionProximity("|q| below collision floor");
    if (r >= forcing.rho()) throw OutsideDomain("|q| outside forcing domain");
    return 0.5 * p2 - 1.0 / sqrt(r2) + compose_forcing<S>(forcing, x, x[d]) + x[2 * d + 1];
  };
  using F = decltype(f);
  return std::make_unique<JetHamiltonian<F>>(d + 1, std::move(f));
}

Eigen::VectorXd pack_cartesian(const CartesianExtState& s) {
  const int d = s.dim();
  Eigen::VectorXd x(2 * d + 2);
  x.head(d) = s.q;
  x[d] = s.t;
  x.segment(d + 1, d) = s.p;
  x[2 * d + 1] = s.tau;
  return x;
}

CartesianExtState unpack_cartesian(const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size()) / 2 - 1;
  CartesianExtState s;
  s.q = x.head(d);
  s.t = x[d];
  s.p = x.segment(d + 1, d);
  s.tau = x[2 * d + 1];
  return s;
}

CartesianTrajectory integrate_cartesian(const CartesianExtState& state0, const ForcingSpec& forcing,
                                        double t_end, const FlowOptions& options, double stride) {
  if (state0.dim() != forcing.dim()) throw InvalidArgument("state and forcing dimensions differ");
  check_physical(state0.q, forcing, kDefaultCollisionFloor);
  auto sys = cartesian_system(forcing);
  FlowOptions opt = options;
  if (stride > 0.0) {
    opt.record = false;
    opt.output_at.clear();
    const double span = t_end - state0.t;
    const auto count = static_cast<long>(std::floor(std::abs(span) / stride + 1e-9));
    for (long k = 1; k <= count; ++k)
      opt.output_at.push_back(state0.t + std::copysign(stride * static_cast<double>(k), span));
    if (opt.output_at.empty() || opt.output_at.back() != t_end) opt.output_at.push_back(t_end);
  }
  const FlowResult fr = integrate_flow(*sys, pack_cartesian(state0), state0.t, t_end, opt);
  CartesianTrajectory out;
  for (const auto& x : fr.x) {
    out.states.push_back(unpack_cartesian(x));
    out.energy.push_back(eval_energy(out.states.back(), forcing));
  }
  if (out.states.empty() || out.states.back().t != fr.x_end[forcing.dim()]) {
    out.states.push_back(unpack_cartesian(fr.x_end));
    out.energy.push_back(eval_energy(out.states.back(), forcing));
  }
  return out;
}

}  // namespace kepreg
