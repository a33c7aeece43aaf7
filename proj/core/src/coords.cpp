#include "kepreg/coords.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kepreg/errors.hpp"

namespace kepreg {

namespace {

constexpr double kPi = std::numbers::pi;

double oscillator_scale(double tau) {
  if (!(tau > 0.0)) throw NonpositiveTau("action-angle variables need tau > 0");
  return std::pow(2.0, 0.25) * std::pow(tau, 0.25);
}

struct Equinoctial {
  double a = 0.0, k = 0.0, h = 0.0, lambda = 0.0;
};

// Planar direct orbits only.
Equinoctial equinoctial_from_state(const Eigen::Vector2d& q, const Eigen::Vector2d& p) {
  const double r = q.norm();
  if (r == 0.0) throw CollisionPoint("elements undefined at q = 0");
  const double v2 = p.squaredNorm();
  const double energy = 0.5 * v2 - 1.0 / r;
  if (energy >= 0.0) throw HyperbolicOrParabolic("Kepler energy is nonnegative");
  Equinoctial eq;
  eq.a = -0.5 / energy;
  const Eigen::Vector2d ev = (v2 - 1.0 / r) * q - q.dot(p) * p;
  eq.k = ev.x();
  eq.h = ev.y();
  const double e2 = eq.k * eq.k + eq.h * eq.h;
  const double beta = 1.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - e2)));
  Eigen::Matrix2d m;
  m << 1.0 - eq.h * eq.h * beta, eq.h * eq.k * beta, eq.h * eq.k * beta, 1.0 - eq.k * eq.k * beta;
  const Eigen::Vector2d rhs(q.x() / eq.a + eq.k, q.y() / eq.a + eq.h);
  const Eigen::Vector2d cs = m.partialPivLu().solve(rhs);
  const double f = std::atan2(cs.y(), cs.x());
  eq.lambda = wrap_angle(f + eq.h * std::cos(f) - eq.k * std::sin(f));
  return eq;
}

CartesianExtState state_from_equinoctial(const Equinoctial& eq) {
  const double e2 = eq.k * eq.k + eq.h * eq.h;
  if (!(e2 < 1.0)) throw RectilinearOrbit("eccentricity reaches 1");
  const double beta = 1.0 / (1.0 + std::sqrt(1.0 - e2));
  // F + h cos F - k sin F = lambda is Kepler's equation in E = F - varpi.
  const double varpi = std::atan2(eq.h, eq.k);
  const double f = varpi + solve_kepler_equation(eq.lambda - varpi, std::sqrt(e2));
  const double cf = std::cos(f), sf = std::sin(f);
  const double a = eq.a, k = eq.k, h = eq.h;
  const double r = a * (1.0 - k * cf - h * sf);
  const double coef = a * a * std::pow(a, -1.5) / r;
  CartesianExtState s;
  s.q = Eigen::Vector2d(a * ((1.0 - h * h * beta) * cf + h * k * beta * sf - k),
                        a * ((1.0 - k * k * beta) * sf + h * k * beta * cf - h));
  s.p = Eigen::Vector2d(coef * (h * k * beta * cf - (1.0 - h * h * beta) * sf),
                        coef * ((1.0 - k * k * beta) * cf - h * k * beta * sf));
  s.tau = 0.5 / a;
  return s;
}

double planar_momentum(const CartesianExtState& s) {
  return s.q[0] * s.p[1] - s.q[1] * s.p[0];
}

void require_planar(const CartesianExtState& s) {
  if (s.dim() != 2) throw InvalidArgument("planar state expected");
}

// Rotation taking `axis` to e3 along the great circle through both.
Eigen::Matrix3d axis_rotation(const Eigen::Vector3d& axis) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw InvalidArgument("axis must be nonzero");
  const Eigen::Vector3d a = axis / n;
  const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d k = a.cross(e3);
  const double s = k.norm();
  const double c = a.dot(e3);
  if (s < 1e-15) {
    if (c > 0.0) return Eigen::Matrix3d::Identity();
    return Eigen::AngleAxisd(kPi, Eigen::Vector3d::UnitX()).toRotationMatrix();
  }
  return Eigen::AngleAxisd(std::atan2(s, c), k / s).toRotationMatrix();
}

// Signed area of the geodesic triangle with unit vertices a, b, c.
double spherical_triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                               const Eigen::Vector3d& c) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

}  // namespace

LCActionAngle lc_to_action_angle(const LCState& s) {
  const double c = oscillator_scale(s.tau);
  const double z[2] = {s.z.real(), s.z.imag()};
  const double w[2] = {s.w.real(), s.w.imag()};
  double act[2], ang[2];
  for (int i = 0; i < 2; ++i) {
    const double x = c * z[i];
    const double y = -w[i] / (2.0 * c);
    act[i] = x * x + y * y;
    ang[i] = act[i] > 0.0 ? std::atan2(y, x) : 0.0;
  }
  if (act[0] == 0.0 && act[1] == 0.0) throw DegenerateAction("both oscillator actions vanish");
  LCActionAngle a;
  a.I1 = act[0];
  a.I2 = act[1];
  a.theta1 = ang[0];
  a.theta2 = ang[1];
  a.L = a.I1 + a.I2;
  a.J = a.I1 - a.I2;
  a.delta = 0.5 * (a.theta1 + a.theta2);
  a.gamma = 0.5 * (a.theta1 - a.theta2);
  a.tau = s.tau;
  a.t_tilde = lc_t_tilde(s);
  return a;
}

LCState lc_from_action_angle(const LCActionAngle& a) {
  if (a.I1 < 0.0 || a.I2 < 0.0) throw InvalidArgument("actions must be nonnegative");
  const double c = oscillator_scale(a.tau);
  const double r1 = std::sqrt(a.I1), r2 = std::sqrt(a.I2);
  LCState s;
  s.z = cplx(r1 * std::cos(a.theta1) / c, r2 * std::cos(a.theta2) / c);
  s.w = cplx(-2.0 * c * r1 * std::sin(a.theta1), -2.0 * c * r2 * std::sin(a.theta2));
  s.tau = a.tau;
  s.t = a.t_tilde - (std::conj(s.z) * s.w).real() / (4.0 * a.tau);
  return s;
}

LCActionAngle action_angle_from_LJ(double L, double delta, double J, double gamma, double tau,
                                   double t_tilde) {
  LCActionAngle a;
  a.L = L;
  a.J = J;
  a.delta = delta;
  a.gamma = gamma;
  a.I1 = 0.5 * (L + J);
  a.I2 = 0.5 * (L - J);
  a.theta1 = delta + gamma;
  a.theta2 = delta - gamma;
  a.tau = tau;
  a.t_tilde = t_tilde;
  return a;
}

double lc_fast_action(const LCState& s) {
  if (!(s.tau > 0.0)) throw NonpositiveTau("fast action needs tau > 0");
  return std::sqrt(2.0) * (std::norm(s.w) / 8.0 + s.tau * std::norm(s.z)) / std::sqrt(s.tau);
}

double lc_t_tilde(const LCState& s) {
  if (!(s.tau > 0.0)) throw NonpositiveTau("t_tilde needs tau > 0");
  return s.t + (std::conj(s.z) * s.w).real() / (4.0 * s.tau);
}

LambdaData lambda_n(int n) {
  if (n < 1) throw InvalidArgument("n must be a positive integer");
  const double nn = n;
  LambdaData d;
  d.n = n;
  d.L = std::pow(2.0, 2.0 / 3.0) * std::pow(kPi, -1.0 / 3.0) * std::pow(nn, -1.0 / 3.0);
  d.tau = std::pow(2.0, -1.0 / 3.0) * std::pow(kPi, 2.0 / 3.0) * std::pow(nn, 2.0 / 3.0);
  d.S = std::pow(2.0 * kPi, 2.0 / 3.0) * std::pow(nn, -1.0 / 3.0);
  d.action = 3.0 * std::pow(2.0, -1.0 / 3.0) * std::pow(kPi, 2.0 / 3.0) * std::pow(nn, 2.0 / 3.0);
  d.kappa = std::pow(nn, -1.0 / 3.0);
  return d;
}

HessianReport hessian_nondegeneracy(const std::function<double(const Eigen::VectorXd&)>& h,
                                    const Eigen::VectorXd& point, double step1, double step2,
                                    double det_tol) {
  if (!(step1 > 0.0 && step2 > 0.0) || step1 == step2)
    throw InvalidArgument("need two distinct positive steps");
  const int n = static_cast<int>(point.size());
  auto second = [&](double st) {
    Eigen::MatrixXd m(n, n);
    const double f0 = h(point);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd xp = point, xm = point;
      xp[i] += st;
      xm[i] -= st;
      m(i, i) = (h(xp) - 2.0 * f0 + h(xm)) / (st * st);
      for (int j = 0; j < i; ++j) {
        Eigen::VectorXd a = point, b = point, c = point, d = point;
        a[i] += st, a[j] += st;
        b[i] += st, b[j] -= st;
        c[i] -= st, c[j] += st;
        d[i] -= st, d[j] -= st;
        m(i, j) = m(j, i) = (h(a) - h(b) - h(c) + h(d)) / (4.0 * st * st);
      }
    }
    return m;
  };
  const double a2 = step1 * step1, b2 = step2 * step2;
  HessianReport r;
  r.hessian = (a2 * second(step2) - b2 * second(step1)) / (a2 - b2);
  r.determinant = r.hessian.determinant();
  r.nondegenerate = std::abs(r.determinant) > det_tol;
  return r;
}

DelaunayState delaunay_from_cartesian(const CartesianExtState& s) {
  const OrbitalElements el = elements_from_state(s);
  if (el.e < 1e-12) throw CircularOrbit("pericenter argument undefined on a circular orbit");
  DelaunayState d;
  d.dim = s.dim();
  d.L = std::sqrt(el.a);
  d.l = el.l;
  d.g = el.g;
  const double g_abs = d.L * std::sqrt(1.0 - el.e * el.e);
  d.t = s.t;
  d.tau = s.tau;
  if (d.dim == 2) {
    d.G = el.inclination > 0.5 * kPi ? -g_abs : g_abs;
  } else {
    d.G = g_abs;
    d.H = g_abs * std::cos(el.inclination);
    d.h = el.node;
  }
  return d;
}

CartesianExtState cartesian_from_delaunay(const DelaunayState& d) {
  if (!(d.L > 0.0)) throw InvalidArgument("L must be positive");
  const double ratio = std::abs(d.G) / d.L;
  if (ratio > 1.0 + 1e-14) throw InvalidArgument("|G| exceeds L");
  if (ratio == 0.0) throw RectilinearOrbit("G = 0");
  OrbitalElements el;
  el.dim = d.dim;
  el.a = d.L * d.L;
  el.e = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  el.g = d.g;
  el.l = d.l;
  if (d.dim == 2) {
    el.inclination = d.G < 0.0 ? kPi : 0.0;
  } else {
    el.inclination = std::acos(std::clamp(d.H / d.G, -1.0, 1.0));
    el.node = d.h;
  }
  CartesianExtState s = state_from_elements(el);
  s.t = d.t;
  s.tau = d.tau;
  return s;
}

PoincareState poincare_from_delaunay(const DelaunayState& d) {
  if (d.dim != 2) throw InvalidArgument("Poincare variables are planar");
  if (d.G < 0.0 && std::abs(d.L + d.G) < 1e-12 * d.L)
    throw RetrogradeCircular("Poincare chart excludes retrograde circular orbits");
  const double rad = std::sqrt(std::max(0.0, 2.0 * (d.L - d.G)));
  PoincareState p;
  p.L = d.L;
  p.lambda = wrap_angle(d.l + d.g);
  p.xi = rad * std::cos(d.g);
  p.eta = -rad * std::sin(d.g);
  p.t = d.t;
  p.tau = d.tau;
  return p;
}

DelaunayState delaunay_from_poincare(const PoincareState& p) {
  const double s2 = p.xi * p.xi + p.eta * p.eta;
  if (s2 == 0.0) throw CircularOrbit("pericenter argument undefined on a circular orbit");
  DelaunayState d;
  d.dim = 2;
  d.L = p.L;
  d.G = p.L - 0.5 * s2;
  d.g = wrap_angle(std::atan2(-p.eta, p.xi));
  d.l = wrap_angle(p.lambda - d.g);
  d.t = p.t;
  d.tau = p.tau;
  return d;
}

PoincareState poincare_from_cartesian(const CartesianExtState& s) {
  require_planar(s);
  if (planar_momentum(s) <= 0.0) {
    try {
      PoincareState p = poincare_from_delaunay(delaunay_from_cartesian(s));
      return p;
    } catch (const CircularOrbit&) {
      throw RetrogradeCircular("Poincare chart excludes retrograde circular orbits");
    }
  }
  const Equinoctial eq = equinoctial_from_state(s.q, s.p);
  const double e2 = eq.k * eq.k + eq.h * eq.h;
  const double L = std::sqrt(eq.a);
  const double c = std::sqrt(2.0 * L / (1.0 + std::sqrt(std::max(0.0, 1.0 - e2))));
  PoincareState p;
  p.L = L;
  p.lambda = eq.lambda;
  p.xi = c * eq.k;
  p.eta = -c * eq.h;
  p.t = s.t;
  p.tau = s.tau;
  return p;
}

CartesianExtState cartesian_from_poincare(const PoincareState& p) {
  if (!(p.L > 0.0)) throw InvalidArgument("L must be positive");
  const double s2 = p.xi * p.xi + p.eta * p.eta;
  const double G = p.L - 0.5 * s2;
  if (G <= 0.0) return cartesian_from_delaunay(delaunay_from_poincare(p));
  const double beta = 1.0 / (1.0 + G / p.L);
  const double c = std::sqrt(2.0 * p.L * beta);
  Equinoctial eq;
  eq.a = p.L * p.L;
  eq.k = p.xi / c;
  eq.h = -p.eta / c;
  eq.lambda = p.lambda;
  CartesianExtState s = state_from_equinoctial(eq);
  s.t = p.t;
  s.tau = p.tau;
  return s;
}

double mean_longitude(const CartesianExtState& s) {
  require_planar(s);
  if (planar_momentum(s) > 0.0) return equinoctial_from_state(s.q, s.p).lambda;
  const OrbitalElements el = elements_from_state(s);
  return wrap_angle(el.l + el.g);
}

Eigen::Vector3d orbit_sphere_point(const CartesianExtState& s) {
  require_planar(s);
  const double r = s.q.norm();
  if (r == 0.0) throw CollisionPoint("orbit undefined at q = 0");
  const double v2 = s.p.squaredNorm();
  const double energy = 0.5 * v2 - 1.0 / r;
  if (energy >= 0.0) throw HyperbolicOrParabolic("Kepler energy is nonnegative");
  const double a = -0.5 / energy;
  const Eigen::Vector2d ev = (v2 - 1.0 / r) * s.q - s.q.dot(s.p) * s.p;
  return Eigen::Vector3d(ev.x(), ev.y(), planar_momentum(s) / std::sqrt(a));
}

Eigen::Vector3d orbit_sphere_point(const OrbitalElements& el) {
  if (el.dim != 2) throw InvalidArgument("orbit sphere is defined for planar orbits");
  const double sense = el.inclination > 0.5 * kPi ? -1.0 : 1.0;
  return Eigen::Vector3d(el.e * std::cos(el.g), el.e * std::sin(el.g),
                         sense * std::sqrt(1.0 - el.e * el.e));
}

OrbitShape orbit_sphere_inverse(const Eigen::Vector3d& x, double a) {
  if (std::abs(x.norm() - 1.0) > 1e-9) throw InvalidArgument("point is not on the unit sphere");
  if (!(a > 0.0)) throw InvalidArgument("semimajor axis must be positive");
  OrbitShape o;
  o.a = a;
  o.e = std::hypot(x.x(), x.y());
  o.g = o.e > 0.0 ? wrap_angle(std::atan2(x.y(), x.x())) : 0.0;
  o.G = std::sqrt(a) * x.z();
  return o;
}

TiltedDelaunay tilted_delaunay(const CartesianExtState& s, const Eigen::Vector3d& axis) {
  const Eigen::Matrix3d rot = axis_rotation(axis);
  const Eigen::Vector3d x = orbit_sphere_point(s);
  const Eigen::Vector3d y = rot * x;
  if (1.0 - std::abs(y.z()) < 1e-12) throw AxisPole("orbit lies on the tilted axis");
  const double L = std::sqrt(-0.5 / (0.5 * s.p.squaredNorm() - 1.0 / s.q.norm()));
  TiltedDelaunay td;
  td.axis = axis.normalized();
  td.L = L;
  td.G_tilde = L * y.z();
  td.g_tilde = wrap_angle(std::atan2(y.y(), y.x()));
  const double area = spherical_triangle_area(Eigen::Vector3d::UnitZ(), td.axis, x);
  td.l_tilde = wrap_angle(mean_longitude(s) - area - td.g_tilde);
  td.t = s.t;
  td.tau = s.tau;
  return td;
}

CartesianExtState cartesian_from_tilted(const TiltedDelaunay& td) {
  if (!(td.L > 0.0)) throw InvalidArgument("L must be positive");
  const double hz = td.G_tilde / td.L;
  if (std::abs(hz) > 1.0) throw InvalidArgument("|G_tilde| exceeds L");
  const double rho = std::sqrt(1.0 - hz * hz);
  const Eigen::Vector3d y(rho * std::cos(td.g_tilde), rho * std::sin(td.g_tilde), hz);
  const Eigen::Matrix3d rot = axis_rotation(td.axis);
  const Eigen::Vector3d x = rot.transpose() * y;
  const double area = spherical_triangle_area(Eigen::Vector3d::UnitZ(), td.axis.normalized(), x);
  const double lambda = td.l_tilde + td.g_tilde + area;
  const double a = td.L * td.L;
  CartesianExtState s;
  if (x.z() > 1e-14) {
    s = state_from_equinoctial(Equinoctial{a, x.x(), x.y(), lambda});
  } else if (x.z() < -1e-14) {
    OrbitalElements el;
    el.a = a;
    el.e = std::hypot(x.x(), x.y());
    el.g = wrap_angle(std::atan2(x.y(), x.x()));
    el.l = wrap_angle(lambda - el.g);
    el.inclination = kPi;
    s = state_from_elements(el);
  } else {
    throw RectilinearOrbit("orbit point on the equator of the orbit sphere");
  }
  s.t = td.t;
  s.tau = td.tau;
  return s;
}

}  // namespace kepreg
