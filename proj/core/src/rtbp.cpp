#include "kepreg/rtbp.hpp"

#include <cmath>
#include <limits>
#include <type_traits>
#include <numbers>
#include <string>

#include "kepreg/errors.hpp"
#include "kepreg/jet.hpp"
#include "kepreg/kepler.hpp"

namespace kepreg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Eccentric anomaly of the relative orbit as a function of t, lifted to
// jets through E' = 2 pi / (1 - e cos E) and E'' = -e sin E E'^2 / (1 - e cos E).
template <class S>
S eccentric_anomaly(const PrimaryOrbit& po, const S& t) {
  const double tv = value_of(t);
  const double E = solve_kepler_equation(po.mean_anomaly0 + kTwoPi * tv, po.e);
  if constexpr (std::is_same_v<S, double>) {
    return E;
  } else {
    const double den = 1.0 - po.e * std::cos(E);
    const double d1 = kTwoPi / den;
    const double d2 = -po.e * std::sin(E) * d1 * d1 / den;
    return t.apply(E, d1, d2);
  }
}

// Relative vector R = X2 - X1 in the plane, as (x, y) components.
template <class S>
void relative_vector(const PrimaryOrbit& po, const S& t, S& x, S& y) {
  const S E = eccentric_anomaly(po, t);
  const double a = po.semi_major_axis();
  const double b = a * std::sqrt(1.0 - po.e * po.e);
  const S u = a * (cos(E) - po.e);
  const S v = b * sin(E);
  const double cg = std::cos(po.g), sg = std::sin(po.g);
  x = cg * u - sg * v;
  y = sg * u + cg * v;
}

struct RTBPParams {
  PrimaryOrbit primary;
  RTBPScaling scaling;
};

// Scaled tidal potential of the non-centered primary.
template <class S>
S rtbp_potential(const RTBPParams& pr, const S* q, const S& t) {
  const int d = pr.primary.dim;
  S rx, ry;
  relative_vector(pr.primary, t, rx, ry);
  // D = (X_c - X_o) / ell; X1 - X2 = -R.
  const double sgn = pr.scaling.center == 1 ? -1.0 : 1.0;
  const S Dx = (sgn / pr.scaling.ell) * rx;
  const S Dy = (sgn / pr.scaling.ell) * ry;
  const S D2 = Dx * Dx + Dy * Dy;
  const S Dn = sqrt(D2);
  S sx = q[0] + Dx, sy = q[1] + Dy;
  S s2 = sx * sx + sy * sy;
  S qD = q[0] * Dx + q[1] * Dy;
  for (int i = 2; i < d; ++i) s2 = s2 + q[i] * q[i];
  const double mu = pr.scaling.mu;
  return -mu / sqrt(s2) + mu / Dn - mu * qD / (D2 * Dn);
}

class RTBPModel final : public ForcingModel {
 public:
  RTBPModel(RTBPParams p, double rho) : p_(std::move(p)), rho_(rho) {}
  int dim() const override { return p_.primary.dim; }
  double domain_radius() const override { return rho_; }
  std::string name() const override { return "rtbp"; }
  bool identically_zero() const override { return p_.scaling.mu == 0.0; }

  ForcingJet evaluate(const Eigen::VectorXd& q, double t, double, int order) const override {
    const int d = dim();
    ForcingJet j;
    if (order <= 0) {
      j.value = rtbp_potential<double>(p_, q.data(), t);
      return j;
    }
    if (order == 1) {
      std::vector<Jet<1>> qj(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) qj[static_cast<std::size_t>(i)] = Jet<1>::variable(q[i], i, d + 1);
      const Jet<1> r = rtbp_potential(p_, qj.data(), Jet<1>::variable(t, d, d + 1));
      j.value = r.v;
      j.grad = r.g.head(d);
      j.dt = r.g[d];
      return j;
    }
    std::vector<Jet<2>> qj(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) qj[static_cast<std::size_t>(i)] = Jet<2>::variable(q[i], i, d + 1);
    const Jet<2> r = rtbp_potential(p_, qj.data(), Jet<2>::variable(t, d, d + 1));
    j.value = r.v;
    j.grad = r.g.head(d);
    j.dt = r.g[d];
    j.hess = r.h.topLeftCorner(d, d);
    j.grad_dt = r.h.col(d).head(d);
    j.dtt = r.h(d, d);
    return j;
  }

 private:
  RTBPParams p_;
  double rho_;
};

}  // namespace

void PrimaryOrbit::validate() const {
  if (!(M1 > 0.0) || !(M2 > 0.0)) throw InvalidArgument("primary masses must be positive");
  if (!(e >= 0.0 && e < 1.0)) throw InvalidArgument("primary eccentricity must lie in [0,1)");
  if (dim != 2 && dim != 3) throw InvalidArgument("dimension must be 2 or 3");
}

double PrimaryOrbit::semi_major_axis() const { return std::cbrt(total_mass() / (kTwoPi * kTwoPi)); }

PrimaryState primary_positions(const PrimaryOrbit& po, double t) {
  po.validate();
  Jet<2> rx, ry;
  relative_vector(po, Jet<2>::variable(t, 0, 1), rx, ry);
  const double M = po.total_mass();
  PrimaryState s;
  auto fill = [&](double c, Eigen::VectorXd& X, Eigen::VectorXd& V, Eigen::VectorXd& A) {
    X = Eigen::VectorXd::Zero(po.dim);
    V = Eigen::VectorXd::Zero(po.dim);
    A = Eigen::VectorXd::Zero(po.dim);
    X[0] = c * rx.v;
    X[1] = c * ry.v;
    V[0] = c * rx.g[0];
    V[1] = c * ry.g[0];
    A[0] = c * rx.h(0, 0);
    A[1] = c * ry.h(0, 0);
  };
  fill(-po.M2 / M, s.X1, s.V1, s.A1);
  fill(po.M1 / M, s.X2, s.V2, s.A2);
  return s;
}

RTBPScaling rtbp_scaling(const PrimaryOrbit& po, int center) {
  po.validate();
  if (center != 1 && center != 2) throw InvalidArgument("center must be 1 or 2");
  RTBPScaling sc;
  sc.center = center;
  const double Mc = center == 1 ? po.M1 : po.M2;
  const double Mo = center == 1 ? po.M2 : po.M1;
  sc.ell = std::cbrt(Mc);
  sc.mu = Mo / Mc;
  sc.min_separation = po.semi_major_axis() * (1.0 - po.e) / sc.ell;
  return sc;
}

ForcingSpec build_rtbp_forcing(const PrimaryOrbit& po, int center, double epsilon, double domain_fraction) {
  if (!(domain_fraction > 0.0 && domain_fraction <= 0.5))
    throw InvalidArgument("domain fraction must lie in (0, 0.5]");
  RTBPParams p{po, rtbp_scaling(po, center)};
  const double rho = domain_fraction * p.scaling.min_separation;
  return ForcingSpec(std::make_shared<RTBPModel>(p, rho), epsilon);
}

InertialReport shift_to_inertial(const PeriodicOrbit& orbit, const PrimaryOrbit& po, int center,
                                 double mask_radius) {
  const RTBPScaling sc = rtbp_scaling(po, center);
  if (orbit.dim != po.dim) throw InvalidArgument("orbit and primaries differ in dimension");
  if (orbit.samples.empty()) throw InvalidArgument("orbit carries no samples");
  const RegularizedModel model(orbit.regularization, orbit.forcing);
  const double ell = sc.ell;

  InertialReport rep;
  rep.min_other_distance = std::numeric_limits<double>::infinity();
  for (const auto& x : orbit.samples) {
    const CartesianExtState c = model.to_cartesian(x);
    const PrimaryState ps = primary_positions(po, c.t);
    const Eigen::VectorXd& Xc = center == 1 ? ps.X1 : ps.X2;
    const Eigen::VectorXd& Vc = center == 1 ? ps.V1 : ps.V2;
    const Eigen::VectorXd& Ac = center == 1 ? ps.A1 : ps.A2;
    const Eigen::VectorXd& Xo = center == 1 ? ps.X2 : ps.X1;
    const Eigen::VectorXd q = ell * c.q + Xc;
    const Eigen::VectorXd p = ell * c.p + Vc;
    rep.t.push_back(c.t);
    rep.q.push_back(q);
    rep.p.push_back(p);
    const double rc = (q - Xc).norm();
    rep.max_center_distance = std::max(rep.max_center_distance, rc);
    rep.min_other_distance = std::min(rep.min_other_distance, (q - Xo).norm());
    if (rc < mask_radius || model.physical_distance(x) < mask_radius) {
      ++rep.masked;
      continue;
    }
    const auto [dq, dp] = model.physical_velocity(x);
    const Eigen::VectorXd qdot = ell * dq + Vc;
    const Eigen::VectorXd qddot = ell * dp + Ac;
    const Eigen::VectorXd d1 = q - ps.X1, d2 = q - ps.X2;
    const Eigen::VectorXd rhs = -po.M1 * d1 / std::pow(d1.norm(), 3) - po.M2 * d2 / std::pow(d2.norm(), 3);
    const double r1 = (qdot - p).norm() / (1.0 + p.norm());
    const double r2 = (qddot - rhs).norm() / (1.0 + rhs.norm());
    rep.max_residual = std::max({rep.max_residual, r1, r2});
  }
  const std::size_t last = rep.q.size() - 1;
  rep.periodicity_defect =
      std::sqrt((rep.q[last] - rep.q[0]).squaredNorm() + (rep.p[last] - rep.p[0]).squaredNorm());

  if (orbit.crossings.empty()) {
    // Extended inertial Hamiltonian on [q, t, p, tau]; its flow runs in t.
    const int d = po.dim;
    const double M1 = po.M1, M2 = po.M2, M = po.total_mass();
    auto h = [po, d, M1, M2, M](const auto* x) {
      using S = std::remove_cv_t<std::remove_pointer_t<decltype(x)>>;
      S rx, ry;
      relative_vector(po, x[d], rx, ry);
      const S X1x = (-M2 / M) * rx, X1y = (-M2 / M) * ry;
      const S X2x = (M1 / M) * rx, X2y = (M1 / M) * ry;
      S kin = x[d + 1] * x[d + 1];
      for (int i = 1; i < d; ++i) kin = kin + x[d + 1 + i] * x[d + 1 + i];
      S a1 = (x[0] - X1x) * (x[0] - X1x) + (x[1] - X1y) * (x[1] - X1y);
      S a2 = (x[0] - X2x) * (x[0] - X2x) + (x[1] - X2y) * (x[1] - X2y);
      for (int i = 2; i < d; ++i) {
        a1 = a1 + x[i] * x[i];
        a2 = a2 + x[i] * x[i];
      }
      return 0.5 * kin - M1 / sqrt(a1) - M2 / sqrt(a2) + x[2 * d + 1];
    };
    JetHamiltonian<decltype(h)> sys(d + 1, h);
    Eigen::VectorXd x0(2 * d + 2);
    x0.head(d) = rep.q[0];
    x0[d] = rep.t[0];
    x0.segment(d + 1, d) = rep.p[0];
    x0[2 * d + 1] = 0.0;
    FlowOptions fo;
    fo.record = false;
    fo.rtol = fo.atol = 1e-13;
    const double T = rep.t[last] - rep.t[0];
    const FlowResult fr = integrate_flow(sys, x0, 0.0, T, fo);
    const Eigen::VectorXd qe = fr.x_end.head(d), pe = fr.x_end.segment(d + 1, d);
    rep.direct_closure = std::sqrt((qe - rep.q[0]).squaredNorm() + (pe - rep.p[0]).squaredNorm());
  }
  return rep;
}

}  // namespace kepreg
