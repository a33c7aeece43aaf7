#include "kepreg/moser.hpp"

#include <cmath>
#include <random>
#include <type_traits>

#include "kepreg/errors.hpp"

namespace kepreg {

namespace {

int moser_dim_from_state(const Eigen::VectorXd& x) { return static_cast<int>(x.size()) / 2 - 2; }

// |q| U(q, t) for a unit-sphere state, the term multiplying eps.
double unit_perturbation_term(const ForcingSpec& forcing, const UnitMoserState& s) {
  if (forcing.inactive()) return 0.0;
  const CartesianExtState c = moser_to_cartesian(s);
  return forcing.epsilon() * physical_distance(s) * forcing.value(c.q, c.t);
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> stereo_project(const Eigen::VectorXd& u,
                                                           const Eigen::VectorXd& v, double r) {
  const int d = static_cast<int>(u.size()) - 1;
  const double denom = r - u[d];
  if (std::abs(denom) <= 1e-14 * r) throw NorthPole("stereographic projection undefined at the north pole");
  Eigen::VectorXd x(d), y(d);
  for (int i = 0; i < d; ++i) {
    x[i] = r * u[i] / denom;
    y[i] = (denom / r) * v[i] + u[i] * v[d] / r;
  }
  return {x, y};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> stereo_inverse(const Eigen::VectorXd& x,
                                                           const Eigen::VectorXd& y, double r) {
  const int d = static_cast<int>(x.size());
  const double x2 = x.squaredNorm();
  const double r2 = r * r;
  const double xy = x.dot(y);
  Eigen::VectorXd u(d + 1), v(d + 1);
  for (int i = 0; i < d; ++i) {
    u[i] = 2.0 * r2 * x[i] / (r2 + x2);
    v[i] = ((x2 + r2) / (2.0 * r2)) * y[i] - xy * x[i] / r2;
  }
  u[d] = r * (x2 - r2) / (x2 + r2);
  v[d] = xy / r;
  return {u, v};
}

double physical_time(const UnitMoserState& s) {
  const int d = s.dim();
  return s.t_tilde + s.v[d] / (2.0 * s.tau);
}

double physical_distance(const UnitMoserState& s) {
  const int d = s.dim();
  return s.v.norm() * (1.0 - s.u[d]) / std::sqrt(2.0 * s.tau);
}

UnitMoserState moser_from_cartesian(const CartesianExtState& c) {
  if (!(c.tau > 0.0)) throw NonpositiveTau("tau must be positive");
  const double r = std::sqrt(2.0 * c.tau);
  auto [u, v] = stereo_inverse(Eigen::VectorXd(-c.p / r), Eigen::VectorXd(r * c.q), 1.0);
  UnitMoserState s;
  s.u = std::move(u);
  s.v = std::move(v);
  s.tau = c.tau;
  s.t_tilde = c.t - s.v[c.dim()] / (2.0 * c.tau);
  return s;
}

CartesianExtState moser_to_cartesian(const UnitMoserState& s) {
  if (!(s.tau > 0.0)) throw NonpositiveTau("tau must be positive");
  const double r = std::sqrt(2.0 * s.tau);
  const auto [x, y] = stereo_project(s.u, s.v, 1.0);
  CartesianExtState c;
  c.q = y / r;
  c.p = -r * x;
  c.t = physical_time(s);
  c.tau = s.tau;
  return c;
}

UnitMoserState rescale_to_unit_sphere(const MoserState& s) {
  if (!(s.tau > 0.0)) throw NonpositiveTau("tau must be positive");
  const double r = std::sqrt(2.0 * s.tau);
  UnitMoserState out;
  out.u = s.u / r;
  out.v = s.v * r;
  // u.v = 0 makes v.du = v~.du~ along any curve, so no shift is needed.
  out.t_tilde = s.t;
  out.tau = s.tau;
  return out;
}

MoserState rescale_from_unit_sphere(const UnitMoserState& s) {
  if (!(s.tau > 0.0)) throw NonpositiveTau("tau must be positive");
  const double r = std::sqrt(2.0 * s.tau);
  MoserState out;
  out.u = s.u * r;
  out.v = s.v / r;
  out.r = r;
  out.t = s.t_tilde;
  out.tau = s.tau;
  return out;
}

double constraint_defect(const MoserState& s) {
  return std::abs(s.u.squaredNorm() - s.r * s.r) + std::abs(s.u.dot(s.v));
}

double constraint_defect(const UnitMoserState& s) {
  return std::abs(s.u.squaredNorm() - 1.0) + std::abs(s.u.dot(s.v));
}

double moser_hamiltonian(const MoserState& s, const ForcingSpec& forcing) {
  if (!(s.tau > 0.0)) throw NonpositiveTau("tau must be positive");
  const int d = s.dim();
  const double r = std::sqrt(2.0 * s.tau);
  const double vn = s.v.norm();
  double h = 2.0 * s.tau * vn - 1.0;
  if (forcing.inactive()) return h;
  const double qn = vn * (r - s.u[d]) / r;
  if (qn >= forcing.rho()) throw OutsideDomain("|q| outside forcing domain");
  if (qn == 0.0) return h;
  const auto [x, y] = stereo_project(s.u, s.v, r);
  const double t_phys = s.t + s.v[d] / r;
  return h + forcing.epsilon() * qn * forcing.value(y, t_phys);
}

std::unique_ptr<HamiltonianSystem> moser_unit_system(const ForcingSpec& forcing) {
  const int d = forcing.dim();
  auto f = [forcing, d](const auto* x) {
    using S = std::remove_cv_t<std::remove_pointer_t<decltype(x)>>;
    const S* u = x;
    const S& tt = x[d + 1];
    const S* v = x + d + 2;
    const S& tau = x[2 * d + 3];
    S uu = u[0] * u[0];
    S uv = u[0] * v[0];
    for (int i = 1; i <= d; ++i) {
      uu = uu + u[i] * u[i];
      uv = uv + u[i] * v[i];
    }
    const S nu = sqrt(uu);
    const S coef = uv / uu;
    std::vector<S> uh(static_cast<std::size_t>(d + 1)), vh(static_cast<std::size_t>(d + 1));
    S vv = make_constant(0.0, tau);
    for (int i = 0; i <= d; ++i) {
      uh[i] = u[i] / nu;
      vh[i] = nu * (v[i] - coef * u[i]);
      vv = vv + vh[i] * vh[i];
    }
    const S vn = sqrt(vv);
    const S sq = sqrt(2.0 * tau);
    S h = sq * vn - 1.0;
    if (!forcing.inactive()) {
      const S one_minus = 1.0 - uh[d];
      const S qn = vn * one_minus / sq;
      if (value_of(qn) >= forcing.rho()) throw OutsideDomain("|q| outside forcing domain");
      std::vector<S> q(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) q[i] = (one_minus * vh[i] + uh[i] * vh[d]) / sq;
      const S t = tt + vh[d] / (2.0 * tau);
      h = h + qn * compose_forcing<S>(forcing, q.data(), t);
    }
    return h;
  };

  class System final : public JetHamiltonian<decltype(f)> {
   public:
    System(int m, decltype(f) fn, int d) : JetHamiltonian<decltype(f)>(m, std::move(fn)), d_(d) {}
    void project(Eigen::VectorXd& x) const override {
      Eigen::Ref<Eigen::VectorXd> u = x.segment(0, d_ + 1);
      Eigen::Ref<Eigen::VectorXd> v = x.segment(d_ + 2, d_ + 1);
      const double nu = u.norm();
      const double uv = u.dot(v);
      v = nu * (v - (uv / (nu * nu)) * u);
      u /= nu;
    }

   private:
    int d_;
  };
  return std::make_unique<System>(d + 2, std::move(f), d);
}

Eigen::VectorXd pack_moser(const UnitMoserState& s) {
  const int d = s.dim();
  Eigen::VectorXd x(2 * d + 4);
  x.segment(0, d + 1) = s.u;
  x[d + 1] = s.t_tilde;
  x.segment(d + 2, d + 1) = s.v;
  x[2 * d + 3] = s.tau;
  return x;
}

UnitMoserState unpack_moser(const Eigen::VectorXd& x) {
  const int d = moser_dim_from_state(x);
  UnitMoserState s;
  s.u = x.segment(0, d + 1);
  s.t_tilde = x[d + 1];
  s.v = x.segment(d + 2, d + 1);
  s.tau = x[2 * d + 3];
  return s;
}

MoserState moser_vector_field(const MoserState& s, const ForcingSpec& forcing) {
  if (!(s.tau > 0.0)) throw NonpositiveTau("tau must be positive");
  const double r = std::sqrt(2.0 * s.tau);
  const double defect = std::abs(s.u.squaredNorm() - r * r) / (r * r) + std::abs(s.u.dot(s.v));
  if (defect > 1e-8) throw ConstraintDrift("state violates the sphere constraints by " + std::to_string(defect));
  const UnitMoserState us = rescale_to_unit_sphere(s);
  auto sys = moser_unit_system(forcing);
  const UnitMoserState du = unpack_moser(sys->vector_field(pack_moser(us)));
  const double dr = du.tau / r;
  MoserState out;
  out.u = r * du.u + us.u * dr;
  out.v = du.v / r - us.v * dr / (r * r);
  out.r = dr;
  out.t = du.t_tilde;
  out.tau = du.tau;
  return out;
}

MoserTrajectory integrate_moser(const UnitMoserState& state0, const ForcingSpec& forcing,
                                StopCondition stop, const MoserIntegrateOptions& options) {
  const int d = state0.dim();
  if (d != forcing.dim()) throw InvalidArgument("state and forcing dimensions differ");
  if (constraint_defect(state0) > 1e-8) throw ConstraintDrift("initial state violates the sphere constraints");
  auto sys = moser_unit_system(forcing);
  const Eigen::VectorXd x0 = pack_moser(state0);
  const double h0 = sys->value(x0);
  if (std::abs(h0) > options.level_tol)
    throw InvalidArgument("initial state is off the zero level, H = " + std::to_string(h0));

  const HamiltonianSystem* sp = sys.get();
  std::vector<FlowEvent> events;
  events.push_back({[sp, d](const Eigen::VectorXd& x, double) { return sp->vector_field(x)[d]; }, -1, false});
  double s_end = stop.value;
  if (stop.kind == StopCondition::Kind::TimeAdvance) {
    const double target = physical_time(state0) + stop.value;
    events.push_back({[target, d](const Eigen::VectorXd& x, double) {
                        return x[d + 1] + x[2 * d + 2] / (2.0 * x[2 * d + 3]) - target;
                      },
                      +1, true});
    s_end = options.s_limit;
  }

  FlowResult fr;
  try {
    fr = integrate_flow(*sys, x0, 0.0, s_end, options.flow, events);
  } catch (const OutsideDomain& e) {
    throw DomainExit(e.what());
  }
  if (stop.kind == StopCondition::Kind::TimeAdvance && !fr.terminated)
    throw IntegrationFailure("time advance not reached before the fictitious-time guard");

  MoserTrajectory tr;
  tr.s = fr.s;
  tr.action = fr.action;
  for (const auto& x : fr.x) tr.states.push_back(unpack_moser(x));
  if (tr.s.empty() || tr.s.back() != fr.s_end) {
    tr.s.push_back(fr.s_end);
    tr.states.push_back(unpack_moser(fr.x_end));
    tr.action.push_back(fr.action_end);
  }
  for (const auto& st : tr.states) tr.max_constraint_defect = std::max(tr.max_constraint_defect, constraint_defect(st));
  for (const auto& hit : fr.hits) {
    if (hit.event != 0) continue;
    const UnitMoserState st = unpack_moser(hit.x);
    if (1.0 - st.u[d] > options.collision_tol) continue;
    MoserCrossing c;
    c.s = hit.s;
    c.t = physical_time(st);
    c.tau = st.tau;
    c.speed = sys->vector_field(hit.x).segment(0, d + 1).norm();
    tr.crossings.push_back(c);
  }
  return tr;
}

VanishingReport perturbation_vanishing_check(const ForcingSpec& forcing, double tau_star,
                                             double eps_tilde, unsigned seed) {
  const int d = forcing.dim();
  const ForcingSpec f = forcing.with_epsilon(eps_tilde);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double vnorm = 1.0 / std::sqrt(2.0 * tau_star);

  auto random_unit = [&](int n) {
    Eigen::VectorXd e(n);
    for (int i = 0; i < n; ++i) e[i] = gauss(rng);
    return Eigen::VectorXd(e / e.norm());
  };

  VanishingReport rep;
  for (double rho : {1e-2, 1e-3, 1e-4}) {
    double worst = 0.0;
    for (int k = 0; k < 64; ++k) {
      UnitMoserState s;
      s.u.resize(d + 1);
      s.u.head(d) = rho * random_unit(d);
      s.u[d] = std::sqrt(1.0 - rho * rho);
      Eigen::VectorXd v = random_unit(d + 1);
      v -= v.dot(s.u) * s.u;
      s.v = vnorm * v / v.norm();
      s.tau = tau_star;
      s.t_tilde = unif(rng);
      const double term = unit_perturbation_term(f, s);
      worst = std::max(worst, std::abs(term) / std::pow(rho, 4));
    }
    rep.radii.push_back(rho);
    rep.ratios.push_back(worst);
    rep.c0_fit = std::max(rep.c0_fit, worst);
  }

  // Third derivative along great circles through the pole.
  const double h = 1e-2;
  for (int k = 0; k < 16; ++k) {
    const Eigen::VectorXd e = random_unit(d);
    const double t0 = unif(rng);
    Eigen::VectorXd fdir = Eigen::VectorXd::Zero(d + 1);
    if (d >= 2) {
      Eigen::VectorXd g = random_unit(d);
      g -= g.dot(e) * e;
      fdir.head(d) = g / g.norm();
    }
    auto term_at = [&](double theta) {
      UnitMoserState s;
      s.u = Eigen::VectorXd::Zero(d + 1);
      s.u.head(d) = std::sin(theta) * e;
      s.u[d] = std::cos(theta);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 1);
      v.head(d) = std::cos(theta) * e;
      v[d] = -std::sin(theta);
      v = 0.6 * v + 0.8 * fdir;
      s.v = vnorm * v / v.norm();
      s.tau = tau_star;
      s.t_tilde = t0;
      return unit_perturbation_term(f, s);
    };
    const double third =
        (term_at(2 * h) - 2.0 * term_at(h) + 2.0 * term_at(-h) - term_at(-2 * h)) / (2.0 * h * h * h);
    rep.third_derivative = std::max(rep.third_derivative, std::abs(third));
  }
  return rep;
}

}  // namespace kepreg
