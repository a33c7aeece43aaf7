#include "kepreg/levi_civita.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "kepreg/errors.hpp"

namespace kepreg {

std::pair<cplx, cplx> lc_map(cplx z, cplx w) {
  if (z == cplx(0.0, 0.0)) throw CollisionPoint("momentum undefined at z = 0");
  return {z * z, w / (2.0 * std::conj(z))};
}

std::pair<cplx, cplx> lc_inverse(cplx q, cplx p, int branch) {
  if (q == cplx(0.0, 0.0)) throw OriginPoint("no inverse at q = 0");
  cplx z = std::sqrt(q);
  if (branch < 0) z = -z;
  return {z, 2.0 * std::conj(z) * p};
}

std::pair<cplx, cplx> lc_inverse_near(cplx q, cplx p, cplx z_ref) {
  auto r = lc_inverse(q, p, +1);
  if (std::abs(r.first - z_ref) > std::abs(-r.first - z_ref)) return lc_inverse(q, p, -1);
  return r;
}

std::unique_ptr<HamiltonianSystem> lc_system(const ForcingSpec& forcing) {
  if (forcing.dim() != 2) throw InvalidArgument("Levi-Civita regularization needs a planar forcing");
  auto f = [forcing](const auto* x) {
    using S = std::remove_cv_t<std::remove_pointer_t<decltype(x)>>;
    const S& z1 = x[0];
    const S& z2 = x[1];
    const S& t = x[2];
    const S& w1 = x[3];
    const S& w2 = x[4];
    const S& tau = x[5];
    const S r2 = z1 * z1 + z2 * z2;
    S h = 0.125 * (w1 * w1 + w2 * w2) + tau * r2 - 1.0;
    if (!forcing.inactive()) {
      if (value_of(r2) >= forcing.rho()) throw OutsideDomain("|q| outside forcing domain");
      const S q[2] = {z1 * z1 - z2 * z2, 2.0 * (z1 * z2)};
      h = h + r2 * compose_forcing<S>(forcing, q, t);
    }
    return h;
  };
  using F = decltype(f);
  return std::make_unique<JetHamiltonian<F>>(3, std::move(f));
}

Eigen::VectorXd pack_lc(const LCState& s) {
  Eigen::VectorXd x(6);
  x << s.z.real(), s.z.imag(), s.t, s.w.real(), s.w.imag(), s.tau;
  return x;
}

LCState unpack_lc(const Eigen::VectorXd& x) {
  return LCState{cplx(x[0], x[1]), cplx(x[3], x[4]), x[2], x[5]};
}

double lc_hamiltonian(const LCState& s, const ForcingSpec& forcing) {
  return lc_system(forcing)->value(pack_lc(s));
}

LCState lc_vector_field(const LCState& s, const ForcingSpec& forcing) {
  return unpack_lc(lc_system(forcing)->vector_field(pack_lc(s)));
}

LCState lc_from_cartesian(const CartesianExtState& s, int branch) {
  if (s.dim() != 2) throw InvalidArgument("Levi-Civita map needs a planar state");
  const auto [z, w] = lc_inverse(cplx(s.q[0], s.q[1]), cplx(s.p[0], s.p[1]), branch);
  return LCState{z, w, s.t, s.tau};
}

CartesianExtState lc_to_cartesian(const LCState& s) {
  const auto [q, p] = lc_map(s.z, s.w);
  CartesianExtState c;
  c.q = Eigen::Vector2d(q.real(), q.imag());
  c.p = Eigen::Vector2d(p.real(), p.imag());
  c.t = s.t;
  c.tau = s.tau;
  return c;
}

std::vector<LCState> lift_physical_curve(const std::vector<CartesianExtState>& curve, int branch) {
  std::vector<LCState> out;
  out.reserve(curve.size());
  for (const auto& c : curve) {
    const cplx q(c.q[0], c.q[1]), p(c.p[0], c.p[1]);
    const auto zw = out.empty() ? lc_inverse(q, p, branch) : lc_inverse_near(q, p, out.back().z);
    out.push_back(LCState{zw.first, zw.second, c.t, c.tau});
  }
  return out;
}

LCTrajectory integrate_lc(const LCState& state0, const ForcingSpec& forcing, LCStop stop,
                          const LCIntegrateOptions& options) {
  auto sys = lc_system(forcing);
  const Eigen::VectorXd x0 = pack_lc(state0);
  const double h0 = sys->value(x0);
  if (std::abs(h0) > options.level_tol)
    throw InvalidArgument("initial state is off the zero level, H = " + std::to_string(h0));

  std::vector<FlowEvent> events;
  // Minima of |z|^2: d/ds |z|^2 = Re(conj(z) w) / 2 changes sign upwards.
  events.push_back({[](const Eigen::VectorXd& x, double) { return x[0] * x[3] + x[1] * x[4]; }, +1,
                    false});
  double s_end = stop.value;
  if (stop.kind == LCStop::Kind::TimeAdvance) {
    const double target = state0.t + stop.value;
    events.push_back({[target](const Eigen::VectorXd& x, double) { return x[2] - target; }, +1, true});
    s_end = options.s_limit;
  }

  FlowResult fr;
  try {
    fr = integrate_flow(*sys, x0, 0.0, s_end, options.flow, events);
  } catch (const OutsideDomain& e) {
    throw DomainExit(e.what());
  }
  if (stop.kind == LCStop::Kind::TimeAdvance && !fr.terminated)
    throw IntegrationFailure("time advance not reached before the fictitious-time guard");

  LCTrajectory tr;
  tr.forcing = forcing;
  tr.s = fr.s;
  tr.action = fr.action;
  tr.states.reserve(fr.x.size());
  for (const auto& x : fr.x) tr.states.push_back(unpack_lc(x));
  if (tr.s.empty() || tr.s.back() != fr.s_end) {
    tr.s.push_back(fr.s_end);
    tr.states.push_back(unpack_lc(fr.x_end));
    tr.action.push_back(fr.action_end);
  }
  for (const auto& hit : fr.hits) {
    if (hit.event != 0) continue;
    const LCState st = unpack_lc(hit.x);
    if (std::abs(st.z) > options.collision_tol) continue;
    LCCrossing c;
    c.s = hit.s;
    c.t = st.t;
    c.tau = st.tau;
    c.w = st.w;
    c.z_prime = st.w / 4.0;
    c.sample = static_cast<std::size_t>(
        std::upper_bound(tr.s.begin(), tr.s.end(), hit.s) - tr.s.begin());
    tr.crossings.push_back(c);
  }
  return tr;
}

double lc_action(const LCTrajectory& tr) {
  if (tr.action.size() < 2) return 0.0;
  return tr.action.back() - tr.action.front();
}

CollisionLimits collision_limits(const LCTrajectory& tr, const LCCrossing& c) {
  const double speed = std::abs(c.z_prime);
  if (speed < 1e-12) throw TangentialCrossing("z' vanishes at the crossing");
  const cplx u = c.z_prime / speed;
  const cplx dir = u * u;
  CollisionLimits lim;
  lim.direction = Eigen::Vector2d(dir.real(), dir.imag());
  lim.energy = -c.tau;
  if (!tr.forcing.inactive())
    lim.energy -= tr.forcing.epsilon() * tr.forcing.value(Eigen::Vector2d::Zero(), c.t);
  return lim;
}

}  // namespace kepreg
