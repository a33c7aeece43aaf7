#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <utility>
#include <vector>

#include "kepreg/flow.hpp"
#include "kepreg/forcing.hpp"
#include "kepreg/kepler.hpp"

namespace kepreg {

using cplx = std::complex<double>;

struct LCState {
  cplx z;
  cplx w;
  double t = 0.0;
  double tau = 0.0;
};

// q = z^2, p = w / (2 conj(z)).
std::pair<cplx, cplx> lc_map(cplx z, cplx w);
// branch = +1 picks the principal square root of q, -1 its negative.
std::pair<cplx, cplx> lc_inverse(cplx q, cplx p, int branch = +1);
// Picks the square root closest to z_ref, continuing a branch along a curve.
std::pair<cplx, cplx> lc_inverse_near(cplx q, cplx p, cplx z_ref);

double lc_hamiltonian(const LCState& s, const ForcingSpec& forcing);
// Derivative with respect to fictitious time.
LCState lc_vector_field(const LCState& s, const ForcingSpec& forcing);

// Regularized Hamiltonian on [z1, z2, t, w1, w2, tau].
std::unique_ptr<HamiltonianSystem> lc_system(const ForcingSpec& forcing);
Eigen::VectorXd pack_lc(const LCState& s);
LCState unpack_lc(const Eigen::VectorXd& x);

LCState lc_from_cartesian(const CartesianExtState& s, int branch = +1);
CartesianExtState lc_to_cartesian(const LCState& s);

// Lifts a physical curve to the regularized plane, keeping z continuous.
std::vector<LCState> lift_physical_curve(const std::vector<CartesianExtState>& curve, int branch = +1);

struct LCCrossing {
  double s = 0.0;
  double t = 0.0;
  double tau = 0.0;
  cplx w;
  cplx z_prime;
  std::size_t sample = 0;  // index of the first trajectory sample after the crossing
};

using LCStop = StopCondition;

struct LCTrajectory {
  ForcingSpec forcing;
  std::vector<double> s;
  std::vector<LCState> states;
  std::vector<double> action;  // running integral of Re(conj(w) z') + tau t'
  std::vector<LCCrossing> crossings;
};

struct LCIntegrateOptions {
  FlowOptions flow;
  double collision_tol = 1e-6;   // |z| below this at a minimum of |z|^2 counts as a collision
  double level_tol = 1e-10;      // admissible |H| of the initial state
  double s_limit = 1e6;          // guard for time-advance stops
};

LCTrajectory integrate_lc(const LCState& state0, const ForcingSpec& forcing, LCStop stop,
                          const LCIntegrateOptions& options = {});

double lc_action(const LCTrajectory& trajectory);

struct CollisionLimits {
  Eigen::Vector2d direction;
  double energy = 0.0;
};
CollisionLimits collision_limits(const LCTrajectory& trajectory, const LCCrossing& crossing);

}  // namespace kepreg
