#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "kepreg/flow.hpp"
#include "kepreg/forcing.hpp"
#include "kepreg/kepler.hpp"

namespace kepreg {

// Point of T*S^d on the sphere of radius r = sqrt(2 tau). The t slot is the
// time conjugate to tau on the sphere bundle; the physical time is
// t + v_{d+1} / r (see physical_time).
struct MoserState {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double r = 1.0;
  double t = 0.0;
  double tau = 0.5;

  int dim() const { return static_cast<int>(u.size()) - 1; }
};

// Stereographic coordinates: x plays the role of -p and y of q.
struct StereoState {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double t = 0.0;
  double tau = 0.0;
};

// Unit-sphere picture used for integration; canonical with respect to
// v.du + tau dt_tilde.
struct UnitMoserState {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double t_tilde = 0.0;
  double tau = 0.5;

  int dim() const { return static_cast<int>(u.size()) - 1; }
};

std::pair<Eigen::VectorXd, Eigen::VectorXd> stereo_project(const Eigen::VectorXd& u,
                                                           const Eigen::VectorXd& v, double r);
std::pair<Eigen::VectorXd, Eigen::VectorXd> stereo_inverse(const Eigen::VectorXd& x,
                                                           const Eigen::VectorXd& y, double r);

double moser_hamiltonian(const MoserState& s, const ForcingSpec& forcing);
// Derivative in fictitious time (the r slot of the result holds dr/ds).
MoserState moser_vector_field(const MoserState& s, const ForcingSpec& forcing);

UnitMoserState rescale_to_unit_sphere(const MoserState& s);
MoserState rescale_from_unit_sphere(const UnitMoserState& s);

// |u.u - r^2| + |u.v|, with the unit-sphere state measured at r = 1.
double constraint_defect(const MoserState& s);
double constraint_defect(const UnitMoserState& s);

double physical_time(const UnitMoserState& s);
double physical_distance(const UnitMoserState& s);  // |q| reconstructed from (u, v, tau)

UnitMoserState moser_from_cartesian(const CartesianExtState& s);
CartesianExtState moser_to_cartesian(const UnitMoserState& s);

// Regularized Hamiltonian on [u (d+1), t_tilde, v (d+1), tau], extended off
// the constraint set so that |u| and u.v are first integrals of the ambient flow.
std::unique_ptr<HamiltonianSystem> moser_unit_system(const ForcingSpec& forcing);
Eigen::VectorXd pack_moser(const UnitMoserState& s);
UnitMoserState unpack_moser(const Eigen::VectorXd& x);

struct MoserCrossing {
  double s = 0.0;
  double t = 0.0;
  double tau = 0.0;
  double speed = 0.0;  // |du/ds| at the collision fiber
};

struct MoserTrajectory {
  std::vector<double> s;
  std::vector<UnitMoserState> states;
  std::vector<double> action;
  std::vector<MoserCrossing> crossings;
  double max_constraint_defect = 0.0;
};

struct MoserIntegrateOptions {
  FlowOptions flow;
  double collision_tol = 1e-12;  // 1 - u_{d+1} below this at a maximum of u_{d+1}
  double level_tol = 1e-10;
  double s_limit = 1e6;
};

MoserTrajectory integrate_moser(const UnitMoserState& state0, const ForcingSpec& forcing,
                                StopCondition stop, const MoserIntegrateOptions& options = {});

struct VanishingReport {
  std::vector<double> radii;
  std::vector<double> ratios;  // max |eps |q| U| / (sum u_i^2)^2 per radius
  double c0_fit = 0.0;         // max over all radii
  double third_derivative = 0.0;  // largest |d^3/dtheta^3| of the term at the pole
};
VanishingReport perturbation_vanishing_check(const ForcingSpec& forcing, double tau_star,
                                             double eps_tilde, unsigned seed = 7);

}  // namespace kepreg
