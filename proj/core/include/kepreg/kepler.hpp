#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "kepreg/flow.hpp"
#include "kepreg/forcing.hpp"

namespace kepreg {

// Physical state (q, p, t, tau) of the extended phase space.
struct CartesianExtState {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  double t = 0.0;
  double tau = 0.0;

  int dim() const { return static_cast<int>(q.size()); }
};

// Keplerian elements with gravitational parameter 1.
// Planar orbits (dim == 2) use inclination 0 for counter-clockwise motion and
// pi for clockwise motion; g is then the polar angle of the pericenter.
// Spatial orbits (dim == 3) use the usual inclination, ascending node and
// argument of pericenter. The mean anomaly l refers to t = 0.
struct OrbitalElements {
  double a = 1.0;
  double e = 0.0;
  double g = 0.0;
  double l = 0.0;
  double inclination = 0.0;
  double node = 0.0;
  int dim = 2;

  double period() const;
  double mean_motion() const;
};

inline constexpr double kDefaultCollisionFloor = 1e-6;

CartesianExtState cartesian_vector_field(const CartesianExtState& state, const ForcingSpec& forcing,
                                         double collision_floor = kDefaultCollisionFloor);

double eval_energy(const CartesianExtState& state, const ForcingSpec& forcing);
double extended_energy(const CartesianExtState& state, const ForcingSpec& forcing);

// Solves M = E - e sin E by safeguarded Newton iteration.
double solve_kepler_equation(double mean_anomaly, double e);

CartesianExtState kepler_solve(const OrbitalElements& elements, double t);
CartesianExtState state_from_elements(const OrbitalElements& elements);
OrbitalElements elements_from_state(const CartesianExtState& state);

// Extended Hamiltonian F_eps + tau on [q, t, p, tau]; its flow runs in real time.
std::unique_ptr<HamiltonianSystem> cartesian_system(const ForcingSpec& forcing,
                                                    double collision_floor = kDefaultCollisionFloor);

Eigen::VectorXd pack_cartesian(const CartesianExtState& s);
CartesianExtState unpack_cartesian(const Eigen::VectorXd& x);

struct CartesianTrajectory {
  std::vector<CartesianExtState> states;
  std::vector<double> energy;
};

// Integrates over real time [state0.t, t_end]. With stride > 0 samples are
// taken on a uniform time grid, otherwise at every accepted step.
CartesianTrajectory integrate_cartesian(const CartesianExtState& state0, const ForcingSpec& forcing,
                                        double t_end, const FlowOptions& options = {},
                                        double stride = 0.0);

double wrap_angle(double x);  // into [0, 2 pi)

}  // namespace kepreg
