#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kepreg/flow.hpp"
#include "kepreg/forcing.hpp"
#include "kepreg/kepler.hpp"
#include "kepreg/levi_civita.hpp"

namespace kepreg {

enum class Regularization { LeviCivita, Moser };

std::string to_string(Regularization r);
Regularization regularization_from_string(const std::string& name);

// Uniform access to one regularized extended system: its Hamiltonian, the
// chart back to physical variables and the functions used as phase
// conditions. The state layouts are [z1, z2, t, w1, w2, tau] for
// Levi-Civita and [u (d+1), t_tilde, v (d+1), tau] for Moser.
class RegularizedModel {
 public:
  RegularizedModel(Regularization reg, ForcingSpec forcing);

  Regularization regularization() const { return reg_; }
  const ForcingSpec& forcing() const { return forcing_; }
  const HamiltonianSystem& system() const { return *system_; }
  int dim() const { return dim_; }
  int size() const { return 2 * system_->dof(); }
  int time_index() const;  // slot that advances by exactly 1 over a loop

  Eigen::VectorXd from_cartesian(const CartesianExtState& s) const;
  CartesianExtState to_cartesian(const Eigen::VectorXd& x) const;
  double physical_distance(const Eigen::VectorXd& x) const;
  double physical_time(const Eigen::VectorXd& x) const;

  double fast_action(const Eigen::VectorXd& x) const;
  Eigen::VectorXd fast_action_flow(const Eigen::VectorXd& x) const;
  double t_tilde(const Eigen::VectorXd& x) const;
  Eigen::VectorXd t_tilde_gradient(const Eigen::VectorXd& x) const;

  // Diagonal of the deck transformation relating x(S) and x(0) on a loop of
  // the n-th family, without the unit time shift.
  Eigen::VectorXd deck(int n) const;
  Eigen::VectorXd period_shift() const;

  // Holonomic constraints (Moser only) and their Jacobian.
  Eigen::VectorXd constraints(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd constraint_jacobian(const Eigen::VectorXd& x) const;

  // Circular direct orbit of t-period 1/n through q = a (cos phase, sin phase)
  // at t = 0.
  Eigen::VectorXd seed(int n, double phase = 0.0) const;

  // Collision events: fires at local minima of |q| along the flow.
  FlowEvent collision_event() const;
  bool is_collision(const Eigen::VectorXd& x, double tol) const;

  // d/dt of (q, p) along the flow, from the chain rule through the chart.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> physical_velocity(const Eigen::VectorXd& x) const;

 private:
  Regularization reg_;
  ForcingSpec forcing_;
  int dim_;
  std::unique_ptr<HamiltonianSystem> system_;
  std::unique_ptr<HamiltonianSystem> fast_;
};

struct ShootingProblem {
  Regularization regularization = Regularization::LeviCivita;
  ForcingSpec forcing;  // target epsilon is forcing.epsilon()
  int n = 1;
  double seed_phase = 0.0;
  double tol = 1e-10;
  int max_iter = 40;
  std::vector<double> epsilon_schedule;  // empty: shoot directly at the target
  bool enforce_localization = true;
  int samples = 512;  // uniform samples stored per orbit
  FlowOptions flow;

  void validate() const;
};

struct OrbitCrossing {
  double s = 0.0;
  double t = 0.0;
  double tau = 0.0;
  double energy_limit = 0.0;  // limit of |p|^2/2 - 1/|q|, i.e. -tau - eps U(0, t)
  Eigen::VectorXd direction;
};

struct PeriodicOrbit {
  Regularization regularization = Regularization::LeviCivita;
  ForcingSpec forcing;
  int n = 1;
  int dim = 2;
  double epsilon = 0.0;

  Eigen::VectorXd x0;
  double S = 0.0;  // fictitious period, the multiplier eta
  double action = 0.0;
  double residual = 0.0;
  std::vector<double> residual_history;
  int iterations = 0;

  double energy = 0.0;
  double t_advance = 0.0;
  double kappa = 0.0;  // fast action at x0
  double tau = 0.0;
  double max_q = 0.0;

  Eigen::MatrixXd monodromy;
  std::vector<std::complex<double>> monodromy_spectrum;
  double symplectic_defect = 0.0;

  std::vector<OrbitCrossing> crossings;
  std::vector<double> sample_s;          // uniform grid on [0, S], endpoint included
  std::vector<Eigen::VectorXd> samples;  // regularized states on that grid
  double physical_residual = 0.0;        // ODE residual away from collisions
};

struct VariationalResult {
  Eigen::VectorXd x_end;
  Eigen::MatrixXd monodromy;
};
VariationalResult variational_flow(const Eigen::VectorXd& x0, const ForcingSpec& forcing, double S,
                                   Regularization reg, const FlowOptions& options = {});

// Newton (Levenberg-Marquardt on the SVD, minimum-norm steps) for a loop
// that closes after t-period 1 up to the deck transformation of family n.
PeriodicOrbit shoot_periodic(const ShootingProblem& problem, const Eigen::VectorXd& seed,
                             double S_guess, double epsilon);
// Seeds on the circular representative of the n-th unforced family.
PeriodicOrbit shoot_periodic(const ShootingProblem& problem, double epsilon);

std::vector<PeriodicOrbit> continuation_in_epsilon(const ShootingProblem& problem,
                                                   const std::vector<double>& schedule);

struct SweepEntry {
  int n = 0;
  std::optional<PeriodicOrbit> orbit;
  std::string error;
};
// One solve per n in [n_min, n_max], run on `jobs` threads. Results are
// sorted by n. Uses the problem's epsilon schedule when it is not empty.
std::vector<SweepEntry> sweep_n(const ShootingProblem& problem, int n_min, int n_max, int jobs = 1);

// Discretized loop x_0 .. x_N on the normalized circle with closure
// x_N = deck * x_0 + shift.
struct Loop {
  std::vector<Eigen::VectorXd> points;
  Eigen::VectorXd deck;
  Eigen::VectorXd shift;
};
Loop orbit_loop(const PeriodicOrbit& orbit);

// -integral of the Liouville form p.dq + eta * integral of H over the loop,
// both on the normalized circle. Spectral derivatives; loops with a
// nontrivial deck transformation are doubled first.
double rabinowitz_action(const Loop& loop, double eta, const HamiltonianSystem& h);

struct NeighborhoodSpec {
  double inflation = 0.1;  // relative thickening of the unforced family
  int radial = 24;
  int angular = 48;
  int time = 48;
};

struct ActionBoundReport {
  double lhs = 0.0;
  double bound = 0.0;
  double max_K_plus = 0.0;
  double max_K_minus = 0.0;
  double T_plus = 0.0;
  double action_perturbed = 0.0;
  double action_reference = 0.0;
  double gap = 0.0;  // smallest distance to the neighboring unforced action values
  bool pass = false;
  bool informative = false;
};
// T_plus <= 0 selects 1.001 * max(S, n S_n).
ActionBoundReport action_bound_check(const PeriodicOrbit& orbit, const ForcingSpec& forcing,
                                     const NeighborhoodSpec& V = {}, double T_plus = 0.0);

struct NondegeneracyReport {
  int solution_dim = 0;
  int expected_dim = 0;
  int level_dim = 0;
  bool pass = false;
  std::vector<double> singular_values;
};
NondegeneracyReport monodromy_nondegeneracy_check(const HamiltonianSystem& h, const Eigen::VectorXd& x0,
                                                  double eta, const Eigen::VectorXd& deck,
                                                  const Eigen::MatrixXd& constraint_jacobian,
                                                  int expected_dim, const FlowOptions& options = {});
NondegeneracyReport monodromy_nondegeneracy_check(const PeriodicOrbit& orbit);

// Integrates the Levi-Civita flow from the circular point with L(0) = kappa
// on the zero level until t_tilde has advanced by 1.
LCTrajectory localization_run(const ForcingSpec& forcing, double kappa, int samples = 2000);

struct LocalizationReport {
  double kappa = 0.0;
  double S = 0.0;
  double S_scaled_minus_one = 0.0;  // S kappa^2 / 4 - 1
  double S_dev_over_kappa2 = 0.0;   // (S - 4 / kappa^2) / kappa^2
  bool band_ok = true;
  std::size_t first_violation = 0;
  double max_band_excursion = 0.0;  // max |L - kappa|, |sqrt2/sqrt tau - kappa| over kappa^{3/2}
  double C1_fit = 0.0;              // max |L'| / kappa^4
  double C4_fit = 0.0;              // max |tau'| / kappa^4
  double C5_fit = 0.0;              // max |t_tilde' - kappa^2/4| / kappa^6
  double delta_ratio = 0.0;         // max |delta'| kappa / 3
};
LocalizationReport localization_check(const LCTrajectory& trajectory, double kappa,
                                      bool throw_on_violation = false);

struct RescaledView {
  double kappa = 1.0;
  std::vector<double> L, delta, xi, zeta, tau, t_tilde;  // rescaled coordinates
  double liouville_original = 0.0;  // quadrature of L d delta + J d gamma + tau d t_tilde
  double liouville_rescaled = 0.0;
  double form_ratio_defect = 0.0;   // |rescaled / (kappa^2 original) - 1|
  double max_H_defect_over_kappa4 = 0.0;
};
RescaledView rescale_orbit(const PeriodicOrbit& orbit, double kappa);

}  // namespace kepreg
