#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kepreg/forcing.hpp"
#include "kepreg/orbit_finder.hpp"

namespace kepreg {

// Two massive bodies on a Keplerian relative orbit of period 1 about their
// fixed center of mass (G = 1). The relative vector R = X2 - X1 has
// pericenter angle g and mean anomaly mean_anomaly0 at t = 0; spatial runs
// keep the primaries in the plane q3 = 0.
struct PrimaryOrbit {
  double M1 = 1.0;
  double M2 = 1e-3;
  double e = 0.0;
  double g = 0.0;
  double mean_anomaly0 = 0.0;
  int dim = 2;

  void validate() const;
  double total_mass() const { return M1 + M2; }
  double semi_major_axis() const;  // of the relative orbit
};

struct PrimaryState {
  Eigen::VectorXd X1, X2;
  Eigen::VectorXd V1, V2;
  Eigen::VectorXd A1, A2;
};
PrimaryState primary_positions(const PrimaryOrbit& primary, double t);

// Length scale that turns the centered primary into a unit-mass Kepler
// center without touching time: q = ell * q_tilde, p = ell * p_tilde with
// ell = M_c^{1/3}; the other primary then has relative mass mu = M_o / M_c.
struct RTBPScaling {
  int center = 1;
  double ell = 1.0;
  double mu = 0.0;
  double min_separation = 0.0;  // min_t |X1 - X2| / ell
};
RTBPScaling rtbp_scaling(const PrimaryOrbit& primary, int center);

// Forcing of the particle relative to primary `center` in scaled units:
//   U = -mu / |q + D| + mu / |D| - mu q . D / |D|^3,  D = (X_c - X_o) / ell,
// which is the tidal part of the other primary with U(0, t) = 0 and
// grad U(0, t) = 0. The domain ball has radius domain_fraction * min |D|.
ForcingSpec build_rtbp_forcing(const PrimaryOrbit& primary, int center, double epsilon = 1.0,
                               double domain_fraction = 0.5);

struct InertialReport {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> q, p;
  double max_residual = 0.0;        // relative, samples with |q - X_c| < mask excluded
  std::size_t masked = 0;
  double periodicity_defect = 0.0;  // |(q, p)(end) - (q, p)(0)|
  double direct_closure = -1.0;     // direct inertial integration over one period; -1 if skipped
  double max_center_distance = 0.0;
  double min_other_distance = 0.0;
};
// Maps the samples of a periodic orbit found under build_rtbp_forcing back
// to the inertial frame and substitutes them into the full equations
//   q'' = -M1 (q - X1) / |q - X1|^3 - M2 (q - X2) / |q - X2|^3.
// The direct integration is skipped when the orbit passes a collision.
InertialReport shift_to_inertial(const PeriodicOrbit& orbit, const PrimaryOrbit& primary, int center,
                                 double mask_radius = 1e-4);

}  // namespace kepreg
