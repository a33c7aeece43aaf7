#pragma once

#include <Eigen/Dense>
#include <functional>

#include "kepreg/kepler.hpp"
#include "kepreg/levi_civita.hpp"

namespace kepreg {

// Action-angle variables of the regularized planar problem. Each pair
// (z_i, w_i) is a harmonic oscillator of frequency sqrt(8 tau) / 4 on the
// zero level; I_i are its actions and theta_i its angles. The remaining
// variables are linear combinations:
//   L = I1 + I2, delta = (theta1 + theta2) / 2,
//   J = I1 - I2, gamma = (theta1 - theta2) / 2,
// and t_tilde = t + Re(conj(z) w) / (4 tau).
struct LCActionAngle {
  double I1 = 0.0, I2 = 0.0;
  double theta1 = 0.0, theta2 = 0.0;
  double L = 0.0, delta = 0.0;
  double J = 0.0, gamma = 0.0;
  double tau = 0.0;
  double t_tilde = 0.0;
};

LCActionAngle lc_to_action_angle(const LCState& s);
// Uses I1, I2, theta1, theta2, tau and t_tilde.
LCState lc_from_action_angle(const LCActionAngle& a);
// Fills I and theta from (L, delta, J, gamma).
LCActionAngle action_angle_from_LJ(double L, double delta, double J, double gamma, double tau,
                                   double t_tilde);

double lc_fast_action(const LCState& s);  // L
double lc_t_tilde(const LCState& s);

// Data of the periodic manifold with t-period 1/n of the unforced problem.
struct LambdaData {
  int n = 1;
  double L = 0.0;       // value of the fast action on the manifold
  double tau = 0.0;
  double S = 0.0;       // fictitious period of one prime orbit
  double action = 0.0;  // action of the orbit closing after t-period 1
  double kappa = 0.0;   // n^{-1/3}, the scale used by localization and rescaling
};
LambdaData lambda_n(int n);

struct HessianReport {
  Eigen::MatrixXd hessian;
  double determinant = 0.0;
  bool nondegenerate = false;
};
// Second derivatives by central differences at two step sizes combined by
// Richardson extrapolation.
HessianReport hessian_nondegeneracy(const std::function<double(const Eigen::VectorXd&)>& h,
                                    const Eigen::VectorXd& point, double step1 = 1e-3,
                                    double step2 = 5e-4, double det_tol = 1e-8);

// Delaunay variables. Planar orbits carry a signed G (negative for clockwise
// motion) and leave H, h at zero. Spatial orbits use G = |q x p|,
// H = G cos(inclination) and h = longitude of the node.
struct DelaunayState {
  double L = 0.0, l = 0.0;
  double G = 0.0, g = 0.0;
  double H = 0.0, h = 0.0;
  int dim = 2;
  double t = 0.0;
  double tau = 0.0;
};
DelaunayState delaunay_from_cartesian(const CartesianExtState& s);
CartesianExtState cartesian_from_delaunay(const DelaunayState& d);

// Poincare variables (L, lambda, xi, eta) with lambda = l + g and
// xi + i eta = sqrt(2 (L - G)) exp(-i g). Conjugate pairs are (lambda, L) and
// (eta, xi). Regular at direct circular orbits.
struct PoincareState {
  double L = 0.0, lambda = 0.0;
  double xi = 0.0, eta = 0.0;
  double t = 0.0;
  double tau = 0.0;
};
PoincareState poincare_from_delaunay(const DelaunayState& d);
DelaunayState delaunay_from_poincare(const PoincareState& p);
// Planar states only; goes through equinoctial elements and so stays regular
// at direct circular orbits.
PoincareState poincare_from_cartesian(const CartesianExtState& s);
CartesianExtState cartesian_from_poincare(const PoincareState& p);

// Point of the orbit sphere of a planar bound orbit: eccentricity vector
// and G / sqrt(a) as third coordinate.
Eigen::Vector3d orbit_sphere_point(const CartesianExtState& s);
Eigen::Vector3d orbit_sphere_point(const OrbitalElements& el);

struct OrbitShape {
  double a = 0.0, e = 0.0, g = 0.0, G = 0.0;
};
OrbitShape orbit_sphere_inverse(const Eigen::Vector3d& x, double a);

// Delaunay-like variables whose polar axis on the orbit sphere is `axis`.
// G_tilde = L * height over the axis, g_tilde its azimuth, and
// l_tilde = lambda - area_term - g_tilde where area_term is the signed area
// of the spherical triangle (north pole, axis, orbit point); the area term
// makes the chart symplectic and vanishes for axis = e3.
struct TiltedDelaunay {
  double L = 0.0, l_tilde = 0.0;
  double G_tilde = 0.0, g_tilde = 0.0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double t = 0.0;
  double tau = 0.0;
};
TiltedDelaunay tilted_delaunay(const CartesianExtState& s, const Eigen::Vector3d& axis);
CartesianExtState cartesian_from_tilted(const TiltedDelaunay& td);

// Mean longitude l + g of a planar bound orbit; regular at direct circular
// orbits.
double mean_longitude(const CartesianExtState& s);

}  // namespace kepreg
