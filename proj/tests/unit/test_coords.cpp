#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kepreg/coords.hpp"
#include "kepreg/errors.hpp"

using namespace kepreg;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Coords, ActionAngleAtPositiveAxis) {
  LCState s;
  s.tau = 1.0;
  s.z = std::pow(2.0, -0.25);
  s.w = 0.0;
  const LCActionAngle a = lc_to_action_angle(s);
  EXPECT_NEAR(a.I1, 1.0, 1e-14);
  EXPECT_NEAR(a.theta1, 0.0, 1e-14);
  EXPECT_NEAR(a.I2, 0.0, 1e-14);
}

TEST(Coords, ActionAngleRoundTrip) {
  LCActionAngle a = action_angle_from_LJ(0.9, 0.3, 0.2, -0.4, 1.7, 0.05);
  const LCActionAngle b = lc_to_action_angle(lc_from_action_angle(a));
  EXPECT_NEAR(b.L, 0.9, 1e-14);
  EXPECT_NEAR(b.J, 0.2, 1e-14);
  EXPECT_NEAR(b.delta, 0.3, 1e-14);
  EXPECT_NEAR(b.gamma, -0.4, 1e-14);
  EXPECT_NEAR(b.t_tilde, 0.05, 1e-14);
}

TEST(Coords, LambdaOneClosedForms) {
  const LambdaData d = lambda_n(1);
  EXPECT_NEAR(d.L, std::pow(2.0, 2.0 / 3) * std::pow(kPi, -1.0 / 3), 1e-15);
  EXPECT_NEAR(d.tau, std::pow(2.0, -1.0 / 3) * std::pow(kPi, 2.0 / 3), 1e-15);
  EXPECT_NEAR(d.S, std::pow(2.0 * kPi, 2.0 / 3), 1e-15);
  EXPECT_NEAR(d.action, 3.0 * std::pow(2.0, -1.0 / 3) * std::pow(kPi, 2.0 / 3), 1e-14);
  EXPECT_THROW(lambda_n(0), InvalidArgument);
}

TEST(Coords, ActionGapsScaleLikeNToMinusOneThird) {
  const double target = 2.0 / 3.0 * lambda_n(1).action;
  const double at100 = (lambda_n(101).action - lambda_n(100).action) * std::cbrt(100.0);
  EXPECT_NEAR(at100 / target, 1.0, 0.01);
  for (int n = 1; n < 1000; ++n) EXPECT_GT(lambda_n(n + 1).action, lambda_n(n).action);
}

TEST(Coords, HessianCriterion) {
  auto h0 = [](const Eigen::VectorXd& x) { return std::sqrt(2.0) / 2.0 * x[0] * std::sqrt(x[1]) - 1.0; };
  for (int n : {1, 4, 9}) {
    const LambdaData d = lambda_n(n);
    const HessianReport r = hessian_nondegeneracy(h0, Eigen::Vector2d(d.L, d.tau));
    EXPECT_NEAR(r.determinant, -1.0 / (8.0 * d.tau), 1e-8);
    EXPECT_TRUE(r.nondegenerate);
  }
  auto linear = [](const Eigen::VectorXd& x) { return x[0]; };
  EXPECT_FALSE(hessian_nondegeneracy(linear, Eigen::Vector2d(0.5, 0.5)).nondegenerate);
  auto fast_only = [](const Eigen::VectorXd& x) { return x[0] - 1.0; };
  EXPECT_FALSE(hessian_nondegeneracy(fast_only, Eigen::Vector2d(1.0, 1.7)).nondegenerate);
}

TEST(Coords, DelaunayAtPericenter) {
  OrbitalElements el;
  el.a = 1.0;
  el.e = 0.5;
  const DelaunayState d = delaunay_from_cartesian(state_from_elements(el));
  EXPECT_NEAR(d.L, 1.0, 1e-14);
  EXPECT_NEAR(d.G, std::sqrt(3.0) / 2.0, 1e-14);
  EXPECT_NEAR(std::remainder(d.g, 2 * kPi), 0.0, 1e-14);
  EXPECT_NEAR(std::remainder(d.l, 2 * kPi), 0.0, 1e-14);
}

TEST(Coords, DelaunayRejectsCircularOrbits) {
  CartesianExtState s;
  s.q = Eigen::Vector2d(1.0, 0.0);
  s.p = Eigen::Vector2d(0.0, 1.0);
  EXPECT_THROW(delaunay_from_cartesian(s), CircularOrbit);
}

TEST(Coords, PoincareAtCircularAndEccentricOrbits) {
  CartesianExtState s;
  s.q = Eigen::Vector2d(1.0, 0.0);
  s.p = Eigen::Vector2d(0.0, 1.0);
  const PoincareState p = poincare_from_cartesian(s);
  EXPECT_NEAR(p.xi, 0.0, 1e-14);
  EXPECT_NEAR(p.eta, 0.0, 1e-14);
  EXPECT_NEAR(p.lambda, 0.0, 1e-14);

  DelaunayState d;
  d.L = 1.0;
  d.G = 0.5;
  d.g = kPi / 2.0;
  const PoincareState q = poincare_from_delaunay(d);
  EXPECT_NEAR(q.xi, 0.0, 1e-14);
  EXPECT_NEAR(q.eta, -1.0, 1e-14);
}

TEST(Coords, OrbitSphereSendsCircularToPoleAndRectilinearToEquator) {
  CartesianExtState s;
  s.q = Eigen::Vector2d(1.0, 0.0);
  s.p = Eigen::Vector2d(0.0, 1.0);
  EXPECT_LT((orbit_sphere_point(s) - Eigen::Vector3d(0, 0, 1)).norm(), 1e-13);
  s.p = Eigen::Vector2d(0.3, 0.0);
  const Eigen::Vector3d x = orbit_sphere_point(s);
  EXPECT_NEAR(std::abs(x[0]), 1.0, 1e-13);
  EXPECT_NEAR(x[2], 0.0, 1e-13);
  OrbitalElements el;
  el.e = 0.7;
  el.g = 1.2;
  EXPECT_NEAR(orbit_sphere_point(el).norm(), 1.0, 1e-13);
}

TEST(Coords, UntiltedAxisGivesClassicalVariables) {
  OrbitalElements el;
  el.a = 1.0;
  el.e = 0.5;
  el.g = 0.8;
  el.l = 0.3;
  const CartesianExtState s = state_from_elements(el);
  const DelaunayState d = delaunay_from_cartesian(s);
  const TiltedDelaunay t = tilted_delaunay(s, Eigen::Vector3d::UnitZ());
  EXPECT_NEAR(t.G_tilde, d.G, 1e-12);
  EXPECT_NEAR(std::remainder(t.g_tilde - d.g, 2 * kPi), 0.0, 1e-12);
  EXPECT_NEAR(std::remainder(t.l_tilde - d.l, 2 * kPi), 0.0, 1e-12);
}

TEST(Coords, TiltedAxisCoversCircularOrbit) {
  CartesianExtState s;
  s.q = Eigen::Vector2d(1.0, 0.0);
  s.p = Eigen::Vector2d(0.0, 1.0);
  const double alpha = 0.1;
  const TiltedDelaunay t = tilted_delaunay(s, Eigen::Vector3d(std::sin(alpha), 0.0, std::cos(alpha)));
  EXPECT_NEAR(t.G_tilde, std::cos(alpha), 1e-12);
  EXPECT_LT(t.G_tilde, t.L);
  const CartesianExtState back = cartesian_from_tilted(t);
  EXPECT_LT((back.q - s.q).norm(), 1e-12);
  EXPECT_LT((back.p - s.p).norm(), 1e-12);
}

TEST(Coords, MeanLongitudeIsRegularAtCircularOrbits) {
  CartesianExtState s;
  s.q = Eigen::Vector2d(0.0, 1.0);
  s.p = Eigen::Vector2d(-1.0, 0.0);
  EXPECT_NEAR(mean_longitude(s), kPi / 2.0, 1e-14);
}
