#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kepreg/coords.hpp"
#include "kepreg/errors.hpp"
#include "kepreg/levi_civita.hpp"

using namespace kepreg;
using cd = std::complex<double>;

namespace {
constexpr double kPi = std::numbers::pi;

void expect_close(cd a, cd b, double tol) { EXPECT_LT(std::abs(a - b), tol) << a << " vs " << b; }
}  // namespace

TEST(LeviCivita, MapExamples) {
  auto [q, p] = lc_map(1.0, cd(0, 2));
  expect_close(q, 1.0, 1e-15);
  expect_close(p, cd(0, 1), 1e-15);
  const cd z = std::polar(1.0, kPi / 4);
  std::tie(q, p) = lc_map(z, 2.0);
  expect_close(q, cd(0, 1), 1e-15);
  expect_close(p, z, 1e-15);
}

TEST(LeviCivita, InverseExamples) {
  auto [z, w] = lc_inverse(1.0, cd(0, 1), +1);
  expect_close(z, 1.0, 1e-15);
  expect_close(w, cd(0, 2), 1e-15);
  std::tie(z, w) = lc_inverse(-1.0, 0.0, +1);
  expect_close(z, cd(0, 1), 1e-15);
  expect_close(w, 0.0, 1e-15);
}

TEST(LeviCivita, HamiltonianOnZeroLevel) {
  LCState s;
  s.z = 0.0;
  s.w = cd(2.0, 2.0);  // |w|^2 = 8
  s.tau = 0.7;
  EXPECT_NEAR(lc_hamiltonian(s, zero_forcing(2)), 0.0, 1e-15);
  s.z = 1.0;
  s.w = 0.0;
  s.tau = 1.0;
  EXPECT_NEAR(lc_hamiltonian(s, zero_forcing(2)), 0.0, 1e-15);
}

TEST(LeviCivita, VectorFieldIsRegularAtCollision) {
  LCState s;
  s.z = 0.0;
  s.w = cd(2.0, 2.0);
  s.tau = 0.7;
  const LCState d = lc_vector_field(s, rotating_linear_forcing(2, 0.1, 1.0));
  expect_close(d.z, s.w / 4.0, 1e-15);
  EXPECT_TRUE(std::isfinite(std::abs(d.w)));
}

TEST(LeviCivita, UnforcedFlowIsHarmonic) {
  // z'' = -(tau/2) z, so z returns after s = 2 pi / sqrt(tau/2).
  LCState s;
  s.tau = 0.5;
  s.z = cd(0.9, 0.0);
  s.w = cd(0.0, std::sqrt(8.0 * (1.0 - s.tau * std::norm(s.z))));
  const double period = 2.0 * kPi / std::sqrt(s.tau / 2.0);
  const LCTrajectory tr = integrate_lc(s, zero_forcing(2), StopCondition::at_s(period));
  expect_close(tr.states.back().z, s.z, 1e-10);
  expect_close(tr.states.back().w, s.w, 1e-10);
  const double quarter = period / 4.0;
  const LCTrajectory q = integrate_lc(s, zero_forcing(2), StopCondition::at_s(quarter));
  EXPECT_NEAR(q.states.back().z.real(), 0.0, 1e-10);
}

TEST(LeviCivita, TimeAdvancesByOneOnLambda1) {
  const LambdaData d = lambda_n(1);
  const double a = 1.0 / (2.0 * d.tau);
  CartesianExtState c;
  c.q = Eigen::Vector2d(a, 0.0);
  c.p = Eigen::Vector2d(0.0, 1.0 / std::sqrt(a));
  c.tau = d.tau;
  const LCTrajectory tr = integrate_lc(lc_from_cartesian(c), zero_forcing(2), StopCondition::at_s(d.S));
  EXPECT_NEAR(tr.states.back().t, 1.0, 1e-9);
  EXPECT_NEAR(lc_action(tr), d.action, 1e-8);
}

TEST(LeviCivita, RectilinearOrbitCrossesOncePerRadialPeriod) {
  CartesianExtState c;
  c.q = Eigen::Vector2d(1.0, 0.0);
  c.p = Eigen::Vector2d(0.0, 0.0);
  c.tau = 1.0;  // energy -1, a = 1/2
  const double radial_period = 2.0 * kPi * std::pow(0.5, 1.5);
  const LCTrajectory tr =
      integrate_lc(lc_from_cartesian(c), zero_forcing(2), StopCondition::after_time(radial_period));
  ASSERT_EQ(tr.crossings.size(), 1u);
  const auto& cr = tr.crossings.front();
  EXPECT_NEAR(cr.tau, 1.0, 1e-12);
  const CollisionLimits lim = collision_limits(tr, cr);
  EXPECT_NEAR(lim.direction[0], 1.0, 1e-10);
  EXPECT_NEAR(lim.direction[1], 0.0, 1e-10);
  EXPECT_DOUBLE_EQ(lim.energy, -cr.tau);
}

TEST(LeviCivita, EllipticOrbitMatchesKeplerSolution) {
  OrbitalElements el;
  el.a = 0.8;
  el.e = 0.6;
  el.g = 1.0;
  el.l = 0.5;
  CartesianExtState c = state_from_elements(el);
  c.tau = -eval_energy(c, zero_forcing(2));
  const LCTrajectory tr = integrate_lc(lc_from_cartesian(c), zero_forcing(2), StopCondition::after_time(el.period()));
  for (const auto& s : tr.states) {
    const CartesianExtState x = lc_to_cartesian(s);
    const CartesianExtState ref = kepler_solve(el, x.t);
    EXPECT_LT((x.q - ref.q).norm(), 1e-8);
  }
}

TEST(LeviCivita, ZeroLengthCurveHasZeroAction) {
  LCTrajectory tr;
  EXPECT_EQ(lc_action(tr), 0.0);
}

TEST(LeviCivita, OffLevelStartIsRejected) {
  LCState s;
  s.z = 1.0;
  s.w = 1.0;
  s.tau = 1.0;
  EXPECT_THROW(integrate_lc(s, zero_forcing(2), StopCondition::at_s(1.0)), Error);
}

TEST(LeviCivita, LiftedCurveStaysOnOneBranch) {
  std::vector<CartesianExtState> curve;
  OrbitalElements el;
  el.a = 1.0;
  el.e = 0.2;
  for (int k = 0; k <= 64; ++k) curve.push_back(kepler_solve(el, 2.0 * kPi * k / 64.0));
  const auto lifted = lift_physical_curve(curve);
  for (std::size_t k = 1; k < lifted.size(); ++k) EXPECT_LT(std::abs(lifted[k].z - lifted[k - 1].z), 0.2);
  // One physical revolution is half a revolution upstairs.
  expect_close(lifted.back().z, -lifted.front().z, 1e-10);
}
