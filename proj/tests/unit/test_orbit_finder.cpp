#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kepreg/coords.hpp"
#include "kepreg/errors.hpp"
#include "kepreg/orbit_finder.hpp"

using namespace kepreg;

namespace {

ShootingProblem problem(int n, ForcingSpec f = zero_forcing(2), Regularization reg = Regularization::LeviCivita) {
  ShootingProblem pb;
  pb.regularization = reg;
  pb.forcing = std::move(f);
  pb.n = n;
  pb.samples = 128;
  return pb;
}

}  // namespace

TEST(OrbitFinder, RegularizationNames) {
  EXPECT_EQ(regularization_from_string(to_string(Regularization::Moser)), Regularization::Moser);
  EXPECT_EQ(regularization_from_string(to_string(Regularization::LeviCivita)), Regularization::LeviCivita);
  EXPECT_THROW(regularization_from_string("kustaanheimo"), InvalidArgument);
}

TEST(OrbitFinder, VariationalFlowAtZeroTimeIsIdentity) {
  const RegularizedModel m(Regularization::LeviCivita, zero_forcing(2));
  const VariationalResult r = variational_flow(m.seed(1), zero_forcing(2), 0.0, Regularization::LeviCivita);
  EXPECT_LT((r.monodromy - Eigen::MatrixXd::Identity(6, 6)).norm(), 1e-14);
}

TEST(OrbitFinder, MonodromyIsSymplecticWithUnitEigenvalue) {
  const LambdaData d = lambda_n(1);
  const RegularizedModel m(Regularization::LeviCivita, zero_forcing(2));
  const VariationalResult r = variational_flow(m.seed(1), zero_forcing(2), d.S, Regularization::LeviCivita);
  EXPECT_NEAR(r.monodromy.determinant(), 1.0, 1e-8);
  const Eigen::MatrixXd O = poisson_matrix(3);
  EXPECT_LT((r.monodromy.transpose() * O * r.monodromy - O).cwiseAbs().maxCoeff(), 1e-8);
  Eigen::EigenSolver<Eigen::MatrixXd> es(r.monodromy);
  int near_one = 0;
  for (int i = 0; i < 6; ++i) near_one += std::abs(es.eigenvalues()[i] - 1.0) < 1e-5;
  EXPECT_GE(near_one, 2);
}

TEST(OrbitFinder, UnforcedFamiliesMatchClosedForms) {
  for (auto reg : {Regularization::LeviCivita, Regularization::Moser})
    for (int n = 1; n <= 4; ++n) {
      const PeriodicOrbit o = shoot_periodic(problem(n, zero_forcing(2), reg), 0.0);
      const LambdaData d = lambda_n(n);
      EXPECT_LT(o.residual, 1e-10);
      EXPECT_NEAR(o.tau, d.tau, 1e-9);
      EXPECT_NEAR(o.S, n * d.S, 1e-9);
      EXPECT_NEAR(o.action, d.action, 1e-8);
      EXPECT_NEAR(o.t_advance, 1.0, 1e-10);
      EXPECT_TRUE(o.crossings.empty());
    }
}

TEST(OrbitFinder, RabinowitzActionOfUnforcedLoop) {
  const PeriodicOrbit o = shoot_periodic(problem(3), 0.0);
  const RegularizedModel m(o.regularization, o.forcing);
  EXPECT_NEAR(std::abs(rabinowitz_action(orbit_loop(o), o.S, m.system())), lambda_n(3).action, 1e-8);

  Loop constant;
  Eigen::VectorXd x = m.seed(1);
  constant.points.assign(9, x);
  constant.deck = Eigen::VectorXd::Ones(6);
  constant.shift = Eigen::VectorXd::Zero(6);
  EXPECT_NEAR(rabinowitz_action(constant, 0.0, m.system()), 0.0, 1e-14);
}

TEST(OrbitFinder, FarOffLevelSeedFails) {
  const RegularizedModel m(Regularization::LeviCivita, zero_forcing(2));
  Eigen::VectorXd seed = m.seed(2);
  seed *= 5.0;
  EXPECT_THROW(shoot_periodic(problem(2), seed, 1.0, 0.0), Error);
}

TEST(OrbitFinder, ForcedOrbitSatisfiesActionBound) {
  const PeriodicOrbit o = shoot_periodic(problem(5, rotating_linear_forcing(2, 1e-3, 1.0)), 1.0);
  EXPECT_LT(o.residual, 1e-10);
  EXPECT_LT(o.physical_residual, 1e-7);
  const ActionBoundReport r = action_bound_check(o, o.forcing);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.informative);
  EXPECT_LE(r.lhs, r.bound + 1e-9);
}

TEST(OrbitFinder, ActionBoundIsTrivialWithoutForcing) {
  const PeriodicOrbit o = shoot_periodic(problem(2), 0.0);
  const ActionBoundReport r = action_bound_check(o, o.forcing);
  EXPECT_NEAR(r.lhs, 0.0, 1e-9);
  EXPECT_EQ(r.bound, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(OrbitFinder, HugeForcingMakesTheBoundVacuous) {
  const PeriodicOrbit o = shoot_periodic(problem(5, rotating_linear_forcing(2, 1e-3, 1.0)), 1.0);
  const ActionBoundReport small = action_bound_check(o, o.forcing);
  const ActionBoundReport huge = action_bound_check(o, o.forcing.scaled(1e6));
  EXPECT_NEAR(huge.bound / small.bound, 1e6, 1e6 * 1e-6);
  EXPECT_TRUE(huge.pass);
  EXPECT_FALSE(huge.informative);
}

TEST(OrbitFinder, ContinuationWithZeroScheduleKeepsTheOrbit) {
  const auto orbits = continuation_in_epsilon(problem(2), {0.0, 0.0, 0.0});
  ASSERT_EQ(orbits.size(), 3u);
  for (const auto& o : orbits) EXPECT_NEAR(o.action, orbits.front().action, 1e-12);
}

TEST(OrbitFinder, ContinuationFollowsTheForcedFamily) {
  std::vector<double> schedule;
  for (int k = 0; k <= 10; ++k) schedule.push_back(k / 10.0);
  const auto orbits = continuation_in_epsilon(problem(5, rotating_linear_forcing(2, 1e-3, 1.0)), schedule);
  ASSERT_EQ(orbits.size(), schedule.size());
  for (std::size_t k = 1; k < orbits.size(); ++k)
    EXPECT_LT(std::abs(orbits[k].action - orbits[k - 1].action), 1e-3);
}

TEST(OrbitFinder, ContinuationRejectsBadSchedules) {
  EXPECT_THROW(continuation_in_epsilon(problem(2), {0.5, 1.0}), InvalidArgument);
  EXPECT_THROW(continuation_in_epsilon(problem(2), {0.0, 0.6, 0.3}), InvalidArgument);
}

TEST(OrbitFinder, ContinuationReportsWhereItGetsStuck) {
  // A forcing that cannot be evaluated past eps = 0.3 stops every solve there.
  auto cb = [](const Eigen::VectorXd& q, double t, double eps) {
    if (eps > 0.3) throw DomainExit("forcing undefined past 0.3");
    const double c = std::cos(2.0 * std::numbers::pi * t), s = std::sin(2.0 * std::numbers::pi * t);
    CallbackSample out;
    out.value = 1e-3 * (q[0] * c + q[1] * s);
    out.grad = Eigen::Vector2d(1e-3 * c, 1e-3 * s);
    out.dt = 2e-3 * std::numbers::pi * (q[1] * c - q[0] * s);
    return out;
  };
  try {
    continuation_in_epsilon(problem(2, callback_forcing(2, cb, 1.0)), {0.0, 1.0});
    FAIL() << "continuation passed a forcing that cannot be evaluated";
  } catch (const ContinuationStuck& e) {
    EXPECT_LE(e.last_good_epsilon, 0.3);
    EXPECT_GT(e.last_good_epsilon, 0.3 - 1e-4);
  }
}

TEST(OrbitFinder, SweepIsOrderedAndDistinct) {
  const auto entries = sweep_n(problem(1, rotating_linear_forcing(2, 1e-3, 1.0)), 2, 6, 3);
  ASSERT_EQ(entries.size(), 5u);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    EXPECT_EQ(entries[k].n, static_cast<int>(k) + 2);
    ASSERT_TRUE(entries[k].orbit.has_value()) << entries[k].error;
    if (k > 0) {
      EXPECT_GT(entries[k].orbit->action, entries[k - 1].orbit->action);
      EXPECT_LT(entries[k].orbit->max_q, entries[k - 1].orbit->max_q);
    }
    const double scaled = entries[k].orbit->max_q * std::pow(entries[k].n, 2.0 / 3.0);
    EXPECT_GT(scaled, 0.1);
    EXPECT_LT(scaled, 1.0);
  }
  EXPECT_THROW(sweep_n(problem(1), 3, 2), InvalidArgument);
}

TEST(OrbitFinder, MonodromyNondegeneracy) {
  for (int n = 1; n <= 3; ++n) {
    const NondegeneracyReport r = monodromy_nondegeneracy_check(shoot_periodic(problem(n), 0.0));
    EXPECT_TRUE(r.pass) << "n=" << n;
    EXPECT_EQ(r.solution_dim, r.expected_dim);
  }
  ShootingProblem spatial = problem(2, zero_forcing(3), Regularization::Moser);
  EXPECT_TRUE(monodromy_nondegeneracy_check(shoot_periodic(spatial, 0.0)).pass);
}

TEST(OrbitFinder, LocalizationWithoutForcingIsExact) {
  for (double kappa : {0.5, 0.2}) {
    const LocalizationReport r = localization_check(localization_run(zero_forcing(2), kappa), kappa);
    EXPECT_TRUE(r.band_ok);
    EXPECT_NEAR(r.S_dev_over_kappa2, 0.0, 1e-7);
    EXPECT_NEAR(r.C1_fit, 0.0, 1e-8);
  }
}

TEST(OrbitFinder, LocalizationUnderSmallForcing) {
  const ForcingSpec f = rotating_linear_forcing(2, 1e-3, 1.0);
  for (double kappa : {0.2, 0.1}) {
    const LocalizationReport r = localization_check(localization_run(f, kappa), kappa);
    EXPECT_TRUE(r.band_ok);
    EXPECT_LT(std::abs(r.S_dev_over_kappa2), 1e-2);
  }
}

TEST(OrbitFinder, LocalizationViolationUnderHugeForcing) {
  const ForcingSpec f = rotating_linear_forcing(2, 20.0, 1.0);
  const LCTrajectory tr = localization_run(f, 0.5);
  EXPECT_FALSE(localization_check(tr, 0.5).band_ok);
  EXPECT_THROW(localization_check(tr, 0.5, true), BandViolation);
}

TEST(OrbitFinder, RescalingMapsLambdaNToLambdaOne) {
  const int n = 4;
  const PeriodicOrbit o = shoot_periodic(problem(n), 0.0);
  const double kappa = lambda_n(n).kappa;
  const RescaledView v = rescale_orbit(o, kappa);
  for (std::size_t k = 0; k < v.L.size(); k += 16) {
    EXPECT_NEAR(v.L[k], lambda_n(1).L, 1e-9);
    EXPECT_NEAR(v.tau[k], lambda_n(1).tau, 1e-9);
  }
  EXPECT_LT(v.form_ratio_defect, 1e-8);

  const RescaledView id = rescale_orbit(o, 1.0);
  EXPECT_NEAR(id.L.front(), lambda_n(n).L, 1e-9);
  EXPECT_NEAR(id.liouville_rescaled, id.liouville_original, 1e-10);
}
