#include <gtest/gtest.h>

#include <cmath>

#include "kepreg/errors.hpp"
#include "kepreg/orbit_finder.hpp"
#include "kepreg/rtbp.hpp"

using namespace kepreg;

namespace {

PrimaryOrbit primaries(double e) {
  PrimaryOrbit po;
  po.M1 = 1.0;
  po.M2 = 1e-3;
  po.e = e;
  po.g = 0.4;
  return po;
}

}  // namespace

TEST(RTBP, PrimariesKeepTheBarycenterFixed) {
  const PrimaryOrbit po = primaries(0.3);
  for (double t : {0.0, 0.17, 0.5, 0.93}) {
    const PrimaryState s = primary_positions(po, t);
    EXPECT_LT((po.M1 * s.X1 + po.M2 * s.X2).norm(), 1e-15);
    EXPECT_LT((po.M1 * s.V1 + po.M2 * s.V2).norm(), 1e-13);
  }
}

TEST(RTBP, CircularPrimariesHaveConstantSeparationAndUnitPeriod) {
  const PrimaryOrbit po = primaries(0.0);
  const PrimaryState a = primary_positions(po, 0.2);
  const PrimaryState b = primary_positions(po, 1.2);
  EXPECT_LT((a.X1 - b.X1).norm(), 1e-13);
  EXPECT_NEAR((a.X1 - a.X2).norm(), po.semi_major_axis(), 1e-13);
  EXPECT_NEAR(std::pow(po.semi_major_axis(), 3) * 4.0 * M_PI * M_PI, po.total_mass(), 1e-12);
}

TEST(RTBP, PrimariesFollowNewtonianMotion) {
  const PrimaryOrbit po = primaries(0.6);
  for (double t : {0.05, 0.4, 0.77}) {
    const PrimaryState s = primary_positions(po, t);
    const Eigen::VectorXd d = s.X2 - s.X1;
    const double r3 = std::pow(d.norm(), 3);
    EXPECT_LT((s.A1 - po.M2 * d / r3).norm(), 1e-9 * s.A1.norm() + 1e-12);
    EXPECT_LT((s.A2 + po.M1 * d / r3).norm(), 1e-9 * s.A2.norm());
    const double h = 1e-5;
    const Eigen::VectorXd fd = (primary_positions(po, t + h).X1 - primary_positions(po, t - h).X1) / (2 * h);
    EXPECT_LT((fd - s.V1).norm(), 1e-8);
  }
}

TEST(RTBP, ScalingOfTheCenteredPrimary) {
  const PrimaryOrbit po = primaries(0.2);
  const RTBPScaling s = rtbp_scaling(po, 2);
  EXPECT_NEAR(s.ell, std::cbrt(po.M2), 1e-15);
  EXPECT_NEAR(s.mu, po.M1 / po.M2, 1e-12);
  EXPECT_NEAR(s.min_separation, po.semi_major_axis() * 0.8 / s.ell, 1e-13);
  EXPECT_THROW(rtbp_scaling(po, 3), InvalidArgument);
}

TEST(RTBP, ForcingIsNormalizedAndBounded) {
  const PrimaryOrbit po = primaries(0.1);
  const ForcingSpec f = build_rtbp_forcing(po, 1, 1.0, 0.5);
  EXPECT_NEAR(f.rho(), 0.5 * rtbp_scaling(po, 1).min_separation, 1e-14);
  for (double t : {0.0, 0.3, 0.71}) {
    const ForcingJet j = f.jet(Eigen::Vector2d::Zero(), t, 1);
    EXPECT_NEAR(j.value, 0.0, 1e-15);
    EXPECT_LT(j.grad.norm(), 1e-15);
  }
  const ForcingCheckReport rep = check_forcing(f, 200, 2.0);
  EXPECT_LT(rep.max_value_at_origin, 1e-15);
  EXPECT_LT(rep.max_periodicity_defect, 1e-10);
  EXPECT_LT(rep.max_gradient_rel_error, 1e-5);
  EXPECT_LT(rep.max_dt_rel_error, 1e-5);
}

TEST(RTBP, DomainFractionIsValidated) {
  EXPECT_THROW(build_rtbp_forcing(primaries(0.0), 1, 1.0, 0.6), InvalidArgument);
  EXPECT_THROW(build_rtbp_forcing(primaries(0.0), 1, 1.0, 0.0), InvalidArgument);
  PrimaryOrbit bad = primaries(0.0);
  bad.e = 1.0;
  EXPECT_THROW(build_rtbp_forcing(bad, 1, 1.0, 0.5), InvalidArgument);
}

TEST(RTBP, InertialOrbitSatisfiesTheThreeBodyEquations) {
  const PrimaryOrbit po = primaries(0.0);
  ShootingProblem pb;
  pb.forcing = build_rtbp_forcing(po, 1);
  pb.n = 5;
  pb.samples = 256;
  std::vector<double> schedule;
  for (int k = 0; k <= 4; ++k) schedule.push_back(k / 4.0);
  const PeriodicOrbit o = continuation_in_epsilon(pb, schedule).back();
  EXPECT_LT(o.residual, 1e-10);
  EXPECT_LT(o.max_q, o.forcing.rho());
  const InertialReport rep = shift_to_inertial(o, po, 1);
  EXPECT_LT(rep.max_residual, 1e-6);
  EXPECT_LT(rep.periodicity_defect, 1e-8);
  EXPECT_GE(rep.direct_closure, 0.0);
  EXPECT_LT(rep.direct_closure, 1e-6);
  EXPECT_GT(rep.min_other_distance, 0.5 * po.semi_major_axis());
}
