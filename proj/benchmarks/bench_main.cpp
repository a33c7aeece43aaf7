#include <benchmark/benchmark.h>

#include "kepreg/coords.hpp"
#include "kepreg/levi_civita.hpp"
#include "kepreg/orbit_finder.hpp"

using namespace kepreg;

static void BM_KeplerSolve(benchmark::State& state) {
  double acc = 0.0;
  double M = 0.1;
  for (auto _ : state) {
    acc += solve_kepler_equation(M, 0.9);
    M += 1e-3;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_KeplerSolve);

// One t-period of the Levi-Civita flow under rotating forcing.
static void BM_LeviCivitaPeriod(benchmark::State& state) {
  ShootingProblem pb;
  pb.forcing = rotating_linear_forcing(2, 1e-3, 1.0);
  pb.n = static_cast<int>(state.range(0));
  pb.samples = 16;
  const ForcingSpec& f = pb.forcing;
  const LCState s0 = unpack_lc(shoot_periodic(pb, 1.0).x0);
  for (auto _ : state) {
    const LCTrajectory tr = integrate_lc(s0, f, StopCondition::after_time(1.0));
    benchmark::DoNotOptimize(tr.states.back().tau);
  }
}
BENCHMARK(BM_LeviCivitaPeriod)->Arg(1)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_MonodromyOnePeriod(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RegularizedModel model(Regularization::LeviCivita, zero_forcing(2));
  const Eigen::VectorXd x0 = model.seed(n);
  const double S = n * lambda_n(n).S;
  for (auto _ : state) {
    const VariationalResult r = variational_flow(x0, zero_forcing(2), S, Regularization::LeviCivita);
    benchmark::DoNotOptimize(r.monodromy(0, 0));
  }
}
BENCHMARK(BM_MonodromyOnePeriod)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_ShootForced(benchmark::State& state) {
  ShootingProblem pb;
  pb.forcing = rotating_linear_forcing(2, 1e-3, 1.0);
  pb.n = static_cast<int>(state.range(0));
  pb.samples = 128;
  pb.regularization = state.range(1) == 0 ? Regularization::LeviCivita : Regularization::Moser;
  for (auto _ : state) {
    const PeriodicOrbit o = shoot_periodic(pb, 1.0);
    benchmark::DoNotOptimize(o.action);
  }
}
BENCHMARK(BM_ShootForced)->Args({5, 0})->Args({20, 0})->Args({5, 1})->Unit(benchmark::kMillisecond);

static void BM_RabinowitzAction(benchmark::State& state) {
  ShootingProblem pb;
  pb.n = 3;
  pb.samples = static_cast<int>(state.range(0));
  const PeriodicOrbit o = shoot_periodic(pb, 0.0);
  const RegularizedModel model(o.regularization, o.forcing);
  const Loop loop = orbit_loop(o);
  for (auto _ : state) benchmark::DoNotOptimize(rabinowitz_action(loop, o.S, model.system()));
}
BENCHMARK(BM_RabinowitzAction)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

static void BM_ActionBound(benchmark::State& state) {
  ShootingProblem pb;
  pb.forcing = rotating_linear_forcing(2, 1e-3, 1.0);
  pb.n = 5;
  pb.samples = 128;
  const PeriodicOrbit o = shoot_periodic(pb, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(action_bound_check(o, o.forcing).bound);
}
BENCHMARK(BM_ActionBound)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
