#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

#include "kepreg/jet.hpp"

namespace kepreg {

// Autonomous Hamiltonian on R^{2m} with coordinates laid out as
// [q_1..q_m, p_1..p_m] and symplectic form sum dp_i ^ dq_i, so that
// q' = dH/dp and p' = -dH/dq.
class HamiltonianSystem {
 public:
  virtual ~HamiltonianSystem() = default;
  virtual int dof() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const = 0;
  virtual void hessian(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const = 0;
  // Called after every accepted step; constrained systems pull the state
  // back onto their constraint set here.
  virtual void project(Eigen::VectorXd&) const {}

  Eigen::VectorXd vector_field(const Eigen::VectorXd& x) const;
};

// Adapts a generic callable `f(const S* x) -> S`, written once for double
// and for jets, into a HamiltonianSystem.
template <class F>
class JetHamiltonian : public HamiltonianSystem {
 public:
  JetHamiltonian(int dof, F f) : m_(dof), f_(std::move(f)) {}
  int dof() const override { return m_; }
  double value(const Eigen::VectorXd& x) const override { return f_(x.data()); }
  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const override {
    const auto r = f_(seed<1>(x).data());
    grad = r.g;
  }
  void hessian(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const override {
    const auto r = f_(seed<2>(x).data());
    grad = r.g;
    hess = r.h;
  }

 private:
  template <int O>
  std::vector<Jet<O>> seed(const Eigen::VectorXd& x) const {
    const int n = 2 * m_;
    std::vector<Jet<O>> v(n);
    for (int i = 0; i < n; ++i) v[i] = Jet<O>::variable(x[i], i, n);
    return v;
  }
  int m_;
  F f_;
};

template <class F>
JetHamiltonian<F> make_jet_hamiltonian(int dof, F f) {
  return JetHamiltonian<F>(dof, std::move(f));
}

struct FlowOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  double initial_step = 1e-3;
  double max_step = 0.0;  // 0 means unbounded
  std::size_t max_steps = 20'000'000;
  bool record = true;        // keep every accepted step
  bool variational = false;  // integrate the linearized flow as well
  std::vector<double> output_at;  // fictitious times hit exactly and recorded
  double event_tol = 1e-13;
};

// Event functional g(x, s). Direction +1 fires on - to +, -1 on + to -,
// 0 on either.
struct FlowEvent {
  std::function<double(const Eigen::VectorXd& x, double s)> g;
  int direction = 0;
  bool terminal = false;
};

// How a regularized integration ends: at a fixed fictitious time, or once
// the physical time has advanced by a given amount.
struct StopCondition {
  enum class Kind { FictitiousTime, TimeAdvance };
  Kind kind = Kind::FictitiousTime;
  double value = 0.0;

  static StopCondition at_s(double s) { return {Kind::FictitiousTime, s}; }
  static StopCondition after_time(double dt) { return {Kind::TimeAdvance, dt}; }
};

struct EventHit {
  int event = -1;
  double s = 0.0;
  Eigen::VectorXd x;
  double action = 0.0;
};

struct FlowResult {
  std::vector<double> s;
  std::vector<Eigen::VectorXd> x;
  std::vector<double> action;  // running integral of p . q'
  std::vector<EventHit> hits;
  Eigen::VectorXd x_end;
  double s_end = 0.0;
  double action_end = 0.0;
  Eigen::MatrixXd monodromy;  // D phi at s_end when variational
  bool terminated = false;
  std::size_t steps = 0;
};

FlowResult integrate_flow(const HamiltonianSystem& h, const Eigen::VectorXd& x0, double s0,
                          double s_end, const FlowOptions& options,
                          const std::vector<FlowEvent>& events = {});

// Canonical Poisson matrix for the [q, p] layout.
Eigen::MatrixXd poisson_matrix(int m);
// max |M^T Omega M - Omega|.
double symplectic_defect(const Eigen::MatrixXd& m);

}  // namespace kepreg
