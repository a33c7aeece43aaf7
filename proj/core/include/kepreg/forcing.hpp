#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "kepreg/jet.hpp"

namespace kepreg {

// Value and derivatives of U at one point (q, t). Which members are filled
// depends on the requested order: 0 value only, 1 adds grad and dt,
// 2 adds hess (d x d), grad_dt (d^2 U / dq dt) and dtt.
struct ForcingJet {
  double value = 0.0;
  Eigen::VectorXd grad;
  double dt = 0.0;
  Eigen::MatrixXd hess;
  Eigen::VectorXd grad_dt;
  double dtt = 0.0;
};

class ForcingModel {
 public:
  virtual ~ForcingModel() = default;
  virtual int dim() const = 0;
  virtual ForcingJet evaluate(const Eigen::VectorXd& q, double t, double eps, int order) const = 0;
  virtual double domain_radius() const { return std::numeric_limits<double>::infinity(); }
  virtual std::string name() const = 0;
  virtual bool identically_zero() const { return false; }
};

// Perturbation U(q, t, eps), 1-periodic in t. Immutable value type; the
// underlying model is shared and never modified.
class ForcingSpec {
 public:
  ForcingSpec();
  ForcingSpec(std::shared_ptr<const ForcingModel> model, double epsilon);

  int dim() const { return model_->dim(); }
  double epsilon() const { return epsilon_; }
  double rho() const { return model_->domain_radius(); }
  std::string name() const { return model_->name(); }
  const std::shared_ptr<const ForcingModel>& model() const { return model_; }

  // True when eps * U vanishes identically, so callers may skip evaluation.
  bool inactive() const { return epsilon_ == 0.0 || model_->identically_zero(); }

  double value(const Eigen::VectorXd& q, double t) const;
  Eigen::VectorXd grad_q(const Eigen::VectorXd& q, double t) const;
  double dt_U(const Eigen::VectorXd& q, double t) const;
  ForcingJet jet(const Eigen::VectorXd& q, double t, int order) const;

  ForcingSpec with_epsilon(double epsilon) const { return ForcingSpec(model_, epsilon); }
  // Same model multiplied by a constant factor.
  ForcingSpec scaled(double factor) const;

 private:
  std::shared_ptr<const ForcingModel> model_;
  double epsilon_ = 0.0;
};

// c(t) = c0 + sum_k (a_k cos 2 pi k t + b_k sin 2 pi k t), k = 1, 2, ...
struct TrigSeries {
  double c0 = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double eval(double t, int derivative = 0) const;
};

struct PolynomialTerm {
  std::vector<int> exponents;  // one entry per coordinate
  TrigSeries coefficient;
};

// Callback returns U, grad_q U and dU/dt; second derivatives are obtained
// by central differences of the returned first derivatives.
struct CallbackSample {
  double value = 0.0;
  Eigen::VectorXd grad;
  double dt = 0.0;
};
using ForcingCallback = std::function<CallbackSample(const Eigen::VectorXd& q, double t, double eps)>;

ForcingSpec zero_forcing(int dim);
// U = <c(t), q>.
ForcingSpec linear_forcing(std::vector<TrigSeries> coefficients, double epsilon);
// U = eps0 (q1 cos 2 pi t + q2 sin 2 pi t); needs dim >= 2.
ForcingSpec rotating_linear_forcing(int dim, double eps0, double epsilon = 1.0);
// U = sum_j c_j(t) q^alpha_j.
ForcingSpec polynomial_forcing(int dim, std::vector<PolynomialTerm> terms, double epsilon,
                               double domain_radius = std::numeric_limits<double>::infinity());
ForcingSpec callback_forcing(int dim, ForcingCallback callback, double epsilon,
                             double domain_radius = std::numeric_limits<double>::infinity(),
                             std::string name = "callback");

// U(q, t, eps) - U(0, t, eps).
ForcingSpec normalize_forcing(const ForcingSpec& raw);

// Sampled checks of the ForcingSpec invariants inside the ball of radius
// min(rho, sample_radius).
struct ForcingCheckReport {
  double max_value_at_origin = 0.0;
  double max_periodicity_defect = 0.0;
  double max_gradient_rel_error = 0.0;
  double max_dt_rel_error = 0.0;
  double c0_estimate = 0.0;  // max |U| / |q| over the smallest sampling shell
};
ForcingCheckReport check_forcing(const ForcingSpec& forcing, int samples, double sample_radius,
                                 unsigned seed = 12345);

// eps * U composed with jet-valued arguments (chain rule through q and t).
template <class S>
S compose_forcing(const ForcingSpec& f, const S* q, const S& t);

template <>
inline double compose_forcing<double>(const ForcingSpec& f, const double* q, const double& t) {
  if (f.inactive()) return 0.0;
  Eigen::VectorXd qv = Eigen::Map<const Eigen::VectorXd>(q, f.dim());
  return f.epsilon() * f.value(qv, t);
}

template <class S>
S compose_forcing(const ForcingSpec& f, const S* q, const S& t) {
  const int n = t.size();
  if (f.inactive()) return S::constant(0.0, n);
  const int d = f.dim();
  Eigen::VectorXd qv(d);
  for (int i = 0; i < d; ++i) qv[i] = q[i].v;
  const ForcingJet fj = f.jet(qv, t.v, S::order);
  const double eps = f.epsilon();

  S r;
  r.v = eps * fj.value;
  r.g = fj.dt * t.g;
  for (int i = 0; i < d; ++i) r.g += fj.grad[i] * q[i].g;
  r.g *= eps;
  if constexpr (S::order == 2) {
    r.h = fj.dt * t.h + fj.dtt * (t.g * t.g.transpose());
    for (int i = 0; i < d; ++i) {
      r.h += fj.grad[i] * q[i].h;
      JetMat cross = q[i].g * t.g.transpose();
      r.h += fj.grad_dt[i] * (cross + cross.transpose());
      for (int j = 0; j < d; ++j) r.h += fj.hess(i, j) * (q[i].g * q[j].g.transpose());
    }
    r.h *= eps;
  }
  return r;
}

}  // namespace kepreg
