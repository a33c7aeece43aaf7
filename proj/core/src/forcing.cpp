#include "kepreg/forcing.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "kepreg/errors.hpp"

namespace kepreg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class ZeroModel final : public ForcingModel {
 public:
  explicit ZeroModel(int d) : d_(d) {}
  int dim() const override { return d_; }
  ForcingJet evaluate(const Eigen::VectorXd&, double, double, int) const override {
    ForcingJet j;
    j.grad = Eigen::VectorXd::Zero(d_);
    j.hess = Eigen::MatrixXd::Zero(d_, d_);
    j.grad_dt = Eigen::VectorXd::Zero(d_);
    return j;
  }
  std::string name() const override { return "zero"; }
  bool identically_zero() const override { return true; }

 private:
  int d_;
};

class LinearModel final : public ForcingModel {
 public:
  explicit LinearModel(std::vector<TrigSeries> c) : c_(std::move(c)) {}
  int dim() const override { return static_cast<int>(c_.size()); }
  ForcingJet evaluate(const Eigen::VectorXd& q, double t, double, int order) const override {
    const int d = dim();
    ForcingJet j;
    Eigen::VectorXd c(d), ct(d), ctt(d);
    for (int i = 0; i < d; ++i) {
      c[i] = c_[i].eval(t, 0);
      if (order >= 1) ct[i] = c_[i].eval(t, 1);
      if (order >= 2) ctt[i] = c_[i].eval(t, 2);
    }
    j.value = c.dot(q);
    if (order >= 1) {
      j.grad = c;
      j.dt = ct.dot(q);
    }
    if (order >= 2) {
      j.hess = Eigen::MatrixXd::Zero(d, d);
      j.grad_dt = ct;
      j.dtt = ctt.dot(q);
    }
    return j;
  }
  std::string name() const override { return "linear"; }

 private:
  std::vector<TrigSeries> c_;
};

double int_pow(double x, int n) {
  if (n < 0) return 0.0;
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

class PolynomialModel final : public ForcingModel {
 public:
  PolynomialModel(int d, std::vector<PolynomialTerm> terms, double rho)
      : d_(d), terms_(std::move(terms)), rho_(rho) {
    for (const auto& term : terms_) {
      if (static_cast<int>(term.exponents.size()) != d_)
        throw InvalidArgument("polynomial term exponent count differs from dimension");
      for (int e : term.exponents)
        if (e < 0) throw InvalidArgument("negative exponent in polynomial forcing");
    }
  }
  int dim() const override { return d_; }
  double domain_radius() const override { return rho_; }
  std::string name() const override { return "polynomial"; }

  ForcingJet evaluate(const Eigen::VectorXd& q, double t, double, int order) const override {
    ForcingJet j;
    if (order >= 1) {
      j.grad = Eigen::VectorXd::Zero(d_);
    }
    if (order >= 2) {
      j.hess = Eigen::MatrixXd::Zero(d_, d_);
      j.grad_dt = Eigen::VectorXd::Zero(d_);
    }
    for (const auto& term : terms_) {
      const auto& a = term.exponents;
      const double c = term.coefficient.eval(t, 0);
      const double ct = order >= 1 ? term.coefficient.eval(t, 1) : 0.0;
      const double ctt = order >= 2 ? term.coefficient.eval(t, 2) : 0.0;
      const double m = monomial(q, a, -1, -1);
      j.value += c * m;
      if (order >= 1) {
        j.dt += ct * m;
        for (int k = 0; k < d_; ++k) {
          const double mk = monomial(q, a, k, -1);
          j.grad[k] += c * mk;
          if (order >= 2) j.grad_dt[k] += ct * mk;
        }
      }
      if (order >= 2) {
        j.dtt += ctt * m;
        for (int k = 0; k < d_; ++k)
          for (int l = 0; l < d_; ++l) j.hess(k, l) += c * monomial(q, a, k, l);
      }
    }
    return j;
  }

 private:
  // Monomial q^a differentiated once by q_k (k >= 0) and once by q_l (l >= 0).
  double monomial(const Eigen::VectorXd& q, const std::vector<int>& a, int k, int l) const {
    double r = 1.0;
    for (int i = 0; i < d_; ++i) {
      int e = a[i];
      double factor = 1.0;
      if (i == k) {
        factor *= e;
        --e;
      }
      if (i == l) {
        factor *= e;
        --e;
      }
      if (factor == 0.0) return 0.0;
      r *= factor * int_pow(q[i], e);
    }
    return r;
  }

  int d_;
  std::vector<PolynomialTerm> terms_;
  double rho_;
};

class CallbackModel final : public ForcingModel {
 public:
  CallbackModel(int d, ForcingCallback cb, double rho, std::string name)
      : d_(d), cb_(std::move(cb)), rho_(rho), name_(std::move(name)) {}
  int dim() const override { return d_; }
  double domain_radius() const override { return rho_; }
  std::string name() const override { return name_; }

  ForcingJet evaluate(const Eigen::VectorXd& q, double t, double eps, int order) const override {
    const CallbackSample s = cb_(q, t, eps);
    ForcingJet j;
    j.value = s.value;
    if (order >= 1) {
      j.grad = s.grad;
      j.dt = s.dt;
    }
    if (order >= 2) {
      j.hess.resize(d_, d_);
      const double hq = 1e-5 * std::max(1.0, q.norm());
      for (int k = 0; k < d_; ++k) {
        Eigen::VectorXd qp = q, qm = q;
        qp[k] += hq;
        qm[k] -= hq;
        j.hess.col(k) = (cb_(qp, t, eps).grad - cb_(qm, t, eps).grad) / (2.0 * hq);
      }
      j.hess = 0.5 * (j.hess + j.hess.transpose()).eval();
      const double ht = 1e-5;
      const CallbackSample sp = cb_(q, t + ht, eps), sm = cb_(q, t - ht, eps);
      j.grad_dt = (sp.grad - sm.grad) / (2.0 * ht);
      j.dtt = (sp.dt - sm.dt) / (2.0 * ht);
    }
    return j;
  }

 private:
  int d_;
  ForcingCallback cb_;
  double rho_;
  std::string name_;
};

class NormalizedModel final : public ForcingModel {
 public:
  explicit NormalizedModel(std::shared_ptr<const ForcingModel> base) : base_(std::move(base)) {}
  int dim() const override { return base_->dim(); }
  double domain_radius() const override { return base_->domain_radius(); }
  std::string name() const override { return base_->name(); }
  bool identically_zero() const override { return base_->identically_zero(); }

  ForcingJet evaluate(const Eigen::VectorXd& q, double t, double eps, int order) const override {
    ForcingJet j = base_->evaluate(q, t, eps, order);
    const ForcingJet j0 = base_->evaluate(Eigen::VectorXd::Zero(dim()), t, eps, order);
    j.value -= j0.value;
    if (order >= 1) j.dt -= j0.dt;
    if (order >= 2) j.dtt -= j0.dtt;
    return j;
  }

 private:
  std::shared_ptr<const ForcingModel> base_;
};

class ScaledModel final : public ForcingModel {
 public:
  ScaledModel(std::shared_ptr<const ForcingModel> base, double factor)
      : base_(std::move(base)), factor_(factor) {}
  int dim() const override { return base_->dim(); }
  double domain_radius() const override { return base_->domain_radius(); }
  std::string name() const override { return base_->name(); }
  bool identically_zero() const override { return factor_ == 0.0 || base_->identically_zero(); }

  ForcingJet evaluate(const Eigen::VectorXd& q, double t, double eps, int order) const override {
    ForcingJet j = base_->evaluate(q, t, eps, order);
    j.value *= factor_;
    if (order >= 1) {
      j.grad *= factor_;
      j.dt *= factor_;
    }
    if (order >= 2) {
      j.hess *= factor_;
      j.grad_dt *= factor_;
      j.dtt *= factor_;
    }
    return j;
  }

 private:
  std::shared_ptr<const ForcingModel> base_;
  double factor_;
};

}  // namespace

double TrigSeries::eval(double t, int derivative) const {
  double r = derivative == 0 ? c0 : 0.0;
  const std::size_t m = std::max(cos_coeffs.size(), sin_coeffs.size());
  for (std::size_t k = 1; k <= m; ++k) {
    const double w = kTwoPi * static_cast<double>(k);
    const double a = k <= cos_coeffs.size() ? cos_coeffs[k - 1] : 0.0;
    const double b = k <= sin_coeffs.size() ? sin_coeffs[k - 1] : 0.0;
    const double c = std::cos(w * t), s = std::sin(w * t);
    switch (derivative) {
      case 0: r += a * c + b * s; break;
      case 1: r += w * (-a * s + b * c); break;
      case 2: r += -w * w * (a * c + b * s); break;
      default: throw InvalidArgument("TrigSeries derivative order above 2");
    }
  }
  return r;
}

ForcingSpec::ForcingSpec() : model_(std::make_shared<ZeroModel>(2)), epsilon_(0.0) {}

ForcingSpec::ForcingSpec(std::shared_ptr<const ForcingModel> model, double epsilon)
    : model_(std::move(model)), epsilon_(epsilon) {
  if (!model_) throw InvalidArgument("null forcing model");
  if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) throw InvalidArgument("epsilon must lie in [0,1]");
}

double ForcingSpec::value(const Eigen::VectorXd& q, double t) const {
  return model_->evaluate(q, t, epsilon_, 0).value;
}

Eigen::VectorXd ForcingSpec::grad_q(const Eigen::VectorXd& q, double t) const {
  return model_->evaluate(q, t, epsilon_, 1).grad;
}

double ForcingSpec::dt_U(const Eigen::VectorXd& q, double t) const {
  return model_->evaluate(q, t, epsilon_, 1).dt;
}

ForcingJet ForcingSpec::jet(const Eigen::VectorXd& q, double t, int order) const {
  return model_->evaluate(q, t, epsilon_, order);
}

ForcingSpec ForcingSpec::scaled(double factor) const {
  return ForcingSpec(std::make_shared<ScaledModel>(model_, factor), epsilon_);
}

ForcingSpec zero_forcing(int dim) {
  if (dim < 1) throw InvalidArgument("dimension must be >= 1");
  return ForcingSpec(std::make_shared<ZeroModel>(dim), 0.0);
}

ForcingSpec linear_forcing(std::vector<TrigSeries> coefficients, double epsilon) {
  if (coefficients.empty()) throw InvalidArgument("linear forcing needs at least one coefficient");
  return ForcingSpec(std::make_shared<LinearModel>(std::move(coefficients)), epsilon);
}

ForcingSpec rotating_linear_forcing(int dim, double eps0, double epsilon) {
  if (dim < 2) throw InvalidArgument("rotating linear forcing needs dimension >= 2");
  std::vector<TrigSeries> c(dim);
  c[0].cos_coeffs = {eps0};
  c[1].sin_coeffs = {eps0};
  return linear_forcing(std::move(c), epsilon);
}

ForcingSpec polynomial_forcing(int dim, std::vector<PolynomialTerm> terms, double epsilon,
                               double domain_radius) {
  return ForcingSpec(std::make_shared<PolynomialModel>(dim, std::move(terms), domain_radius),
                     epsilon);
}

ForcingSpec callback_forcing(int dim, ForcingCallback callback, double epsilon,
                             double domain_radius, std::string name) {
  if (!callback) throw InvalidArgument("empty forcing callback");
  return ForcingSpec(
      std::make_shared<CallbackModel>(dim, std::move(callback), domain_radius, std::move(name)),
      epsilon);
}

ForcingSpec normalize_forcing(const ForcingSpec& raw) {
  return ForcingSpec(std::make_shared<NormalizedModel>(raw.model()), raw.epsilon());
}

ForcingCheckReport check_forcing(const ForcingSpec& f, int samples, double sample_radius,
                                 unsigned seed) {
  ForcingCheckReport rep;
  const int d = f.dim();
  const double radius = std::min(sample_radius, 0.9 * f.rho());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto random_point = [&](double r_max, bool on_shell) {
    Eigen::VectorXd q(d);
    for (int i = 0; i < d; ++i) q[i] = gauss(rng);
    const double r = on_shell ? r_max : r_max * std::pow(unif(rng), 1.0 / d);
    return Eigen::VectorXd(q * (r / q.norm()));
  };

  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < samples; ++k) {
    const double t = unif(rng);
    const Eigen::VectorXd q = random_point(radius, false);
    rep.max_value_at_origin = std::max(rep.max_value_at_origin, std::abs(f.value(origin, t)));
    rep.max_periodicity_defect =
        std::max(rep.max_periodicity_defect, std::abs(f.value(q, t + 1.0) - f.value(q, t)));

    const ForcingJet j = f.jet(q, t, 1);
    const double h = 1e-6 * std::max(radius, 1e-3);
    Eigen::VectorXd fd(d);
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      fd[i] = (f.value(qp, t) - f.value(qm, t)) / (2.0 * h);
    }
    const double gscale = std::max(j.grad.norm(), 1e-8);
    rep.max_gradient_rel_error = std::max(rep.max_gradient_rel_error, (fd - j.grad).norm() / gscale);
    const double ht = 1e-6;
    const double fdt = (f.value(q, t + ht) - f.value(q, t - ht)) / (2.0 * ht);
    rep.max_dt_rel_error =
        std::max(rep.max_dt_rel_error, std::abs(fdt - j.dt) / std::max(std::abs(j.dt), 1e-8));

    const double small = 1e-3 * radius;
    const Eigen::VectorXd qs = random_point(small, true);
    rep.c0_estimate = std::max(rep.c0_estimate, std::abs(f.value(qs, t)) / small);
  }
  return rep;
}

}  // namespace kepreg
