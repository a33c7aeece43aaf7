#include "kepreg/orbit_finder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>
#include <type_traits>
#include <unsupported/Eigen/FFT>

#include "kepreg/coords.hpp"
#include "kepreg/errors.hpp"
#include "kepreg/moser.hpp"

namespace kepreg {

namespace {

constexpr double kPi = std::numbers::pi;

std::unique_ptr<HamiltonianSystem> fast_action_system(Regularization reg, int d) {
  if (reg == Regularization::LeviCivita) {
    auto f = [](const auto* x) {
      using S = std::remove_cv_t<std::remove_pointer_t<decltype(x)>>;
      const S st = sqrt(x[5]);
      return std::sqrt(2.0) * (0.125 * (x[3] * x[3] + x[4] * x[4]) + x[5] * (x[0] * x[0] + x[1] * x[1])) / st;
    };
    return std::make_unique<JetHamiltonian<decltype(f)>>(3, std::move(f));
  }
  // Twice the norm of the tangential momentum, extended invariantly off the
  // constraint set: |u|^2 |v|^2 - (u.v)^2.
  auto f = [d](const auto* x) {
    using S = std::remove_cv_t<std::remove_pointer_t<decltype(x)>>;
    const S* u = x;
    const S* v = x + d + 2;
    S uu = u[0] * u[0], vv = v[0] * v[0], uv = u[0] * v[0];
    for (int i = 1; i <= d; ++i) {
      uu = uu + u[i] * u[i];
      vv = vv + v[i] * v[i];
      uv = uv + u[i] * v[i];
    }
    return 2.0 * sqrt(uu * vv - uv * uv);
  };
  return std::make_unique<JetHamiltonian<decltype(f)>>(d + 2, std::move(f));
}

Eigen::VectorXd projected(const HamiltonianSystem& h, Eigen::VectorXd x) {
  h.project(x);
  return x;
}

double wrap_pi(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

std::string to_string(Regularization r) {
  return r == Regularization::LeviCivita ? "levi_civita" : "moser";
}

Regularization regularization_from_string(const std::string& name) {
  if (name == "levi_civita" || name == "lc") return Regularization::LeviCivita;
  if (name == "moser") return Regularization::Moser;
  throw InvalidArgument("unknown regularization '" + name + "'");
}

// ---------------------------------------------------------------------------
// RegularizedModel

RegularizedModel::RegularizedModel(Regularization reg, ForcingSpec forcing)
    : reg_(reg), forcing_(std::move(forcing)), dim_(forcing_.dim()) {
  if (reg_ == Regularization::LeviCivita) {
    if (dim_ != 2) throw InvalidArgument("Levi-Civita regularization is planar");
    system_ = lc_system(forcing_);
  } else {
    if (dim_ < 2) throw InvalidArgument("Moser regularization needs dimension >= 2");
    system_ = moser_unit_system(forcing_);
  }
  fast_ = fast_action_system(reg_, dim_);
}

int RegularizedModel::time_index() const { return reg_ == Regularization::LeviCivita ? 2 : dim_ + 1; }

Eigen::VectorXd RegularizedModel::from_cartesian(const CartesianExtState& s) const {
  if (reg_ == Regularization::LeviCivita) return pack_lc(lc_from_cartesian(s));
  return pack_moser(moser_from_cartesian(s));
}

CartesianExtState RegularizedModel::to_cartesian(const Eigen::VectorXd& x) const {
  if (reg_ == Regularization::LeviCivita) return lc_to_cartesian(unpack_lc(x));
  return moser_to_cartesian(unpack_moser(projected(*system_, x)));
}

double RegularizedModel::physical_distance(const Eigen::VectorXd& x) const {
  if (reg_ == Regularization::LeviCivita) return x[0] * x[0] + x[1] * x[1];
  return kepreg::physical_distance(unpack_moser(projected(*system_, x)));
}

double RegularizedModel::physical_time(const Eigen::VectorXd& x) const {
  if (reg_ == Regularization::LeviCivita) return x[2];
  return kepreg::physical_time(unpack_moser(projected(*system_, x)));
}

double RegularizedModel::fast_action(const Eigen::VectorXd& x) const { return fast_->value(x); }

Eigen::VectorXd RegularizedModel::fast_action_flow(const Eigen::VectorXd& x) const {
  return fast_->vector_field(x);
}

double RegularizedModel::t_tilde(const Eigen::VectorXd& x) const {
  if (reg_ == Regularization::LeviCivita) return x[2] + (x[0] * x[3] + x[1] * x[4]) / (4.0 * x[5]);
  return x[dim_ + 1];
}

Eigen::VectorXd RegularizedModel::t_tilde_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(size());
  if (reg_ == Regularization::LeviCivita) {
    const double c = 1.0 / (4.0 * x[5]);
    g << c * x[3], c * x[4], 1.0, c * x[0], c * x[1], -c * (x[0] * x[3] + x[1] * x[4]) / x[5];
  } else {
    g[dim_ + 1] = 1.0;
  }
  return g;
}

Eigen::VectorXd RegularizedModel::deck(int n) const {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(size());
  if (reg_ == Regularization::LeviCivita && (n % 2 != 0)) {
    s[0] = s[1] = s[3] = s[4] = -1.0;
  }
  return s;
}

Eigen::VectorXd RegularizedModel::period_shift() const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(size());
  e[time_index()] = 1.0;
  return e;
}

Eigen::VectorXd RegularizedModel::constraints(const Eigen::VectorXd& x) const {
  if (reg_ == Regularization::LeviCivita) return Eigen::VectorXd(0);
  const int d = dim_;
  const auto u = x.segment(0, d + 1);
  const auto v = x.segment(d + 2, d + 1);
  Eigen::VectorXd c(2);
  c << u.squaredNorm() - 1.0, u.dot(v);
  return c;
}

Eigen::MatrixXd RegularizedModel::constraint_jacobian(const Eigen::VectorXd& x) const {
  if (reg_ == Regularization::LeviCivita) return Eigen::MatrixXd(0, size());
  const int d = dim_;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2, size());
  j.block(0, 0, 1, d + 1) = 2.0 * x.segment(0, d + 1).transpose();
  j.block(1, 0, 1, d + 1) = x.segment(d + 2, d + 1).transpose();
  j.block(1, d + 2, 1, d + 1) = x.segment(0, d + 1).transpose();
  return j;
}

Eigen::VectorXd RegularizedModel::seed(int n, double phase) const {
  const LambdaData ld = lambda_n(n);
  const double a = 0.5 / ld.tau;
  CartesianExtState c;
  c.q = Eigen::VectorXd::Zero(dim_);
  c.p = Eigen::VectorXd::Zero(dim_);
  c.q[0] = a * std::cos(phase);
  c.q[1] = a * std::sin(phase);
  c.p[0] = -std::sin(phase) / std::sqrt(a);
  c.p[1] = std::cos(phase) / std::sqrt(a);
  c.t = 0.0;
  c.tau = ld.tau;
  return from_cartesian(c);
}

FlowEvent RegularizedModel::collision_event() const {
  if (reg_ == Regularization::LeviCivita)
    return {[](const Eigen::VectorXd& x, double) { return x[0] * x[3] + x[1] * x[4]; }, +1, false};
  const HamiltonianSystem* sp = system_.get();
  const int d = dim_;
  return {[sp, d](const Eigen::VectorXd& x, double) { return sp->vector_field(x)[d]; }, -1, false};
}

bool RegularizedModel::is_collision(const Eigen::VectorXd& x, double tol) const {
  return physical_distance(x) < tol;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> RegularizedModel::physical_velocity(
    const Eigen::VectorXd& x) const {
  const Eigen::VectorXd xd = system_->vector_field(x);
  if (reg_ == Regularization::LeviCivita) {
    const cplx z(x[0], x[1]), w(x[3], x[4]);
    const cplx dz(xd[0], xd[1]), dw(xd[3], xd[4]);
    const double dt = xd[2];
    const cplx zc = std::conj(z);
    const cplx dq = 2.0 * z * dz / dt;
    const cplx dp = (dw / (2.0 * zc) - w * std::conj(dz) / (2.0 * zc * zc)) / dt;
    return {Eigen::Vector2d(dq.real(), dq.imag()), Eigen::Vector2d(dp.real(), dp.imag())};
  }
  // Central differences along the straight line x + h X; the constraint
  // defect of the two points is symmetric in h and cancels.
  const double h = 1e-6 / std::max(1.0, xd.norm());
  const Eigen::VectorXd xp = x + h * xd, xm = x - h * xd;
  const CartesianExtState cp = to_cartesian(xp), cm = to_cartesian(xm);
  const double dt = (physical_time(xp) - physical_time(xm)) / (2.0 * h);
  return {(cp.q - cm.q) / (2.0 * h * dt), (cp.p - cm.p) / (2.0 * h * dt)};
}

// ---------------------------------------------------------------------------
// Shooting

void ShootingProblem::validate() const {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  if (samples < 8) throw InvalidArgument("need at least 8 samples per orbit");
  if (regularization == Regularization::LeviCivita && forcing.dim() != 2)
    throw InvalidArgument("Levi-Civita shooting needs a planar forcing");
}

VariationalResult variational_flow(const Eigen::VectorXd& x0, const ForcingSpec& forcing, double S,
                                   Regularization reg, const FlowOptions& options) {
  RegularizedModel model(reg, forcing);
  FlowOptions o = options;
  o.variational = true;
  o.record = false;
  o.output_at.clear();
  const FlowResult fr = integrate_flow(model.system(), x0, 0.0, S, o);
  return {fr.x_end, fr.monodromy};
}

namespace {

void finalize_orbit(PeriodicOrbit& o, const RegularizedModel& model, const ShootingProblem& pb) {
  const HamiltonianSystem& sys = model.system();
  const int N = pb.samples;
  FlowOptions opt = pb.flow;
  opt.variational = true;
  opt.record = true;
  opt.output_at.clear();
  std::vector<double> grid(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k) grid[static_cast<std::size_t>(k)] = o.S * k / N;
  grid.back() = o.S;
  opt.output_at = grid;
  const FlowResult fr = integrate_flow(sys, o.x0, 0.0, o.S, opt, {model.collision_event()});

  std::size_t next = 0;
  o.max_q = 0.0;
  for (std::size_t i = 0; i < fr.s.size(); ++i) {
    o.max_q = std::max(o.max_q, model.physical_distance(fr.x[i]));
    if (next < grid.size() && fr.s[i] == grid[next]) {
      if (o.sample_s.empty() || o.sample_s.back() != fr.s[i]) {
        o.sample_s.push_back(fr.s[i]);
        o.samples.push_back(fr.x[i]);
      }
      ++next;
    }
  }
  if (o.samples.size() != grid.size()) throw IntegrationFailure("orbit sampling grid was not hit exactly");

  o.action = fr.action_end;
  o.monodromy = fr.monodromy;
  o.symplectic_defect = symplectic_defect(o.monodromy);
  Eigen::EigenSolver<Eigen::MatrixXd> es(o.monodromy, false);
  o.monodromy_spectrum.clear();
  for (int i = 0; i < es.eigenvalues().size(); ++i) o.monodromy_spectrum.push_back(es.eigenvalues()[i]);
  std::sort(o.monodromy_spectrum.begin(), o.monodromy_spectrum.end(),
            [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });

  o.energy = sys.value(o.x0);
  o.t_advance = model.physical_time(fr.x_end) - model.physical_time(o.x0);
  o.kappa = model.fast_action(o.x0);
  o.tau = o.x0[o.x0.size() - 1];

  o.crossings.clear();
  for (const auto& hit : fr.hits) {
    if (!model.is_collision(hit.x, 1e-10)) continue;
    OrbitCrossing c;
    c.s = hit.s;
    c.t = model.physical_time(hit.x);
    c.tau = hit.x[hit.x.size() - 1];
    c.energy_limit = -c.tau;
    if (!model.forcing().inactive())
      c.energy_limit -= model.forcing().epsilon() *
                        model.forcing().value(Eigen::VectorXd::Zero(model.dim()), c.t);
    if (model.regularization() == Regularization::LeviCivita) {
      const Eigen::VectorXd xd = sys.vector_field(hit.x);
      cplx u(xd[0], xd[1]);
      if (std::abs(u) > 0.0) {
        u /= std::abs(u);
        const cplx dir = u * u;
        c.direction = Eigen::Vector2d(dir.real(), dir.imag());
      }
    }
    o.crossings.push_back(c);
  }

  o.physical_residual = 0.0;
  for (const auto& x : o.samples) {
    if (model.physical_distance(x) < 1e-4) continue;
    const auto [dq, dp] = model.physical_velocity(x);
    const CartesianExtState c = model.to_cartesian(x);
    const CartesianExtState f = cartesian_vector_field(c, model.forcing(), 0.0);
    const double rq = (dq - f.q).norm() / (1.0 + f.q.norm());
    const double rp = (dp - f.p).norm() / (1.0 + f.p.norm());
    o.physical_residual = std::max({o.physical_residual, rq, rp});
  }
}

}  // namespace

namespace {

// Newton coordinates. Levi-Civita shooting runs in (L, delta, J, gamma,
// t_tilde, tau), where the unforced families are flat and long steps along
// them stay on them; elsewhere the state itself is used.
class ShootingChart {
 public:
  ShootingChart(const RegularizedModel& model, const Eigen::VectorXd& x) : model_(model) {
    if (model.regularization() != Regularization::LeviCivita) return;
    const LCActionAngle a = lc_to_action_angle(unpack_lc(x));
    active_ = std::min(a.I1, a.I2) > 1e-8 * a.L;
  }

  bool active() const { return active_; }

  Eigen::VectorXd to_chart(const Eigen::VectorXd& x) const {
    if (!active_) return x;
    const LCActionAngle a = lc_to_action_angle(unpack_lc(x));
    Eigen::VectorXd c(6);
    c << a.L, a.delta, a.J, a.gamma, a.t_tilde, a.tau;
    return c;
  }

  Eigen::VectorXd to_state(const Eigen::VectorXd& c) const {
    if (!active_) return projected(model_.system(), c);
    if (!(c[5] > 0.0) || !(std::abs(c[2]) < c[0])) throw ChartExit("left the action-angle chart");
    return pack_lc(lc_from_action_angle(action_angle_from_LJ(c[0], c[1], c[2], c[3], c[5], c[4])));
  }

  // d state / d chart at the state x = to_state(c).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& c, const Eigen::VectorXd& x) const {
    const int N = static_cast<int>(c.size());
    if (!active_) return Eigen::MatrixXd::Identity(N, N);
    const double I[2] = {0.5 * (c[0] + c[2]), 0.5 * (c[0] - c[2])};
    const double tau = c[5];
    const double c2 = std::sqrt(2.0 * tau);
    // Columns: I1, I2, theta1, theta2, t_tilde, tau.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 2; ++i) {
      const double z = x[i], w = x[3 + i];
      A(i, i) = z / (2.0 * I[i]);
      A(3 + i, i) = w / (2.0 * I[i]);
      A(i, 2 + i) = w / (2.0 * c2);
      A(3 + i, 2 + i) = -2.0 * c2 * z;
      A(i, 5) = -z / (4.0 * tau);
      A(3 + i, 5) = w / (4.0 * tau);
    }
    const double P = x[0] * x[3] + x[1] * x[4];
    for (int k = 0; k < 6; ++k) {
      const double dP = x[3] * A(0, k) + x[4] * A(1, k) + x[0] * A(3, k) + x[1] * A(4, k);
      A(2, k) = -dP / (4.0 * tau);
    }
    A(2, 4) += 1.0;
    A(2, 5) += P / (4.0 * tau * tau);
    A(5, 5) = 1.0;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 6);
    B(0, 0) = B(1, 0) = 0.5;
    B(0, 2) = 0.5;
    B(1, 2) = -0.5;
    B(2, 1) = B(3, 1) = 1.0;
    B(2, 3) = 1.0;
    B(3, 3) = -1.0;
    B(4, 4) = B(5, 5) = 1.0;
    return A * B;
  }

 private:
  const RegularizedModel& model_;
  bool active_ = false;
};

}  // namespace

PeriodicOrbit shoot_periodic(const ShootingProblem& pb, const Eigen::VectorXd& seed_in, double S_guess,
                             double epsilon) {
  pb.validate();
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0,1]");
  if (!(S_guess > 0.0)) throw InvalidArgument("period guess must be positive");
  const ForcingSpec forcing = pb.forcing.with_epsilon(epsilon);
  const RegularizedModel model(pb.regularization, forcing);
  const HamiltonianSystem& sys = model.system();
  const int N = model.size();
  if (seed_in.size() != N) throw InvalidArgument("seed has the wrong dimension");

  const Eigen::VectorXd x_seed = projected(sys, seed_in);
  const bool phase = forcing.inactive();
  const Eigen::VectorXd V = phase ? model.fast_action_flow(x_seed) : Eigen::VectorXd();
  const Eigen::VectorXd deck = model.deck(pb.n);
  const Eigen::VectorXd shift = model.period_shift();
  const LambdaData ld = lambda_n(pb.n);
  const double band = std::pow(ld.L, 1.5);

  const Eigen::Index rows = N + 2 + (phase ? 1 : 0) + model.constraints(x_seed).size();
  FlowOptions fo = pb.flow;
  fo.variational = true;
  fo.record = false;
  fo.output_at.clear();
  // Wild trial iterates can otherwise spend minutes in a single integration.
  fo.max_steps = std::min<std::size_t>(fo.max_steps, 400'000);
  const double S_cap = 8.0 * std::max(S_guess, pb.n * ld.S);

  const ShootingChart chart(model, x_seed);
  auto evaluate = [&](const Eigen::VectorXd& y, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    const Eigen::VectorXd x0 = chart.to_state(y.head(N));
    const double S = y[N];
    const FlowResult fr = integrate_flow(sys, x0, 0.0, S, fo);
    r.setZero(rows);
    J.setZero(rows, N + 1);
    r.head(N) = fr.x_end - deck.cwiseProduct(x0) - shift;
    J.topLeftCorner(N, N) = fr.monodromy;
    J.topLeftCorner(N, N).diagonal() -= deck;
    J.block(0, N, N, 1) = sys.vector_field(fr.x_end);
    Eigen::Index row = N;
    Eigen::VectorXd g;
    sys.gradient(x0, g);
    r[row] = sys.value(x0);
    J.block(row, 0, 1, N) = g.transpose();
    ++row;
    r[row] = wrap_pi(2.0 * kPi * model.t_tilde(x0)) / (2.0 * kPi);
    J.block(row, 0, 1, N) = model.t_tilde_gradient(x0).transpose();
    ++row;
    if (phase) {
      r[row] = (x0 - x_seed).dot(V);
      J.block(row, 0, 1, N) = V.transpose();
      ++row;
    }
    const Eigen::VectorXd c = model.constraints(x0);
    if (c.size() > 0) {
      r.segment(row, c.size()) = c;
      J.block(row, 0, c.size(), N) = model.constraint_jacobian(x0);
    }
    if (chart.active()) J.leftCols(N) = J.leftCols(N) * chart.jacobian(y.head(N), x0);
  };

  Eigen::VectorXd y(N + 1);
  y.head(N) = chart.to_chart(x_seed);
  y[N] = S_guess;
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  auto to_vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  try {
    evaluate(y, r, J);
  } catch (const Error& e) {
    throw NoConvergence(std::string("initial evaluation failed: ") + e.what(), to_vec(x_seed), {});
  }
  std::vector<double> history{r.norm()};
  // Undamped Gauss-Newton steps are accepted even when the residual grows a
  // little, since long moves along a nearly degenerate family can pass
  // through worse points. A watchdog limits such excursions; after that the
  // iteration falls back to damped steps from the best point seen so far.
  constexpr double kWatchdog = 1e6;
  constexpr int kMaxExcursion = 8;
  Eigen::VectorXd y_best = y;
  Eigen::VectorXd r_best = r;
  Eigen::MatrixXd J_best = J;
  int excursion = 0;
  bool allow_excursion = true;
  double mu = 0.0;
  int iter = 0;
  auto try_step = [&](const Eigen::VectorXd& delta, Eigen::VectorXd& y_new, Eigen::VectorXd& r_new,
                      Eigen::MatrixXd& J_new) {
    y_new = y + delta;
    if (!chart.active()) y_new.head(N) = projected(sys, y_new.head(N));
    if (!(y_new[N] > 0.0) || y_new[N] > S_cap) return false;
    try {
      evaluate(y_new, r_new, J_new);
    } catch (const Error&) {
      return false;
    }
    return std::isfinite(r_new.norm());
  };
  for (; iter < pb.max_iter && r_best.norm() >= pb.tol; ++iter) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sig = svd.singularValues();
    const double smax = sig.size() > 0 ? sig[0] : 0.0;
    if (!(smax > 0.0)) break;
    const double cutoff = 1e-13 * smax;
    const Eigen::VectorXd utr = svd.matrixU().transpose() * r;
    auto step = [&](double damping) {
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(N + 1);
      for (Eigen::Index i = 0; i < sig.size(); ++i) {
        if (sig[i] <= cutoff) continue;
        delta -= (sig[i] / (sig[i] * sig[i] + damping)) * utr[i] * svd.matrixV().col(i);
      }
      return delta;
    };
    Eigen::VectorXd y_new, r_new;
    Eigen::MatrixXd J_new;
    bool accepted = false;
    if (mu == 0.0 && excursion < kMaxExcursion && try_step(step(0.0), y_new, r_new, J_new) &&
        (r_new.norm() < r.norm() || (allow_excursion && r_new.norm() < kWatchdog * r_best.norm()))) {
      accepted = true;
    } else {
      if (excursion >= kMaxExcursion || r.norm() > r_best.norm()) {
        y = y_best;
        r = r_best;
        J = J_best;
        excursion = 0;
        allow_excursion = false;
        mu = 1e-8 * smax * smax;
        continue;
      }
      for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
        mu = mu == 0.0 ? 1e-8 * smax * smax : mu * 10.0;
        accepted = try_step(step(mu), y_new, r_new, J_new) && r_new.norm() < r.norm();
      }
      if (accepted) mu = mu * 0.1 < 1e-6 * smax * smax ? 0.0 : mu * 0.1;
    }
    if (!accepted) break;
    y = y_new;
    r = r_new;
    J = J_new;
    history.push_back(r.norm());
    if (r.norm() < r_best.norm()) {
      y_best = y;
      r_best = r;
      J_best = J;
      excursion = 0;
      allow_excursion = true;
    } else {
      ++excursion;
    }
    if (pb.enforce_localization) {
      const double L = model.fast_action(chart.to_state(y.head(N)));
      if (std::abs(L - ld.L) >= band)
        throw LeftLocalization("fast action " + std::to_string(L) + " left the band around " +
                               std::to_string(ld.L));
    }
  }
  y = y_best;
  r = r_best;
  J = J_best;
  // A couple of extra undamped steps once converged; kept only if they help.
  for (int polish = 0; polish < 2 && r.norm() < pb.tol; ++polish) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sig = svd.singularValues();
    if (sig.size() == 0 || !(sig[0] > 0.0)) break;
    const Eigen::VectorXd utr = svd.matrixU().transpose() * r;
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(N + 1);
    for (Eigen::Index i = 0; i < sig.size(); ++i)
      if (sig[i] > 1e-6 * sig[0]) delta -= (utr[i] / sig[i]) * svd.matrixV().col(i);
    Eigen::VectorXd y_new, r_new;
    Eigen::MatrixXd J_new;
    if (!try_step(delta, y_new, r_new, J_new) || !(r_new.norm() < r.norm())) break;
    y = y_new;
    r = r_new;
    J = J_new;
    history.push_back(r.norm());
  }
  if (!(r.norm() < pb.tol))
  {
    Eigen::VectorXd best(N + 1);
    best.head(N) = chart.to_state(y.head(N));
    best[N] = y[N];
    throw NoConvergence("residual " + std::to_string(r.norm()) + " after " + std::to_string(iter) +
                            " iterations",
                        to_vec(best), history);
  }

  PeriodicOrbit o;
  o.regularization = pb.regularization;
  o.forcing = forcing;
  o.n = pb.n;
  o.dim = model.dim();
  o.epsilon = epsilon;
  o.x0 = chart.to_state(y.head(N));
  o.S = y[N];
  o.residual = r.norm();
  o.residual_history = history;
  o.iterations = iter;
  finalize_orbit(o, model, pb);
  return o;
}

namespace {

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x0, double step, int max_iter, double ftol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];
    if (std::abs(fv[worst] - fv[best]) <= ftol * (std::abs(fv[best]) + 1e-300)) break;
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) c[k] += pts[i][k] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = c[k] + t * (pts[worst][k] - c[k]);
      return x;
    };
    const std::vector<double> xr = along(-1.0);
    const double fr = f(xr);
    if (fr < fv[best]) {
      const std::vector<double> xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      const std::vector<double> xc = along(0.5);
      const double fc = f(xc);
      if (fc < fv[worst]) {
        pts[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }
  return pts[static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin())];
}

// Seeds for forced Levi-Civita shooting: critical points of the perturbation
// averaged over the unforced loops of the n-th family. A loop through
// (J, gamma, delta) at t_tilde = 0 is explicit in action-angle form, with
// both angles advancing at rate sqrt(tau / 2).
std::vector<Eigen::VectorXd> averaged_seeds(const ForcingSpec& forcing, int n, std::size_t max_seeds) {
  const LambdaData ld = lambda_n(n);
  const auto forced = lc_system(forcing);
  const auto free = lc_system(zero_forcing(2));
  const double omega = std::sqrt(0.5 * ld.tau);
  const double rate = ld.L / (2.0 * std::sqrt(2.0 * ld.tau));
  const double S = n * ld.S;
  constexpr int kSamples = 64;
  auto point = [&](double u, double gamma, double delta) {
    return action_angle_from_LJ(ld.L, delta, ld.L * std::sin(u), gamma, ld.tau, 0.0);
  };
  auto averaged = [&](double u, double gamma, double delta) -> std::optional<double> {
    const LCActionAngle a0 = point(u, gamma, delta);
    double sum = 0.0;
    try {
      for (int k = 0; k < kSamples; ++k) {
        LCActionAngle a = a0;
        const double s = S * k / kSamples;
        a.theta1 += omega * s;
        a.theta2 += omega * s;
        a.t_tilde += rate * s;
        const Eigen::VectorXd x = pack_lc(lc_from_action_angle(a));
        sum += forced->value(x) - free->value(x);
      }
    } catch (const OutsideDomain&) {
      return std::nullopt;
    }
    return sum / kSamples;
  };

  constexpr int NU = 9, NG = 12, ND = 12;
  auto u_at = [](int i) { return -1.3 + 2.6 * i / (NU - 1); };
  auto g_at = [](int j) { return kPi * j / NG; };
  auto d_at = [](int k) { return 2.0 * kPi * k / ND; };
  std::vector<std::optional<double>> grid(NU * NG * ND);
  auto at = [&](int i, int j, int k) -> std::optional<double>& {
    return grid[static_cast<std::size_t>((i * NG + ((j % NG) + NG) % NG) * ND + ((k % ND) + ND) % ND)];
  };
  for (int i = 0; i < NU; ++i)
    for (int j = 0; j < NG; ++j)
      for (int k = 0; k < ND; ++k) at(i, j, k) = averaged(u_at(i), g_at(j), d_at(k));

  struct Candidate {
    double prominence;
    double sign;
    std::vector<double> x;
  };
  std::vector<Candidate> cands;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : grid)
    if (v) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  if (!(hi > lo)) return {};
  for (int i = 0; i < NU; ++i)
    for (int j = 0; j < NG; ++j)
      for (int k = 0; k < ND; ++k) {
        const auto& v = at(i, j, k);
        if (!v) continue;
        bool is_min = true, is_max = true;
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj)
            for (int dk = -1; dk <= 1; ++dk) {
              if (!di && !dj && !dk) continue;
              if (i + di < 0 || i + di >= NU) continue;
              const auto& w = at(i + di, j + dj, k + dk);
              if (!w) continue;
              if (*w < *v) is_min = false;
              if (*w > *v) is_max = false;
            }
        if (is_min) cands.push_back({(*v - lo) / (hi - lo), 1.0, {u_at(i), g_at(j), d_at(k)}});
        if (is_max) cands.push_back({(hi - *v) / (hi - lo), -1.0, {u_at(i), g_at(j), d_at(k)}});
      }
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.prominence < b.prominence; });
  if (cands.size() > max_seeds) cands.resize(max_seeds);

  std::vector<Eigen::VectorXd> seeds;
  for (const auto& c : cands) {
    auto objective = [&](const std::vector<double>& x) {
      const auto v = averaged(x[0], x[1], x[2]);
      return v ? c.sign * *v : 1e300;
    };
    const std::vector<double> x = nelder_mead(objective, c.x, 0.1, 400, 1e-13);
    seeds.push_back(pack_lc(lc_from_action_angle(point(x[0], x[1], x[2]))));
  }
  return seeds;
}

}  // namespace

PeriodicOrbit shoot_periodic(const ShootingProblem& pb, double epsilon) {
  pb.validate();
  const RegularizedModel model(pb.regularization, pb.forcing.with_epsilon(0.0));
  const LambdaData ld = lambda_n(pb.n);
  const double S_guess = pb.n * ld.S;
  try {
    return shoot_periodic(pb, model.seed(pb.n, pb.seed_phase), S_guess, epsilon);
  } catch (const Error&) {
    const ForcingSpec forced = pb.forcing.with_epsilon(epsilon);
    if (pb.regularization != Regularization::LeviCivita || forced.inactive()) throw;
    for (const Eigen::VectorXd& seed : averaged_seeds(forced, pb.n, 8)) {
      try {
        return shoot_periodic(pb, seed, S_guess, epsilon);
      } catch (const Error&) {
      }
    }
    throw;
  }
}

std::vector<PeriodicOrbit> continuation_in_epsilon(const ShootingProblem& pb,
                                                   const std::vector<double>& schedule) {
  if (schedule.empty() || schedule.front() != 0.0)
    throw InvalidArgument("epsilon schedule must start at 0");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] < schedule[i - 1] || schedule[i] > 1.0)
      throw InvalidArgument("epsilon schedule must be nondecreasing within [0,1]");

  std::vector<PeriodicOrbit> out;
  PeriodicOrbit cur = shoot_periodic(pb, 0.0);
  out.push_back(cur);
  double eps_good = 0.0;
  constexpr double kFloor = 1e-6;
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    const double target = schedule[i];
    double step = target - eps_good;
    bool reached = false;
    while (!reached) {
      const double trial = step >= target - eps_good ? target : eps_good + step;
      try {
        cur = shoot_periodic(pb, cur.x0, cur.S, trial);
        eps_good = trial;
        reached = trial == target;
        step *= 2.0;
      } catch (const Error& e) {
        step *= 0.5;
        if (step < kFloor)
          throw ContinuationStuck(std::string("step fell below floor: ") + e.what(), eps_good);
      }
    }
    out.push_back(cur);
  }
  return out;
}

std::vector<SweepEntry> sweep_n(const ShootingProblem& pb, int n_min, int n_max, int jobs) {
  if (n_min < 1 || n_max < n_min) throw InvalidArgument("empty or invalid n range");
  const int count = n_max - n_min + 1;
  std::vector<SweepEntry> out(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int k = next++; k < count; k = next++) {
      SweepEntry& e = out[static_cast<std::size_t>(k)];
      e.n = n_min + k;
      ShootingProblem p = pb;
      p.n = e.n;
      try {
        if (!p.epsilon_schedule.empty())
          e.orbit = continuation_in_epsilon(p, p.epsilon_schedule).back();
        else
          e.orbit = shoot_periodic(p, p.forcing.epsilon());
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  };
  const int nt = std::clamp(jobs, 1, count);
  std::vector<std::thread> threads;
  for (int i = 1; i < nt; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return out;
}

// ---------------------------------------------------------------------------
// Actions

Loop orbit_loop(const PeriodicOrbit& orbit) {
  const RegularizedModel model(orbit.regularization, orbit.forcing);
  return Loop{orbit.samples, model.deck(orbit.n), model.period_shift()};
}

namespace {

std::vector<double> spectral_derivative(const std::vector<double>& y, double period) {
  const std::size_t m = y.size();
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, y);
  for (std::size_t k = 0; k < m; ++k) {
    const double kk = k <= m / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(m);
    if (m % 2 == 0 && k == m / 2) {
      spec[k] = 0.0;
      continue;
    }
    spec[k] *= std::complex<double>(0.0, 2.0 * kPi * kk / period);
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return out;
}

}  // namespace

double rabinowitz_action(const Loop& loop, double eta, const HamiltonianSystem& h) {
  const std::size_t N = loop.points.size() - 1;
  if (loop.points.size() < 3) throw InvalidArgument("loop needs at least three points");
  const Eigen::Index n = loop.points.front().size();
  if (loop.deck.size() != n || loop.shift.size() != n) throw InvalidArgument("deck or shift size mismatch");
  const Eigen::VectorXd& x0 = loop.points.front();
  const Eigen::VectorXd closure = loop.points.back() - loop.deck.cwiseProduct(x0) - loop.shift;
  if (closure.norm() > 1e-10 * std::max(1.0, x0.norm()))
    throw OpenLoop("loop endpoints differ by " + std::to_string(closure.norm()));

  const bool doubled = (loop.deck.array() != 1.0).any();
  const std::size_t M = doubled ? 2 * N : N;
  const double period = doubled ? 2.0 : 1.0;
  std::vector<Eigen::VectorXd> pts(M);
  for (std::size_t k = 0; k < N; ++k) pts[k] = loop.points[k];
  if (doubled)
    for (std::size_t k = 0; k < N; ++k) pts[N + k] = loop.deck.cwiseProduct(loop.points[k]) + loop.shift;

  const Eigen::Index m = n / 2;
  std::vector<std::vector<double>> dq(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<double> yi(M);
    for (std::size_t k = 0; k < M; ++k)
      yi[k] = pts[k][i] - (static_cast<double>(k) / N) * loop.shift[i];
    dq[static_cast<std::size_t>(i)] = spectral_derivative(yi, period);
  }
  double liouville = 0.0;
  for (std::size_t k = 0; k < M; ++k)
    for (Eigen::Index i = 0; i < m; ++i)
      liouville += pts[k][m + i] * (dq[static_cast<std::size_t>(i)][k] + loop.shift[i]);
  liouville /= static_cast<double>(M);

  double hmean = 0.0;
  for (std::size_t k = 0; k < N; ++k) hmean += h.value(loop.points[k]);
  hmean /= static_cast<double>(N);
  return -liouville + eta * hmean;
}

ActionBoundReport action_bound_check(const PeriodicOrbit& orbit, const ForcingSpec& forcing,
                                     const NeighborhoodSpec& V, double T_plus) {
  const RegularizedModel model(orbit.regularization, forcing);
  const LambdaData ld = lambda_n(orbit.n);
  ActionBoundReport rep;
  rep.T_plus = T_plus > 0.0 ? T_plus : 1.001 * std::max(orbit.S, orbit.n * ld.S);
  rep.action_reference = -ld.action;
  rep.action_perturbed = rabinowitz_action(orbit_loop(orbit), orbit.S, model.system());
  rep.lhs = std::abs(rep.action_perturbed - rep.action_reference);

  // K = |q| eps U(q, t) depends only on (q, t); the thickened family
  // projects onto the ball of radius 2a (1 + inflation).
  if (!forcing.inactive()) {
    const int d = forcing.dim();
    double radius = (1.0 / ld.tau) * (1.0 + V.inflation);
    if (std::isfinite(forcing.rho())) radius = std::min(radius, forcing.rho() * (1.0 - 1e-9));
    std::vector<Eigen::VectorXd> dirs;
    if (d == 2) {
      for (int k = 0; k < V.angular; ++k) {
        const double a = 2.0 * kPi * k / V.angular;
        dirs.push_back(Eigen::Vector2d(std::cos(a), std::sin(a)));
      }
    } else {
      const double golden = kPi * (3.0 - std::sqrt(5.0));
      const int cnt = V.angular * V.angular / 4;
      for (int k = 0; k < cnt; ++k) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
        const double z = 1.0 - 2.0 * (k + 0.5) / cnt;
        const double rr = std::sqrt(1.0 - z * z);
        u[0] = rr * std::cos(golden * k);
        u[1] = rr * std::sin(golden * k);
        u[2] = z;
        dirs.push_back(u);
      }
    }
    for (int i = 1; i <= V.radial; ++i) {
      const double r = radius * i / V.radial;
      for (const auto& u : dirs) {
        const Eigen::VectorXd q = r * u;
        for (int j = 0; j < V.time; ++j) {
          const double t = static_cast<double>(j) / V.time;
          const double K = r * forcing.epsilon() * forcing.value(q, t);
          rep.max_K_plus = std::max(rep.max_K_plus, K);
          rep.max_K_minus = std::max(rep.max_K_minus, -K);
        }
      }
    }
  }
  rep.bound = rep.T_plus * (rep.max_K_plus + rep.max_K_minus);
  rep.pass = rep.lhs <= rep.bound * (1.0 + 1e-6) + 1e-9;
  double gap = lambda_n(orbit.n + 1).action - ld.action;
  if (orbit.n > 1) gap = std::min(gap, ld.action - lambda_n(orbit.n - 1).action);
  rep.gap = gap;
  rep.informative = rep.bound < 0.5 * gap;
  return rep;
}

// ---------------------------------------------------------------------------
// Non-degeneracy

NondegeneracyReport monodromy_nondegeneracy_check(const HamiltonianSystem& h, const Eigen::VectorXd& x0,
                                                  double eta, const Eigen::VectorXd& deck,
                                                  const Eigen::MatrixXd& cjac, int expected_dim,
                                                  const FlowOptions& options) {
  if (!(eta > 0.0)) throw InvalidArgument("period must be positive");
  const Eigen::Index N = x0.size();
  FlowOptions o = options;
  o.variational = true;
  o.record = false;
  o.output_at.clear();
  const FlowResult fr = integrate_flow(h, x0, 0.0, eta, o);

  Eigen::VectorXd g;
  h.gradient(x0, g);
  Eigen::MatrixXd C(cjac.rows() + 1, N);
  if (cjac.rows() > 0) C.topRows(cjac.rows()) = cjac;
  C.bottomRows(1) = g.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> csvd(C, Eigen::ComputeFullV);
  const Eigen::VectorXd cs = csvd.singularValues();
  Eigen::Index crank = 0;
  for (Eigen::Index i = 0; i < cs.size(); ++i)
    if (cs[i] > 1e-10 * cs[0]) ++crank;
  const Eigen::MatrixXd B = csvd.matrixV().rightCols(N - crank);

  const Eigen::VectorXd X = h.vector_field(x0);
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(N, N) - X * X.transpose() / X.squaredNorm();
  Eigen::MatrixXd D = deck.asDiagonal() * fr.monodromy;
  D -= Eigen::MatrixXd::Identity(N, N);
  const Eigen::MatrixXd A = P * D * B;
  Eigen::JacobiSVD<Eigen::MatrixXd> asvd(A);
  const Eigen::VectorXd sv = asvd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;

  NondegeneracyReport rep;
  rep.expected_dim = expected_dim;
  rep.level_dim = static_cast<int>(B.cols());
  rep.singular_values.assign(sv.data(), sv.data() + sv.size());
  int rank = 0;
  if (smax > 1e-12) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      const double rel = sv[i] / smax;
      if (rel > 1e-8 && rel < 1e-6)
        throw RankAmbiguous("singular value " + std::to_string(sv[i]) + " inside the ambiguity band");
      if (rel > 1e-7) ++rank;
    }
  }
  rep.solution_dim = rep.level_dim - rank;
  rep.pass = rep.solution_dim == expected_dim;
  return rep;
}

NondegeneracyReport monodromy_nondegeneracy_check(const PeriodicOrbit& orbit) {
  if (!orbit.forcing.inactive()) throw InvalidArgument("non-degeneracy check applies to unforced orbits");
  const RegularizedModel model(orbit.regularization, orbit.forcing);
  const int expected = orbit.regularization == Regularization::LeviCivita ? 4 : 2 * orbit.dim;
  return monodromy_nondegeneracy_check(model.system(), orbit.x0, orbit.S, model.deck(orbit.n),
                                       model.constraint_jacobian(orbit.x0), expected);
}

// ---------------------------------------------------------------------------
// Localization

namespace {

LCState circular_start(double kappa, double tau) {
  LCActionAngle a;
  a.I1 = a.I2 = 0.5 * kappa;
  a.theta1 = 0.0;
  a.theta2 = -0.5 * kPi;
  a.tau = tau;
  a.t_tilde = 0.0;
  return lc_from_action_angle(a);
}

struct Rates {
  double L = 0.0, tau = 0.0, delta = 0.0, t_tilde = 0.0;
};

Rates lc_rates(const HamiltonianSystem& sys, const Eigen::VectorXd& x) {
  const Eigen::VectorXd X = sys.vector_field(x);
  const double tau = x[5];
  const double st = std::sqrt(tau);
  const double z2 = x[0] * x[0] + x[1] * x[1];
  const double w2 = x[3] * x[3] + x[4] * x[4];
  const double r2 = std::sqrt(2.0);
  Rates r;
  r.L = 2.0 * r2 * st * (x[0] * X[0] + x[1] * X[1]) + r2 / (4.0 * st) * (x[3] * X[3] + x[4] * X[4]) +
        (-r2 * w2 / (16.0 * tau * st) + r2 * z2 / (2.0 * st)) * X[5];
  r.tau = X[5];
  const double c = std::pow(2.0, 0.25) * std::pow(tau, 0.25);
  const double dc = c * X[5] / (4.0 * tau);
  double dtheta = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double z = x[i], w = x[3 + i], dz = X[i], dw = X[3 + i];
    const double a = c * z, b = -w / (2.0 * c);
    const double da = dc * z + c * dz;
    const double db = -dw / (2.0 * c) + w * dc / (2.0 * c * c);
    dtheta += (a * db - b * da) / (a * a + b * b);
  }
  r.delta = 0.5 * dtheta;
  const double q = 1.0 / (4.0 * tau);
  const double zw = x[0] * x[3] + x[1] * x[4];
  r.t_tilde = X[2] + q * (X[0] * x[3] + x[0] * X[3] + X[1] * x[4] + x[1] * X[4]) - q * zw / tau * X[5];
  return r;
}

}  // namespace

LCTrajectory localization_run(const ForcingSpec& forcing, double kappa, int samples) {
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (forcing.dim() != 2) throw InvalidArgument("localization runs use the planar regularization");
  auto sys = lc_system(forcing);
  auto H = [&](double tau) { return sys->value(pack_lc(circular_start(kappa, tau))); };
  double tau = 2.0 / (kappa * kappa);
  for (int it = 0; it < 60; ++it) {
    const double h = H(tau);
    if (std::abs(h) < 1e-15) break;
    const double dtau = 1e-7 * tau;
    const double dh = (H(tau + dtau) - H(tau - dtau)) / (2.0 * dtau);
    const double step = h / dh;
    tau -= step;
    if (std::abs(step) < 1e-16 * tau) break;
  }
  const Eigen::VectorXd x0 = pack_lc(circular_start(kappa, tau));
  if (std::abs(sys->value(x0)) > 1e-10) throw NoConvergence("could not place the start on the zero level");

  const double s_guess = 4.0 / (kappa * kappa);
  FlowOptions opt;
  opt.record = true;
  const double ds = 1.5 * s_guess / samples;
  for (int k = 1; k <= static_cast<int>(1.5 * samples); ++k) opt.output_at.push_back(k * ds);
  const HamiltonianSystem* sp = sys.get();
  (void)sp;
  std::vector<FlowEvent> events;
  events.push_back({[](const Eigen::VectorXd& x, double) {
                      return x[2] + (x[0] * x[3] + x[1] * x[4]) / (4.0 * x[5]) - 1.0;
                    },
                    +1, true});
  FlowResult fr;
  try {
    fr = integrate_flow(*sys, x0, 0.0, 20.0 * s_guess, opt, events);
  } catch (const OutsideDomain& e) {
    throw DomainExit(e.what());
  }
  if (!fr.terminated) throw IntegrationFailure("t_tilde did not advance by 1");
  LCTrajectory tr;
  tr.forcing = forcing;
  tr.s = fr.s;
  tr.action = fr.action;
  for (const auto& x : fr.x) tr.states.push_back(unpack_lc(x));
  return tr;
}

LocalizationReport localization_check(const LCTrajectory& tr, double kappa, bool throw_on_violation) {
  if (tr.states.size() < 2) throw InvalidArgument("trajectory needs at least two samples");
  auto sys = lc_system(tr.forcing);
  LocalizationReport rep;
  rep.kappa = kappa;
  rep.S = tr.s.back() - tr.s.front();
  rep.S_scaled_minus_one = rep.S * kappa * kappa / 4.0 - 1.0;
  rep.S_dev_over_kappa2 = (rep.S - 4.0 / (kappa * kappa)) / (kappa * kappa);
  const double band = std::pow(kappa, 1.5);
  const double k4 = std::pow(kappa, 4), k6 = std::pow(kappa, 6);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const LCState& s = tr.states[i];
    const double L = lc_fast_action(s);
    const double ft = std::sqrt(2.0) / std::sqrt(s.tau);
    const double exc = std::max(std::abs(L - kappa), std::abs(ft - kappa)) / band;
    rep.max_band_excursion = std::max(rep.max_band_excursion, exc);
    if (exc >= 1.0 && rep.band_ok) {
      rep.band_ok = false;
      rep.first_violation = i;
      if (throw_on_violation)
        throw BandViolation("left the localization band at s = " + std::to_string(tr.s[i]), i, tr.s[i]);
    }
    const Rates r = lc_rates(*sys, pack_lc(s));
    rep.C1_fit = std::max(rep.C1_fit, std::abs(r.L) / k4);
    rep.C4_fit = std::max(rep.C4_fit, std::abs(r.tau) / k4);
    rep.C5_fit = std::max(rep.C5_fit, std::abs(r.t_tilde - 0.25 * kappa * kappa) / k6);
    rep.delta_ratio = std::max(rep.delta_ratio, std::abs(r.delta) * kappa / 3.0);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rescaling

RescaledView rescale_orbit(const PeriodicOrbit& orbit, double kappa) {
  if (orbit.regularization != Regularization::LeviCivita)
    throw InvalidArgument("rescaling uses the planar action-angle chart");
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  const auto sys_eps = lc_system(orbit.forcing);
  const auto sys_0 = lc_system(zero_forcing(2));
  RescaledView v;
  v.kappa = kappa;
  const double k2 = kappa * kappa, k3 = k2 * kappa;
  double th1_prev = 0.0, th2_prev = 0.0, off1 = 0.0, off2 = 0.0;
  std::vector<double> Lo, Do, Jo, Go, To, TTo;
  for (std::size_t i = 0; i < orbit.samples.size(); ++i) {
    const LCState s = unpack_lc(orbit.samples[i]);
    const LCActionAngle a = lc_to_action_angle(s);
    if (std::min(a.I1, a.I2) < 1e-12) throw ChartExit("an oscillator action vanishes along the orbit");
    if (i > 0) {
      off1 += wrap_pi(a.theta1 - th1_prev) - (a.theta1 - th1_prev);
      off2 += wrap_pi(a.theta2 - th2_prev) - (a.theta2 - th2_prev);
    }
    th1_prev = a.theta1;
    th2_prev = a.theta2;
    const double t1 = a.theta1 + off1, t2 = a.theta2 + off2;
    Lo.push_back(a.L);
    Do.push_back(0.5 * (t1 + t2));
    Jo.push_back(a.J);
    Go.push_back(0.5 * (t1 - t2));
    To.push_back(a.tau);
    TTo.push_back(a.t_tilde);
    const Eigen::VectorXd x = orbit.samples[i];
    v.max_H_defect_over_kappa4 =
        std::max(v.max_H_defect_over_kappa4, std::abs(sys_eps->value(x) - sys_0->value(x)) / (k2 * k2));
  }
  for (std::size_t i = 0; i < Lo.size(); ++i) {
    v.L.push_back(Lo[i] / kappa);
    v.delta.push_back(k3 * Do[i]);
    v.xi.push_back(kappa * Jo[i]);
    v.zeta.push_back(kappa * Go[i]);
    v.tau.push_back(k2 * To[i]);
    v.t_tilde.push_back(TTo[i]);
  }
  for (std::size_t i = 1; i < Lo.size(); ++i) {
    auto mid = [&](const std::vector<double>& f) { return 0.5 * (f[i] + f[i - 1]); };
    auto diff = [&](const std::vector<double>& f) { return f[i] - f[i - 1]; };
    v.liouville_original += mid(Lo) * diff(Do) + mid(Jo) * diff(Go) + mid(To) * diff(TTo);
    v.liouville_rescaled += mid(v.L) * diff(v.delta) + mid(v.xi) * diff(v.zeta) + mid(v.tau) * diff(v.t_tilde);
  }
  v.form_ratio_defect = std::abs(v.liouville_rescaled / (k2 * v.liouville_original) - 1.0);
  return v;
}

}  // namespace kepreg
