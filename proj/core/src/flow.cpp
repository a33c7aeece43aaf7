#include "kepreg/flow.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

#include "kepreg/errors.hpp"

namespace kepreg {

namespace odeint = boost::numeric::odeint;

Eigen::VectorXd HamiltonianSystem::vector_field(const Eigen::VectorXd& x) const {
  const int m = dof();
  Eigen::VectorXd g;
  gradient(x, g);
  Eigen::VectorXd f(2 * m);
  f.head(m) = g.tail(m);
  f.tail(m) = -g.head(m);
  return f;
}

Eigen::MatrixXd poisson_matrix(int m) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  j.topRightCorner(m, m).setIdentity();
  j.bottomLeftCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  return j;
}

double symplectic_defect(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd om = poisson_matrix(static_cast<int>(m.rows()) / 2);
  return (m.transpose() * om * m - om).cwiseAbs().maxCoeff();
}

namespace {

using State = std::vector<double>;

// Right-hand side of the flow, the action integrand and optionally the
// variational equations, packed as [x (2m), action, Phi (column major)].
struct Rhs {
  const HamiltonianSystem* h;
  int m;
  bool variational;

  void operator()(const State& y, State& dy, double /*s*/) const {
    const int n = 2 * m;
    Eigen::Map<const Eigen::VectorXd> xm(y.data(), n);
    Eigen::VectorXd x = xm;
    Eigen::VectorXd g;
    Eigen::MatrixXd hess;
    if (variational)
      h->hessian(x, g, hess);
    else
      h->gradient(x, g);
    double act = 0.0;
    for (int i = 0; i < m; ++i) {
      dy[i] = g[m + i];
      dy[m + i] = -g[i];
      act += x[m + i] * g[m + i];
    }
    dy[n] = act;
    if (variational) {
      Eigen::MatrixXd a(n, n);
      a.topRows(m) = hess.bottomRows(m);
      a.bottomRows(m) = -hess.topRows(m);
      Eigen::Map<const Eigen::MatrixXd> phi(y.data() + n + 1, n, n);
      Eigen::Map<Eigen::MatrixXd> dphi(dy.data() + n + 1, n, n);
      dphi.noalias() = a * phi;
    }
  }
};

bool fires(double g0, double g1, int direction) {
  const bool up = g0 < 0.0 && g1 >= 0.0;
  const bool down = g0 > 0.0 && g1 <= 0.0;
  if (direction > 0) return up;
  if (direction < 0) return down;
  return up || down;
}

}  // namespace

FlowResult integrate_flow(const HamiltonianSystem& h, const Eigen::VectorXd& x0, double s0,
                          double s_end, const FlowOptions& opt,
                          const std::vector<FlowEvent>& events) {
  const int m = h.dof();
  const int n = 2 * m;
  if (x0.size() != n) throw InvalidArgument("initial state has wrong dimension");
  const bool var = opt.variational;
  const std::size_t total = static_cast<std::size_t>(n + 1 + (var ? n * n : 0));

  State y(total, 0.0);
  for (int i = 0; i < n; ++i) y[i] = x0[i];
  if (var)
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(n + 1 + i * n + i)] = 1.0;

  Rhs rhs{&h, m, var};
  auto controlled = odeint::make_controlled(opt.atol, opt.rtol,
                                            odeint::runge_kutta_fehlberg78<State>());
  odeint::runge_kutta_fehlberg78<State> single;

  FlowResult res;
  const double dir = s_end >= s0 ? 1.0 : -1.0;
  double s = s0;

  auto state_of = [&](const State& yy) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(yy.data(), n));
  };
  auto record = [&](double ss, const State& yy) {
    res.s.push_back(ss);
    res.x.push_back(state_of(yy));
    res.action.push_back(yy[static_cast<std::size_t>(n)]);
  };
  auto apply_projection = [&](State& yy) {
    Eigen::VectorXd x = state_of(yy);
    h.project(x);
    for (int i = 0; i < n; ++i) yy[static_cast<std::size_t>(i)] = x[i];
  };

  std::vector<double> outputs;
  for (double so : opt.output_at)
    if (dir * (so - s0) > 0.0 && dir * (s_end - so) >= 0.0) outputs.push_back(so);
  std::sort(outputs.begin(), outputs.end(), [&](double a, double b) { return dir * a < dir * b; });
  std::size_t next_out = 0;

  std::vector<double> gprev(events.size());
  {
    const Eigen::VectorXd x = state_of(y);
    for (std::size_t k = 0; k < events.size(); ++k) gprev[k] = events[k].g(x, s);
  }
  if (opt.record || !outputs.empty()) record(s, y);

  double dt_free = dir * std::abs(opt.initial_step);
  if (opt.max_step > 0.0) dt_free = dir * std::min(std::abs(dt_free), opt.max_step);

  while (dir * (s_end - s) > 0.0) {
    if (res.steps >= opt.max_steps) throw IntegrationFailure("step budget exhausted");

    double target = s_end;
    bool is_output = false;
    if (next_out < outputs.size() && dir * (outputs[next_out] - target) <= 0.0) {
      target = outputs[next_out];
      is_output = true;
    }
    double dt = dt_free;
    bool clamped = false;
    if (std::abs(dt) >= std::abs(target - s)) {
      dt = target - s;
      clamped = true;
    }

    const State y_prev = y;
    const double s_prev = s;
    int rejections = 0;
    double dt_used = dt;
    for (;;) {
      dt_used = dt;
      double st = s;
      const auto outcome = controlled.try_step(rhs, y, st, dt);
      if (outcome == odeint::success) break;
      if (++rejections > 1000)
        throw IntegrationFailure("step size control failed near s = " + std::to_string(s));
      if (std::abs(dt) < 1e-14 * std::max(1.0, std::abs(s)))
        throw IntegrationFailure("step size underflow near s = " + std::to_string(s));
      clamped = false;
    }
    ++res.steps;
    // After success dt holds the controller's suggestion for the next step.
    if (clamped && std::abs(dt_used) < std::abs(dt_free)) {
      s = target;
    } else {
      s = s_prev + dt_used;
      if (clamped) s = target;
      dt_free = dt;
    }
    if (opt.max_step > 0.0) dt_free = dir * std::min(std::abs(dt_free), opt.max_step);
    apply_projection(y);

    // Event detection on the accepted step.
    bool stop = false;
    if (!events.empty()) {
      const Eigen::VectorXd xnew = state_of(y);
      std::vector<std::pair<double, EventHit>> found;
      const double h_step = s - s_prev;
      auto sub_state = [&](double theta) {
        State out(total);
        if (theta == 0.0) return y_prev;
        single.do_step(rhs, y_prev, s_prev, out, theta * h_step);
        apply_projection(out);
        return out;
      };
      for (std::size_t k = 0; k < events.size(); ++k) {
        const double gnew = events[k].g(xnew, s);
        if (fires(gprev[k], gnew, events[k].direction)) {
          // Illinois variant of regula falsi on theta in [0,1].
          double a = 0.0, b = 1.0, ga = gprev[k], gb = gnew;
          int side = 0;
          State yb = y;
          for (int it = 0; it < 200; ++it) {
            if (std::abs(b - a) * std::abs(h_step) <= opt.event_tol * std::max(1.0, std::abs(s)))
              break;
            double c = (a * gb - b * ga) / (gb - ga);
            if (!(c > a && c < b)) c = 0.5 * (a + b);
            State yc = sub_state(c);
            const double gc = events[k].g(state_of(yc), s_prev + c * h_step);
            if (gc == 0.0) {
              a = b = c;
              yb = yc;
              break;
            }
            if ((gc > 0.0) == (gb > 0.0)) {
              b = c;
              gb = gc;
              yb = std::move(yc);
              if (side == 1) ga *= 0.5;
              side = 1;
            } else {
              a = c;
              ga = gc;
              if (side == -1) gb *= 0.5;
              side = -1;
            }
          }
          EventHit hit;
          hit.event = static_cast<int>(k);
          hit.s = s_prev + b * h_step;
          hit.x = state_of(yb);
          hit.action = yb[static_cast<std::size_t>(n)];
          found.emplace_back(b, std::move(hit));
        }
        gprev[k] = gnew;
      }
      std::sort(found.begin(), found.end(),
                [](const auto& p, const auto& q) { return p.first < q.first; });
      for (auto& [theta, hit] : found) {
        const bool term = events[static_cast<std::size_t>(hit.event)].terminal;
        res.hits.push_back(hit);
        if (term) {
          State yt = sub_state(theta);
          y = yt;
          s = hit.s;
          stop = true;
          break;
        }
      }
    }

    const bool at_output = is_output && !stop && s == target;
    if (at_output) ++next_out;
    if (opt.record || at_output || stop) record(s, y);
    if (stop) {
      res.terminated = true;
      break;
    }
  }

  res.x_end = state_of(y);
  res.s_end = s;
  res.action_end = y[static_cast<std::size_t>(n)];
  if (var) res.monodromy = Eigen::Map<const Eigen::MatrixXd>(y.data() + n + 1, n, n);
  return res;
}

}  // namespace kepreg
