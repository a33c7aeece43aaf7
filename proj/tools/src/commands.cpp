#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include "io.hpp"
#include "kepreg/coords.hpp"
#include "kepreg/errors.hpp"
#include "kepreg/kepler.hpp"
#include "kepreg/levi_civita.hpp"
#include "kepreg/moser.hpp"
#include "kepreg/orbit_finder.hpp"
#include "kepreg/rtbp.hpp"

namespace kepreg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

int cmd_action_table(int n_max, const RunConfig& config, bool write_file_flag, std::ostream& out) {
  if (n_max < 1) throw ConfigError("option '--n-max' must be at least 1");
  Table t;
  t.header = {"n", "L_n", "tau_n", "S_n", "A0_n"};
  for (int n = 1; n <= n_max; ++n) {
    const LambdaData d = lambda_n(n);
    t.add({std::to_string(n), fmt17(d.L), fmt17(d.tau), fmt17(d.S), fmt17(d.action)});
  }
  const std::string csv = to_csv(t);
  out << csv;
  if (write_file_flag) write_file(fs::path(config.out) / "action_table.csv", csv);
  return kSuccess;
}

namespace {

std::vector<std::string> trajectory_header(int d) {
  std::vector<std::string> h{"s", "t", "tau"};
  for (int i = 1; i <= d; ++i) h.push_back("q" + std::to_string(i));
  for (int i = 1; i <= d; ++i) h.push_back("p" + std::to_string(i));
  h.push_back("energy");
  return h;
}

void trajectory_row(Table& t, double s, const CartesianExtState& c, const ForcingSpec& f) {
  std::vector<std::string> row{fmt17(s), fmt17(c.t), fmt17(c.tau)};
  for (int i = 0; i < c.dim(); ++i) row.push_back(fmt17(c.q[i]));
  for (int i = 0; i < c.dim(); ++i) row.push_back(fmt17(c.p[i]));
  // The physical energy is undefined exactly at a collision.
  row.push_back(c.q.norm() > 0.0 ? fmt17(eval_energy(c, f)) : std::string("nan"));
  t.add(std::move(row));
}

CartesianExtState initial_state(const RunConfig& c, const ForcingSpec& f) {
  CartesianExtState s;
  if (c.integrate.rectilinear) {
    // Radial fall from rest: |q| = -1 / E.
    s.q = Eigen::VectorXd::Zero(c.dim);
    s.p = Eigen::VectorXd::Zero(c.dim);
    s.q[0] = -1.0 / c.integrate.rectilinear_energy;
  } else {
    OrbitalElements el = c.integrate.elements;
    el.dim = c.dim;
    s = state_from_elements(el);
  }
  s.t = 0.0;
  s.tau = -eval_energy(s, f);
  return s;
}

double integration_time(const RunConfig& c) {
  if (c.integrate.rectilinear) {
    const double a = -0.5 / c.integrate.rectilinear_energy;
    return c.integrate.periods * 2.0 * M_PI * std::pow(a, 1.5);
  }
  return c.integrate.periods * c.integrate.elements.period();
}

void write_trajectory_outputs(const RunConfig& c, const Table& t, const json& crossings, std::ostream& log) {
  const fs::path dir(c.out);
  if (c.wants("csv")) write_file(dir / "trajectory.csv", to_csv(t));
  if (c.wants("json") || !crossings.empty()) write_file(dir / "crossings.json", dump_json(crossings));
  if (c.wants("svg")) {
    Polyline l;
    for (const auto& r : t.rows) l.points.emplace_back(std::stod(r[3]), std::stod(r[4]));
    write_file(dir / "trajectory.svg", to_svg({l}, "q1-q2 projection"));
  }
  log << "samples " << t.rows.size() << ", crossings " << crossings.size() << "\n";
}

}  // namespace

int cmd_integrate(const RunConfig& c, std::ostream& log) {
  const ForcingSpec f = build_forcing(c).with_epsilon(c.epsilon);
  const CartesianExtState s0 = initial_state(c, f);
  const double T = integration_time(c);
  FlowOptions fo;
  fo.rtol = fo.atol = std::min(1e-12, c.tol);
  Table t;
  t.header = trajectory_header(c.dim);
  json crossings = json::array();
  const std::string& sys = c.integrate.system;
  if (sys == "cartesian") {
    const CartesianTrajectory tr = integrate_cartesian(s0, f, T, fo, c.integrate.stride);
    for (const auto& s : tr.states) trajectory_row(t, s.t, s, f);
  } else if (sys == "levi_civita") {
    if (c.dim != 2) throw ConfigError("field 'integrate.system' levi_civita needs dim 2");
    LCIntegrateOptions opt;
    opt.flow = fo;
    const LCTrajectory tr = integrate_lc(lc_from_cartesian(s0), f, LCStop::after_time(T), opt);
    for (std::size_t k = 0; k < tr.states.size(); ++k) trajectory_row(t, tr.s[k], lc_to_cartesian(tr.states[k]), f);
    for (const auto& cr : tr.crossings) {
      const CollisionLimits lim = collision_limits(tr, cr);
      crossings.push_back({{"s", cr.s},
                           {"t", cr.t},
                           {"tau", cr.tau},
                           {"energy_limit", lim.energy},
                           {"direction", {lim.direction[0], lim.direction[1]}}});
    }
  } else {
    MoserIntegrateOptions opt;
    opt.flow = fo;
    const MoserTrajectory tr = integrate_moser(moser_from_cartesian(s0), f, StopCondition::after_time(T), opt);
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const UnitMoserState& u = tr.states[k];
      CartesianExtState cs;
      if (physical_distance(u) > 0.0) {
        cs = moser_to_cartesian(u);
      } else {
        cs.q = Eigen::VectorXd::Zero(c.dim);
        cs.p = Eigen::VectorXd::Constant(c.dim, std::numeric_limits<double>::quiet_NaN());
        cs.t = physical_time(u);
        cs.tau = u.tau;
      }
      trajectory_row(t, tr.s[k], cs, f);
    }
    for (const auto& cr : tr.crossings)
      crossings.push_back({{"s", cr.s}, {"t", cr.t}, {"tau", cr.tau}, {"speed", cr.speed}});
  }
  write_trajectory_outputs(c, t, crossings, log);
  return kSuccess;
}

namespace {

json orbit_record(const PeriodicOrbit& o, bool check_bounds) {
  json j = orbit_json(o);
  if (check_bounds && o.regularization == Regularization::LeviCivita && o.dim == 2) {
    try {
      const ActionBoundReport r = action_bound_check(o, o.forcing);
      j["action_bound"] = {{"lhs", r.lhs},
                           {"bound", r.bound},
                           {"T_plus", r.T_plus},
                           {"max_K_plus", r.max_K_plus},
                           {"max_K_minus", r.max_K_minus},
                           {"gap", r.gap},
                           {"pass", r.pass},
                           {"informative", r.informative}};
    } catch (const Error& e) {
      j["action_bound"] = {{"error", e.what()}};
    }
  }
  return j;
}

void write_orbit(const RunConfig& c, const PeriodicOrbit& o, const std::string& stem, const json& record) {
  const fs::path dir(c.out);
  if (c.wants("json")) write_file(dir / (stem + ".json"), dump_json(record));
  if (c.wants("csv")) write_file(dir / (stem + ".csv"), to_csv(orbit_samples_table(o)));
  if (c.wants("svg")) write_file(dir / (stem + ".svg"), to_svg({orbit_polyline(o)}, stem));
}

std::string orbit_stem(int n) { return "orbit_n" + std::to_string(n); }

struct Family {
  std::vector<PeriodicOrbit> orbits;
  json failures = json::array();
};

Family run_family(const RunConfig& c, std::ostream& log) {
  if (!c.n_range_given) throw ConfigError("field 'n_range' is required");
  const ShootingProblem pb = build_problem(c);
  const auto entries = sweep_n(pb, c.n_min, c.n_max, c.jobs);
  Family fam;
  for (const auto& e : entries) {
    if (e.orbit) {
      fam.orbits.push_back(*e.orbit);
      log << "n=" << e.n << " residual " << fmt17(e.orbit->residual) << " max_q " << fmt17(e.orbit->max_q) << "\n";
    } else {
      fam.failures.push_back({{"n", e.n}, {"error", e.error}});
      log << "n=" << e.n << " failed: " << e.error << "\n";
    }
  }
  return fam;
}

json write_family(const RunConfig& c, const Family& fam) {
  const fs::path dir(c.out);
  Table t;
  t.header = {"n", "kappa", "S", "action", "max_q", "residual"};
  std::vector<double> ns, qs;
  std::vector<Polyline> lines;
  json records = json::array();
  for (const auto& o : fam.orbits) {
    t.add({std::to_string(o.n), fmt17(o.kappa), fmt17(o.S), fmt17(o.action), fmt17(o.max_q), fmt17(o.residual)});
    ns.push_back(o.n);
    qs.push_back(o.max_q);
    const json rec = orbit_record(o, c.check_bounds);
    records.push_back(rec);
    write_orbit(c, o, orbit_stem(o.n), rec);
    lines.push_back(orbit_polyline(o));
  }
  if (c.wants("csv")) write_file(dir / "family.csv", to_csv(t));
  if (c.wants("svg")) write_file(dir / "family.svg", to_svg(lines, "family"));

  json summary;
  summary["n_range"] = {c.n_min, c.n_max};
  summary["found"] = fam.orbits.size();
  summary["failures"] = fam.failures;
  summary["fit_exponent_max_q"] = ns.size() >= 2 ? json(loglog_slope(ns, qs)) : json(nullptr);
  bool distinct = true;
  for (std::size_t i = 0; i < fam.orbits.size(); ++i)
    for (std::size_t k = i + 1; k < fam.orbits.size(); ++k)
      if (std::abs(fam.orbits[i].action - fam.orbits[k].action) < 1e-9) distinct = false;
  summary["actions_distinct"] = distinct;
  int bounds_pass = 0;
  for (const auto& r : records)
    if (r.contains("action_bound") && r["action_bound"].value("pass", false)) ++bounds_pass;
  summary["action_bounds_passed"] = bounds_pass;
  return summary;
}

int exit_for_family(const Family& fam) { return fam.orbits.empty() ? kNoOrbit : kSuccess; }

}  // namespace

int cmd_find_orbit(const RunConfig& c, std::ostream& log) {
  const ShootingProblem pb = build_problem(c);
  PeriodicOrbit o;
  try {
    o = c.epsilon_schedule.empty() ? shoot_periodic(pb, c.epsilon)
                                   : continuation_in_epsilon(pb, c.epsilon_schedule).back();
  } catch (const NoConvergence& e) {
    log << e.what() << "\n";
    return kNoOrbit;
  } catch (const ContinuationStuck& e) {
    log << e.what() << " (last good epsilon " << fmt17(e.last_good_epsilon) << ")\n";
    return kNoOrbit;
  }
  write_orbit(c, o, orbit_stem(o.n), orbit_record(o, c.check_bounds));
  log << "n=" << o.n << " S " << fmt17(o.S) << " action " << fmt17(o.action) << " residual " << fmt17(o.residual)
      << "\n";
  return kSuccess;
}

int cmd_sweep(const RunConfig& c, std::ostream& log) {
  const Family fam = run_family(c, log);
  const json summary = write_family(c, fam);
  write_file(fs::path(c.out) / "summary.json", dump_json(summary));
  log << "found " << fam.orbits.size() << " orbits, fit exponent " << summary["fit_exponent_max_q"].dump() << "\n";
  return exit_for_family(fam);
}

int cmd_rtbp(const RunConfig& cin, std::ostream& log) {
  if (!cin.rtbp) throw ConfigError("field 'rtbp' is required");
  RunConfig c = cin;
  c.forcing = {{"name", "rtbp"}};
  const Family fam = run_family(c, log);
  json summary = write_family(c, fam);

  const fs::path dir(c.out);
  PrimaryOrbit po = c.rtbp->primary;
  po.dim = c.dim;
  Table rep;
  rep.header = {"n", "max_residual", "masked", "periodicity_defect", "direct_closure", "max_center_distance",
                "min_other_distance"};
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& o : fam.orbits) {
    const InertialReport r = shift_to_inertial(o, po, c.rtbp->center);
    rep.add({std::to_string(o.n), fmt17(r.max_residual), std::to_string(r.masked), fmt17(r.periodicity_defect),
             fmt17(r.direct_closure), fmt17(r.max_center_distance), fmt17(r.min_other_distance)});
    if (r.max_center_distance >= prev) monotone = false;
    prev = r.max_center_distance;
    Table q;
    q.header = {"t"};
    for (int i = 1; i <= c.dim; ++i) q.header.push_back("q" + std::to_string(i));
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      std::vector<std::string> row{fmt17(r.t[k])};
      for (int i = 0; i < c.dim; ++i) row.push_back(fmt17(r.q[k][i]));
      q.add(std::move(row));
    }
    write_file(dir / ("inertial_n" + std::to_string(o.n) + ".csv"), to_csv(q));
    log << "n=" << o.n << " inertial residual " << fmt17(r.max_residual) << " closure "
        << fmt17(r.periodicity_defect) << "\n";
  }
  write_file(dir / "inertial_report.csv", to_csv(rep));
  summary["center_distance_monotone"] = monotone;
  write_file(dir / "summary.json", dump_json(summary));
  return exit_for_family(fam);
}

int cmd_localization(const RunConfig& c, std::ostream& log) {
  if (c.dim != 2) throw ConfigError("field 'dim' must be 2 for localization");
  if (c.kappas.empty()) throw ConfigError("field 'kappas' must not be empty");
  const ForcingSpec f = build_forcing(c).with_epsilon(c.epsilon);
  Table t;
  t.header = {"kappa", "S", "S_dev_over_kappa2", "band_ok", "C1_fit", "C4_fit"};
  double smallest = std::numeric_limits<double>::infinity();
  bool smallest_ok = true;
  for (double k : c.kappas) {
    LocalizationReport r;
    try {
      r = localization_check(localization_run(f, k, c.localization_samples), k);
    } catch (const Error& e) {
      // A run that cannot even complete the loop counts as leaving the band.
      log << "kappa=" << fmt17(k) << " failed: " << e.what() << "\n";
      r.kappa = k;
      r.S = r.S_dev_over_kappa2 = r.C1_fit = r.C4_fit = std::numeric_limits<double>::quiet_NaN();
      r.band_ok = false;
    }
    t.add({fmt17(k), fmt17(r.S), fmt17(r.S_dev_over_kappa2), r.band_ok ? "1" : "0", fmt17(r.C1_fit),
           fmt17(r.C4_fit)});
    if (k < smallest) {
      smallest = k;
      smallest_ok = r.band_ok;
    }
    if (!r.band_ok) log << "kappa=" << fmt17(k) << " band violation\n";
  }
  const std::string csv = to_csv(t);
  write_file(fs::path(c.out) / "localization.csv", csv);
  log << csv;
  return smallest_ok ? kSuccess : kNumericFailure;
}

}  // namespace kepreg::cli
