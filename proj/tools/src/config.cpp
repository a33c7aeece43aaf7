#include "config.hpp"

#include <algorithm>
#include <set>

#include "kepreg/errors.hpp"

namespace kepreg::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!keys.count(it.key())) throw ConfigError("unknown key '" + where + it.key() + "'");
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError("field '" + field + "' must be an object");
  return j;
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError("field '" + field + "' must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError("field '" + field + "' must be an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) throw ConfigError("field '" + field + "' must be a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError("field '" + field + "' must be a string");
  return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("field '" + field + "' must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

TrigSeries parse_series(const json& j, const std::string& field) {
  if (j.is_number()) return TrigSeries{j.get<double>(), {}, {}};
  require_object(j, field);
  reject_unknown(j, field + ".", {"c0", "cos", "sin"});
  TrigSeries s;
  if (j.contains("c0")) s.c0 = get_number(j["c0"], field + ".c0");
  if (j.contains("cos")) s.cos_coeffs = get_numbers(j["cos"], field + ".cos");
  if (j.contains("sin")) s.sin_coeffs = get_numbers(j["sin"], field + ".sin");
  return s;
}

IntegrateConfig parse_integrate(const json& j) {
  require_object(j, "integrate");
  reject_unknown(j, "integrate.", {"system", "elements", "periods", "stride", "rectilinear", "rectilinear_energy"});
  IntegrateConfig c;
  if (j.contains("system")) {
    c.system = get_string(j["system"], "integrate.system");
    if (c.system != "cartesian" && c.system != "levi_civita" && c.system != "moser")
      throw ConfigError("field 'integrate.system' must be cartesian, levi_civita or moser");
  }
  if (j.contains("elements")) {
    const json& e = require_object(j["elements"], "integrate.elements");
    reject_unknown(e, "integrate.elements.", {"a", "e", "g", "l", "inclination", "node"});
    if (e.contains("a")) c.elements.a = get_number(e["a"], "integrate.elements.a");
    if (e.contains("e")) c.elements.e = get_number(e["e"], "integrate.elements.e");
    if (e.contains("g")) c.elements.g = get_number(e["g"], "integrate.elements.g");
    if (e.contains("l")) c.elements.l = get_number(e["l"], "integrate.elements.l");
    if (e.contains("inclination")) c.elements.inclination = get_number(e["inclination"], "integrate.elements.inclination");
    if (e.contains("node")) c.elements.node = get_number(e["node"], "integrate.elements.node");
    if (!(c.elements.a > 0.0)) throw ConfigError("field 'integrate.elements.a' must be positive");
    if (!(c.elements.e >= 0.0 && c.elements.e < 1.0))
      throw ConfigError("field 'integrate.elements.e' must lie in [0, 1)");
  }
  if (j.contains("periods")) c.periods = get_number(j["periods"], "integrate.periods");
  if (!(c.periods > 0.0)) throw ConfigError("field 'integrate.periods' must be positive");
  if (j.contains("stride")) c.stride = get_number(j["stride"], "integrate.stride");
  if (c.stride < 0.0) throw ConfigError("field 'integrate.stride' must be non-negative");
  if (j.contains("rectilinear")) c.rectilinear = get_bool(j["rectilinear"], "integrate.rectilinear");
  if (j.contains("rectilinear_energy"))
    c.rectilinear_energy = get_number(j["rectilinear_energy"], "integrate.rectilinear_energy");
  if (!(c.rectilinear_energy < 0.0)) throw ConfigError("field 'integrate.rectilinear_energy' must be negative");
  return c;
}

RTBPConfig parse_rtbp(const json& j, RunConfig& rc) {
  require_object(j, "rtbp");
  reject_unknown(j, "rtbp.",
                 {"M1", "M2", "e", "g", "mean_anomaly0", "center", "domain_fraction", "n_range", "epsilon_schedule"});
  RTBPConfig c;
  if (j.contains("M1")) c.primary.M1 = get_number(j["M1"], "rtbp.M1");
  if (j.contains("M2")) c.primary.M2 = get_number(j["M2"], "rtbp.M2");
  if (j.contains("e")) c.primary.e = get_number(j["e"], "rtbp.e");
  if (j.contains("g")) c.primary.g = get_number(j["g"], "rtbp.g");
  if (j.contains("mean_anomaly0")) c.primary.mean_anomaly0 = get_number(j["mean_anomaly0"], "rtbp.mean_anomaly0");
  if (j.contains("center")) c.center = get_int(j["center"], "rtbp.center");
  if (j.contains("domain_fraction")) c.domain_fraction = get_number(j["domain_fraction"], "rtbp.domain_fraction");
  if (!(c.primary.M1 > 0.0)) throw ConfigError("field 'rtbp.M1' must be positive");
  if (!(c.primary.M2 > 0.0)) throw ConfigError("field 'rtbp.M2' must be positive");
  if (!(c.primary.e >= 0.0 && c.primary.e < 1.0)) throw ConfigError("field 'rtbp.e' must lie in [0, 1)");
  if (c.center != 1 && c.center != 2) throw ConfigError("field 'rtbp.center' must be 1 or 2");
  if (!(c.domain_fraction > 0.0 && c.domain_fraction <= 0.5))
    throw ConfigError("field 'rtbp.domain_fraction' must lie in (0, 0.5]");
  if (j.contains("n_range")) {
    const auto r = get_numbers(j["n_range"], "rtbp.n_range");
    if (r.size() != 2) throw ConfigError("field 'rtbp.n_range' must have two entries");
    rc.n_min = static_cast<int>(r[0]);
    rc.n_max = static_cast<int>(r[1]);
    rc.n_range_given = true;
  }
  if (j.contains("epsilon_schedule")) rc.epsilon_schedule = get_numbers(j["epsilon_schedule"], "rtbp.epsilon_schedule");
  return c;
}

void validate_forcing(const json& f, int dim) {
  require_object(f, "forcing");
  if (!f.contains("name")) throw ConfigError("field 'forcing.name' is required");
  const std::string name = get_string(f["name"], "forcing.name");
  if (name == "zero") {
    reject_unknown(f, "forcing.", {"name"});
  } else if (name == "rotating_linear") {
    reject_unknown(f, "forcing.", {"name", "eps0"});
    if (f.contains("eps0")) get_number(f["eps0"], "forcing.eps0");
  } else if (name == "linear") {
    reject_unknown(f, "forcing.", {"name", "coefficients"});
    if (!f.contains("coefficients") || !f["coefficients"].is_array())
      throw ConfigError("field 'forcing.coefficients' must be an array");
    if (static_cast<int>(f["coefficients"].size()) != dim)
      throw ConfigError("field 'forcing.coefficients' needs one entry per dimension");
  } else if (name == "polynomial") {
    reject_unknown(f, "forcing.", {"name", "terms", "domain_radius"});
    if (!f.contains("terms") || !f["terms"].is_array()) throw ConfigError("field 'forcing.terms' must be an array");
    for (std::size_t i = 0; i < f["terms"].size(); ++i) {
      const std::string where = "forcing.terms[" + std::to_string(i) + "]";
      const json& t = require_object(f["terms"][i], where);
      reject_unknown(t, where + ".", {"exponents", "coefficient"});
      if (!t.contains("exponents") || !t["exponents"].is_array() ||
          static_cast<int>(t["exponents"].size()) != dim)
        throw ConfigError("field '" + where + ".exponents' needs one integer per dimension");
      for (const auto& e : t["exponents"])
        if (!e.is_number_integer() || e.get<int>() < 0)
          throw ConfigError("field '" + where + ".exponents' must hold non-negative integers");
    }
    if (f.contains("domain_radius")) get_number(f["domain_radius"], "forcing.domain_radius");
  } else if (name == "rtbp") {
    reject_unknown(f, "forcing.", {"name"});
  } else {
    throw ConfigError("field 'forcing.name' has unknown value '" + name + "'");
  }
}

}  // namespace

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RunConfig parse_config(const json& doc) {
  require_object(doc, "<root>");
  reject_unknown(doc, "", {"command", "dim", "regularization", "forcing", "epsilon", "epsilon_schedule", "n",
                           "n_range", "tol", "max_iter", "samples", "jobs", "out", "formats", "check_bounds",
                           "integrate", "rtbp", "kappas", "localization_samples"});
  RunConfig c;
  if (doc.contains("command")) get_string(doc["command"], "command");
  if (doc.contains("dim")) c.dim = get_int(doc["dim"], "dim");
  if (c.dim != 2 && c.dim != 3) throw ConfigError("field 'dim' must be 2 or 3");
  if (doc.contains("regularization")) {
    try {
      c.regularization = regularization_from_string(get_string(doc["regularization"], "regularization"));
    } catch (const InvalidArgument&) {
      throw ConfigError("field 'regularization' must be levi_civita or moser");
    }
  }
  if (doc.contains("forcing")) c.forcing = doc["forcing"];
  if (doc.contains("epsilon")) c.epsilon = get_number(doc["epsilon"], "epsilon");
  if (doc.contains("epsilon_schedule")) c.epsilon_schedule = get_numbers(doc["epsilon_schedule"], "epsilon_schedule");
  if (doc.contains("rtbp")) c.rtbp = parse_rtbp(doc["rtbp"], c);
  if (doc.contains("n")) c.n = get_int(doc["n"], "n");
  if (c.n < 1) throw ConfigError("field 'n' must be at least 1");
  if (doc.contains("n_range")) {
    const json& r = doc["n_range"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer())
      throw ConfigError("field 'n_range' must be [n_min, n_max] with integers");
    c.n_min = r[0].get<int>();
    c.n_max = r[1].get<int>();
    c.n_range_given = true;
  }
  if (doc.contains("tol")) c.tol = get_number(doc["tol"], "tol");
  if (doc.contains("max_iter")) c.max_iter = get_int(doc["max_iter"], "max_iter");
  if (doc.contains("samples")) c.samples = get_int(doc["samples"], "samples");
  if (doc.contains("jobs")) c.jobs = get_int(doc["jobs"], "jobs");
  if (doc.contains("out")) c.out = get_string(doc["out"], "out");
  if (doc.contains("formats")) {
    const json& f = doc["formats"];
    if (!f.is_array()) throw ConfigError("field 'formats' must be an array of strings");
    c.formats.clear();
    for (const auto& e : f) c.formats.push_back(get_string(e, "formats"));
  }
  for (const auto& f : c.formats)
    if (f != "csv" && f != "json" && f != "svg") throw ConfigError("field 'formats' has unknown format '" + f + "'");
  if (doc.contains("check_bounds")) c.check_bounds = get_bool(doc["check_bounds"], "check_bounds");
  if (doc.contains("integrate")) c.integrate = parse_integrate(doc["integrate"]);
  if (doc.contains("kappas")) c.kappas = get_numbers(doc["kappas"], "kappas");
  for (double k : c.kappas)
    if (!(k > 0.0)) throw ConfigError("field 'kappas' must hold positive values");
  if (doc.contains("localization_samples"))
    c.localization_samples = get_int(doc["localization_samples"], "localization_samples");

  if (!(c.tol > 0.0)) throw ConfigError("field 'tol' must be positive");
  if (c.max_iter < 1) throw ConfigError("field 'max_iter' must be at least 1");
  if (c.samples < 2) throw ConfigError("field 'samples' must be at least 2");
  if (c.jobs < 1) throw ConfigError("field 'jobs' must be at least 1");
  if (c.localization_samples < 2) throw ConfigError("field 'localization_samples' must be at least 2");
  if (c.n_range_given && (c.n_min < 1 || c.n_max < c.n_min))
    throw ConfigError("field 'n_range' must satisfy 1 <= n_min <= n_max");
  if (!c.epsilon_schedule.empty()) {
    const auto& s = c.epsilon_schedule;
    if (s.front() != 0.0) throw ConfigError("field 'epsilon_schedule' must start at 0");
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] < s[i - 1] || s[i] > 1.0)
        throw ConfigError("field 'epsilon_schedule' must be nondecreasing within [0, 1]");
  }
  validate_forcing(c.forcing, c.dim);
  if (c.forcing["name"] == "rtbp" && !c.rtbp) c.rtbp = RTBPConfig{};
  if (c.rtbp) c.rtbp->primary.dim = c.dim;
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

ForcingSpec build_forcing(const RunConfig& c) {
  const json& f = c.forcing;
  const std::string name = f["name"].get<std::string>();
  if (name == "zero") return zero_forcing(c.dim);
  if (name == "rotating_linear") {
    const double eps0 = f.contains("eps0") ? f["eps0"].get<double>() : 1e-3;
    return rotating_linear_forcing(c.dim, eps0, 1.0);
  }
  if (name == "linear") {
    std::vector<TrigSeries> coeffs;
    for (std::size_t i = 0; i < f["coefficients"].size(); ++i)
      coeffs.push_back(parse_series(f["coefficients"][i], "forcing.coefficients[" + std::to_string(i) + "]"));
    return linear_forcing(std::move(coeffs), 1.0);
  }
  if (name == "polynomial") {
    std::vector<PolynomialTerm> terms;
    for (std::size_t i = 0; i < f["terms"].size(); ++i) {
      const json& t = f["terms"][i];
      PolynomialTerm term;
      term.exponents = t["exponents"].get<std::vector<int>>();
      if (t.contains("coefficient"))
        term.coefficient = parse_series(t["coefficient"], "forcing.terms[" + std::to_string(i) + "].coefficient");
      terms.push_back(std::move(term));
    }
    const double radius =
        f.contains("domain_radius") ? f["domain_radius"].get<double>() : std::numeric_limits<double>::infinity();
    return normalize_forcing(polynomial_forcing(c.dim, std::move(terms), 1.0, radius));
  }
  const RTBPConfig r = c.rtbp.value_or(RTBPConfig{});
  PrimaryOrbit po = r.primary;
  po.dim = c.dim;
  return build_rtbp_forcing(po, r.center, 1.0, r.domain_fraction);
}

ShootingProblem build_problem(const RunConfig& c) {
  ShootingProblem pb;
  pb.regularization = c.regularization;
  pb.forcing = build_forcing(c).with_epsilon(c.epsilon);
  pb.n = c.n;
  pb.tol = c.tol;
  pb.max_iter = c.max_iter;
  pb.samples = c.samples;
  pb.epsilon_schedule = c.epsilon_schedule;
  return pb;
}

}  // namespace kepreg::cli
