#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "kepreg/forcing.hpp"
#include "kepreg/orbit_finder.hpp"
#include "kepreg/rtbp.hpp"

namespace kepreg::cli {

struct IntegrateConfig {
  std::string system = "levi_civita";  // cartesian | levi_civita | moser
  OrbitalElements elements;
  double periods = 1.0;
  double stride = 0.0;  // cartesian only: uniform time grid when > 0
  bool rectilinear = false;
  double rectilinear_energy = -0.5;  // energy of the rectilinear seed
};

struct RTBPConfig {
  PrimaryOrbit primary;
  int center = 1;
  double domain_fraction = 0.5;
};

struct RunConfig {
  int dim = 2;
  Regularization regularization = Regularization::LeviCivita;
  nlohmann::json forcing = {{"name", "zero"}};
  double epsilon = 1.0;
  std::vector<double> epsilon_schedule;
  int n = 1;
  int n_min = 1;
  int n_max = 1;
  bool n_range_given = false;
  double tol = 1e-10;
  int max_iter = 40;
  int samples = 512;
  int jobs = 1;
  std::string out = "out";
  std::vector<std::string> formats{"csv", "json"};
  bool check_bounds = true;
  IntegrateConfig integrate;
  std::optional<RTBPConfig> rtbp;
  std::vector<double> kappas{0.2, 0.1, 0.05};
  int localization_samples = 2000;

  bool wants(const std::string& format) const;
};

// Parses and validates a configuration document. Unknown keys, wrong types
// and out-of-range values raise ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);

// Builds the forcing described by the config, already normalized and at
// epsilon = 1 so the problem's epsilon acts as the physical parameter.
ForcingSpec build_forcing(const RunConfig& config);

ShootingProblem build_problem(const RunConfig& config);

}  // namespace kepreg::cli
