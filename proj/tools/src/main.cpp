#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <utility>

#include "commands.hpp"
#include "kepreg/errors.hpp"

namespace {

std::string read_source(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream f(path);
  if (!f) throw kepreg::ConfigError("cannot open config file '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split_formats(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace kepreg::cli;
  CLI::App app{"Periodic orbits of the forced Kepler problem"};
  app.require_subcommand(1);

  std::string config_path;
  int jobs = 0;
  std::string out_dir;
  std::string formats;
  double tol = 0.0;
  int n_max = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file, or - for stdin");
    sub->add_option("--jobs", jobs, "worker threads");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", formats, "comma separated list of csv, json, svg");
    sub->add_option("--tol", tol, "shooting tolerance");
  };
  CLI::App* action = app.add_subcommand("action-table", "closed-form data of the unforced families");
  add_common(action);
  action->add_option("--n-max", n_max, "largest n")->required();
  const std::pair<const char*, const char*> subs[] = {
      {"integrate", "integrate one orbit and record collision crossings"},
      {"find-orbit", "shoot one periodic orbit of family n"},
      {"sweep", "periodic orbits over a range of n"},
      {"rtbp", "sweep with the restricted three-body forcing and inertial check"},
      {"localization", "band check of the fast action for several kappa"}};
  for (const auto& [name, help] : subs) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
      try {
        doc = nlohmann::json::parse(read_source(config_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw kepreg::ConfigError(std::string("malformed JSON: ") + e.what());
      }
    }
    if (!doc.is_object()) throw kepreg::ConfigError("config root must be an object");
    if (doc.contains("command") && doc["command"] != command)
      throw kepreg::ConfigError("field 'command' does not match the subcommand");
    if (jobs != 0) doc["jobs"] = jobs;
    if (!out_dir.empty()) doc["out"] = out_dir;
    if (!formats.empty()) doc["formats"] = split_formats(formats);
    if (tol != 0.0) doc["tol"] = tol;
    const RunConfig config = parse_config(doc);

    if (command == "action-table") return cmd_action_table(n_max, config, !out_dir.empty(), std::cout);
    if (command == "integrate") return cmd_integrate(config, std::cerr);
    if (command == "find-orbit") return cmd_find_orbit(config, std::cerr);
    if (command == "sweep") return cmd_sweep(config, std::cerr);
    if (command == "rtbp") return cmd_rtbp(config, std::cerr);
    return cmd_localization(config, std::cerr);
  } catch (const kepreg::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const kepreg::InvalidArgument& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const kepreg::NoConvergence& e) {
    std::cerr << e.what() << "\n";
    return kNoOrbit;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kNumericFailure;
  }
}
