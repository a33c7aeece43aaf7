#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "io.hpp"
#include "kepreg/errors.hpp"

using namespace kepreg;
using namespace kepreg::cli;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("kepreg_cli_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(CliConfig, DefaultsParse) {
  const RunConfig c = parse_config_text("{}");
  EXPECT_EQ(c.dim, 2);
  EXPECT_EQ(c.regularization, Regularization::LeviCivita);
  EXPECT_DOUBLE_EQ(c.tol, 1e-10);
}

TEST(CliConfig, UnknownKeyIsNamed) {
  try {
    parse_config_text(R"({"dim": 2, "tolerance": 1e-9})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("tolerance"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text(R"({"integrate": {"elements": {"ecc": 0.1}}})"), ConfigError);
}

TEST(CliConfig, BadForcingAndRangesAreRejected) {
  EXPECT_THROW(parse_config_text(R"({"forcing": {"name": "quadratic"}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"forcing": {"name": "linear", "coefficients": [{}]}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"dim": 4})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"rtbp": {"e": 1.0}, "forcing": {"name": "rtbp"}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"epsilon_schedule": [0.2, 1.0]})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"n_range": [5, 2]})"), ConfigError);
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
}

TEST(CliConfig, ProblemCarriesTheRequestedEpsilon) {
  const RunConfig c =
      parse_config_text(R"({"forcing": {"name": "rotating_linear", "eps0": 0.01}, "epsilon": 0.25, "n": 3})");
  const ShootingProblem pb = build_problem(c);
  EXPECT_DOUBLE_EQ(pb.forcing.epsilon(), 0.25);
  EXPECT_EQ(pb.n, 3);
}

TEST(CliIo, FloatsRoundTripExactly) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(fmt17(x)), x);
  EXPECT_EQ(fmt17(0.1), fmt17(0.1));
  EXPECT_EQ(fmt17(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(CliIo, JsonIsSortedAndStable) {
  nlohmann::json j;
  j["zeta"] = 1.0;
  j["alpha"] = {1.0, 2.0};
  j["bad"] = std::numeric_limits<double>::infinity();
  const std::string s = dump_json(j);
  EXPECT_LT(s.find("alpha"), s.find("zeta"));
  EXPECT_NE(s.find("null"), std::string::npos);
  EXPECT_EQ(s, dump_json(j));
}

TEST(CliIo, CsvHasHeaderAndRows) {
  Table t;
  t.header = {"a", "b"};
  t.add({fmt17(1.0), fmt17(0.5)});
  EXPECT_EQ(to_csv(t), "a,b\n1,0.5\n");
}

TEST(CliCommands, ActionTableMatchesClosedForms) {
  const RunConfig c = parse_config_text("{}");
  std::ostringstream out;
  EXPECT_EQ(cmd_action_table(2, c, false, out), kSuccess);
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "n,L_n,tau_n,S_n,A0_n");
  EXPECT_NE(s.find("2,0.86025401382809963,2.7025676900634901"), std::string::npos);
  EXPECT_THROW(cmd_action_table(0, c, false, out), ConfigError);
}

TEST(CliCommands, UnforcedSweepWritesFamily) {
  const auto dir = scratch_dir("sweep");
  RunConfig c = parse_config_text(R"({"n_range": [1, 3], "samples": 64, "formats": ["csv", "json"]})");
  c.out = dir.string();
  std::ostringstream log;
  EXPECT_EQ(cmd_sweep(c, log), kSuccess) << log.str();
  const std::string family = slurp(dir / "family.csv");
  EXPECT_EQ(family.substr(0, family.find('\n')), "n,kappa,S,action,max_q,residual");
  EXPECT_EQ(std::count(family.begin(), family.end(), '\n'), 4);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_NEAR(summary["fit_exponent_max_q"].get<double>(), -2.0 / 3.0, 1e-6);
  EXPECT_TRUE(summary["actions_distinct"].get<bool>());
  std::filesystem::remove_all(dir);
}

TEST(CliCommands, LoglogSlope) {
  EXPECT_NEAR(loglog_slope({1, 2, 4, 8}, {1, 0.25, 0.0625, 0.015625}), -2.0, 1e-12);
}
