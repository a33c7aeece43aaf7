#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"

namespace kepreg::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kNoOrbit = 3, kNumericFailure = 4 };

// Each command writes its files below config.out and a short human-readable
// report to `log`. Return values are process exit codes.
int cmd_action_table(int n_max, const RunConfig& config, bool write_file, std::ostream& out);
int cmd_integrate(const RunConfig& config, std::ostream& log);
int cmd_find_orbit(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);
int cmd_rtbp(const RunConfig& config, std::ostream& log);
int cmd_localization(const RunConfig& config, std::ostream& log);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kepreg::cli
