#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "kepreg/orbit_finder.hpp"

namespace kepreg::cli {

// Fixed 17-significant-digit formatting, independent of locale.
std::string fmt17(double x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};
std::string to_csv(const Table& t);

// JSON text with every floating point number printed by fmt17 and keys in
// sorted order, so identical inputs give identical bytes.
std::string dump_json(const nlohmann::json& j);

struct Polyline {
  std::string label;
  std::vector<std::pair<double, double>> points;
};
std::string to_svg(const std::vector<Polyline>& lines, const std::string& title);

void write_file(const std::filesystem::path& path, const std::string& text);

nlohmann::json orbit_json(const PeriodicOrbit& orbit);
// t, q1..qd, p1..pd per stored sample.
Table orbit_samples_table(const PeriodicOrbit& orbit);
Polyline orbit_polyline(const PeriodicOrbit& orbit);

}  // namespace kepreg::cli
