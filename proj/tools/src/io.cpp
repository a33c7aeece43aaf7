#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "kepreg/errors.hpp"

namespace kepreg::cli {

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void emit(const nlohmann::json& j, std::ostringstream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string end_pad(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << nlohmann::json(it.key()).dump() << ": ";
        emit(it.value(), os, indent + 2);
      }
      os << "\n" << end_pad << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      const bool flat = std::none_of(j.begin(), j.end(), [](const auto& e) { return e.is_structured(); });
      if (flat) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          emit(j[i], os, indent);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        emit(j[i], os, indent + 2);
      }
      os << "\n" << end_pad << "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      // JSON has no literals for non-finite values.
      if (!std::isfinite(x))
        os << "null";
      else
        os << fmt17(x);
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << csv_field(t.header[i]);
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
    os << "\n";
  }
  return os.str();
}

std::string dump_json(const nlohmann::json& j) {
  std::ostringstream os;
  emit(j, os, 0);
  os << "\n";
  return os.str();
}

std::string to_svg(const std::vector<Polyline>& lines, const std::string& title) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& l : lines)
    for (const auto& [x, y] : l.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmax > xmin)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (!(ymax > ymin)) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  constexpr double W = 640.0, H = 640.0, M = 40.0;
  const double scale = std::min((W - 2 * M) / (xmax - xmin), (H - 2 * M) / (ymax - ymin));
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n";
  os << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
  os << "<text x=\"20\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  char buf[64];
  for (std::size_t i = 0; i < lines.size(); ++i) {
    os << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << colors[i % 6] << "\"";
    if (!lines[i].label.empty()) os << " data-label=\"" << lines[i].label << "\"";
    os << " points=\"";
    for (const auto& [x, y] : lines[i].points) {
      std::snprintf(buf, sizeof buf, "%.3f,%.3f ", M + (x - xmin) * scale, H - M - (y - ymin) * scale);
      os << buf;
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

nlohmann::json orbit_json(const PeriodicOrbit& o) {
  nlohmann::json j;
  j["regularization"] = to_string(o.regularization);
  j["forcing"] = o.forcing.name();
  j["n"] = o.n;
  j["dim"] = o.dim;
  j["epsilon"] = o.epsilon;
  j["x0"] = std::vector<double>(o.x0.data(), o.x0.data() + o.x0.size());
  j["S"] = o.S;
  j["action"] = o.action;
  j["residual"] = o.residual;
  j["residual_history"] = o.residual_history;
  j["iterations"] = o.iterations;
  j["energy"] = o.energy;
  j["t_advance"] = o.t_advance;
  j["kappa"] = o.kappa;
  j["tau"] = o.tau;
  j["max_q"] = o.max_q;
  j["physical_residual"] = o.physical_residual;
  j["symplectic_defect"] = o.symplectic_defect;
  nlohmann::json spec = nlohmann::json::array();
  for (const auto& z : o.monodromy_spectrum) spec.push_back({z.real(), z.imag()});
  j["monodromy_spectrum"] = spec;
  nlohmann::json cr = nlohmann::json::array();
  for (const auto& c : o.crossings) {
    nlohmann::json e;
    e["s"] = c.s;
    e["t"] = c.t;
    e["tau"] = c.tau;
    e["energy_limit"] = c.energy_limit;
    e["direction"] = std::vector<double>(c.direction.data(), c.direction.data() + c.direction.size());
    cr.push_back(e);
  }
  j["crossings"] = cr;
  return j;
}

Table orbit_samples_table(const PeriodicOrbit& o) {
  const RegularizedModel model(o.regularization, o.forcing);
  Table t;
  t.header = {"s", "t"};
  for (int i = 1; i <= o.dim; ++i) t.header.push_back("q" + std::to_string(i));
  for (int i = 1; i <= o.dim; ++i) t.header.push_back("p" + std::to_string(i));
  for (std::size_t k = 0; k < o.samples.size(); ++k) {
    const CartesianExtState c = model.to_cartesian(o.samples[k]);
    std::vector<std::string> row{fmt17(o.sample_s[k]), fmt17(c.t)};
    for (int i = 0; i < o.dim; ++i) row.push_back(fmt17(c.q[i]));
    for (int i = 0; i < o.dim; ++i) row.push_back(fmt17(c.p[i]));
    t.add(std::move(row));
  }
  return t;
}

Polyline orbit_polyline(const PeriodicOrbit& o) {
  const RegularizedModel model(o.regularization, o.forcing);
  Polyline l;
  l.label = "n=" + std::to_string(o.n);
  for (const auto& x : o.samples) {
    const CartesianExtState c = model.to_cartesian(x);
    l.points.emplace_back(c.q[0], c.q[1]);
  }
  return l;
}

}  // namespace kepreg::cli
