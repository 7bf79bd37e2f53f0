#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "emacfem/bench.hpp"

namespace emacfem {

// ---------------------------------------------------------------------------
// Diagnostics CSV

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline double parse_double(const std::string& s, const std::string& what, int line) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  // from_chars, unlike stod, accepts subnormals.
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("invalid number '" + s + "' for " + what, line);
  return v;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

}  // namespace detail

/// Columns written for a series: the fixed ones, each optional quantity
/// present in any record, and newton_iters.
inline std::vector<std::string> csv_columns(const DiagnosticsSeries& series) {
  std::vector<std::string> cols{"t", "E", "Mx", "My", "Mang", "divnorm"};
  auto any = [&](auto member) {
    for (const auto& r : series) {
      if ((r.*member).has_value()) return true;
    }
    return false;
  };
  if (any(&DiagnosticsRecord::drag)) cols.push_back("cd");
  if (any(&DiagnosticsRecord::lift)) cols.push_back("cl");
  if (any(&DiagnosticsRecord::pressure_drop)) cols.push_back("dp");
  if (any(&DiagnosticsRecord::enstrophy)) cols.push_back("enstrophy");
  if (any(&DiagnosticsRecord::total_vorticity)) cols.push_back("totvort");
  cols.push_back("newton_iters");
  return cols;
}

inline void write_csv(const DiagnosticsSeries& series, std::ostream& os) {
  if (series.empty()) throw ParameterError("write_csv: empty series");
  const auto cols = csv_columns(series);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
  for (const auto& r : series) {
    std::vector<std::string> cells;
    for (const auto& c : cols) {
      if (c == "t") cells.push_back(detail::format_double(r.t));
      else if (c == "E") cells.push_back(detail::format_double(r.energy));
      else if (c == "Mx") cells.push_back(detail::format_double(r.momentum.x));
      else if (c == "My") cells.push_back(detail::format_double(r.momentum.y));
      else if (c == "Mang") cells.push_back(detail::format_double(r.angular_momentum));
      else if (c == "divnorm") cells.push_back(detail::format_double(r.div_norm));
      else if (c == "cd") cells.push_back(opt(r.drag));
      else if (c == "cl") cells.push_back(opt(r.lift));
      else if (c == "dp") cells.push_back(opt(r.pressure_drop));
      else if (c == "enstrophy") cells.push_back(opt(r.enstrophy));
      else if (c == "totvort") cells.push_back(opt(r.total_vorticity));
      else if (c == "newton_iters") cells.push_back(std::to_string(r.newton_iters));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }
}

inline void write_csv(const DiagnosticsSeries& series, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(series, os);
  if (!os) throw IoError("write failed: " + path.string());
}

inline DiagnosticsSeries read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("missing CSV header", 1);
  const auto cols = detail::split(detail::trim(line), ',');
  for (const char* required : {"t", "E", "Mx", "My", "Mang", "divnorm"}) {
    if (std::find(cols.begin(), cols.end(), required) == cols.end()) {
      throw ParseError(std::string("CSV header lacks column ") + required, 1);
    }
  }
  DiagnosticsSeries series;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != cols.size()) throw ParseError("expected " + std::to_string(cols.size()) + " fields", lineno);
    DiagnosticsRecord r;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& c = cols[i];
      const auto& s = cells[i];
      auto opt = [&]() -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        return detail::parse_double(s, c, lineno);
      };
      if (c == "t") r.t = detail::parse_double(s, c, lineno);
      else if (c == "E") r.energy = detail::parse_double(s, c, lineno);
      else if (c == "Mx") r.momentum.x = detail::parse_double(s, c, lineno);
      else if (c == "My") r.momentum.y = detail::parse_double(s, c, lineno);
      else if (c == "Mang") r.angular_momentum = detail::parse_double(s, c, lineno);
      else if (c == "divnorm") r.div_norm = detail::parse_double(s, c, lineno);
      else if (c == "cd") r.drag = opt();
      else if (c == "cl") r.lift = opt();
      else if (c == "dp") r.pressure_drop = opt();
      else if (c == "enstrophy") r.enstrophy = opt();
      else if (c == "totvort") r.total_vorticity = opt();
      else if (c == "newton_iters") r.newton_iters = static_cast<int>(detail::parse_double(s, c, lineno));
      else throw ParseError("unknown CSV column " + c, 1);
    }
    series.push_back(r);
  }
  return series;
}

inline DiagnosticsSeries read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_csv(is);
}

// ---------------------------------------------------------------------------
// Legacy ASCII VTK

/// Unstructured grid with one point per P2 node and every cell split into
/// four linear triangles. Point data: velocity, pressure (midpoints take the
/// mean of the edge end values) and speed.
inline void write_vtk(const MixedSpace& space, const State& state, std::ostream& os) {
  const Mesh& mesh = space.mesh();
  const Index np = space.num_scalar_nodes();
  const Index nc = 4 * mesh.num_cells();
  os << "# vtk DataFile Version 3.0\n";
  os << "emacfem t=" << detail::format_double(state.t) << "\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << np << " double\n" << std::setprecision(17);
  for (Index n = 0; n < np; ++n) {
    const Vec2 x = space.node_coordinate(n);
    os << x.x << ' ' << x.y << " 0\n";
  }
  os << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto n = space.cell_nodes(c);
    const Index sub[4][3] = {{n[0], n[3], n[5]}, {n[3], n[1], n[4]}, {n[5], n[4], n[2]}, {n[3], n[4], n[5]}};
    for (const auto& t : sub) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  os << "CELL_TYPES " << nc << '\n';
  for (Index c = 0; c < nc; ++c) os << "5\n";
  os << "POINT_DATA " << np << '\n';
  os << "VECTORS velocity double\n";
  for (Index n = 0; n < np; ++n) {
    os << state.coeffs[space.velocity_dof(0, n)] << ' ' << state.coeffs[space.velocity_dof(1, n)] << " 0\n";
  }
  auto pressure = [&](Index n) {
    if (n < mesh.num_vertices()) return state.coeffs[space.pressure_dof(n)];
    const auto& e = mesh.edges()[n - mesh.num_vertices()];
    return 0.5 * (state.coeffs[space.pressure_dof(e[0])] + state.coeffs[space.pressure_dof(e[1])]);
  };
  os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (Index n = 0; n < np; ++n) os << pressure(n) << '\n';
  os << "SCALARS speed double 1\nLOOKUP_TABLE default\n";
  for (Index n = 0; n < np; ++n) {
    os << std::hypot(state.coeffs[space.velocity_dof(0, n)], state.coeffs[space.velocity_dof(1, n)]) << '\n';
  }
}

inline void write_vtk(const MixedSpace& space, const State& state, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_vtk(space, state, os);
  if (!os) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  BenchmarkSpec spec;
  /// Formulations of a sweep; empty means spec.kind alone.
  std::vector<FormulationKind> formulations;
  std::string out = "out";
  Index snapshot_every = 0;
  std::uint64_t seed = 20190614;
  int trials = 100;
  int jobs = 1;

  static RunConfig defaults(BenchmarkName name = BenchmarkName::gresho) {
    RunConfig c;
    c.spec = BenchmarkSpec::defaults(name);
    return c;
  }
};

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError("invalid boolean '" + v + "' for key " + key, line);
}

inline long long parse_int(const std::string& v, const std::string& key, int line) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ParseError("invalid integer '" + v + "' for key " + key, line);
  return out;
}

inline double parse_number(const std::string& v, const std::string& key, int line) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ParseError("invalid number '" + v + "' for key " + key, line);
  return out;
}

inline std::vector<FormulationKind> parse_formulation_list(const std::string& v, const std::string& key, int line) {
  std::vector<FormulationKind> out;
  for (const auto& item : split(v, ',')) {
    if (item.empty()) continue;
    auto k = parse_formulation(item);
    if (!k) throw ParseError("unknown formulation '" + item + "' for key " + key, line);
    out.push_back(*k);
  }
  return out;
}

}  // namespace detail

/// Keys accepted in configuration files, in canonical order.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "benchmark",  "formulation", "formulations",     "stepper",           "dt",          "t_end",
      "nu",         "gamma",       "mesh_n",           "mesh",              "initial",     "newton_tol",
      "newton_max", "outflow_correction", "quadrature_degree", "companion", "vorticity_boundary",
      "out",        "snapshot_every", "seed",          "trials",            "jobs"};
  return keys;
}

/// Applies one `key = value` setting. Throws ParseError naming the key when
/// it is unknown or its value is malformed.
inline void apply_config_value(RunConfig& c, const std::string& key, const std::string& v, int line = 0) {
  using namespace detail;
  auto& s = c.spec;
  if (key == "benchmark") {
    auto b = parse_benchmark(v);
    if (!b) throw ParseError("unknown benchmark '" + v + "' for key benchmark", line);
    s.name = *b;
  } else if (key == "formulation") {
    auto k = parse_formulation(v);
    if (!k) throw ParseError("unknown formulation '" + v + "' for key formulation", line);
    s.kind = *k;
  } else if (key == "formulations") {
    c.formulations = parse_formulation_list(v, key, line);
  } else if (key == "stepper") {
    auto st = parse_time_scheme(v);
    if (!st) throw ParseError("unknown stepper '" + v + "' for key stepper", line);
    s.stepper.scheme = *st;
  } else if (key == "dt") {
    s.stepper.dt = parse_number(v, key, line);
  } else if (key == "t_end") {
    s.stepper.t_end = parse_number(v, key, line);
  } else if (key == "nu") {
    s.form.nu = parse_number(v, key, line);
  } else if (key == "gamma") {
    s.form.gamma = parse_number(v, key, line);
  } else if (key == "mesh_n") {
    s.mesh_n = static_cast<int>(parse_int(v, key, line));
  } else if (key == "mesh") {
    s.mesh_path = v;
  } else if (key == "initial") {
    if (v == "project") s.initial = InitialCondition::project;
    else if (v == "interpolate") s.initial = InitialCondition::interpolate;
    else throw ParseError("unknown initial condition '" + v + "' for key initial", line);
  } else if (key == "newton_tol") {
    s.stepper.newton_tol = parse_number(v, key, line);
  } else if (key == "newton_max") {
    s.stepper.newton_max = static_cast<int>(parse_int(v, key, line));
  } else if (key == "outflow_correction") {
    s.form.outflow_correction = parse_bool(v, key, line);
  } else if (key == "quadrature_degree") {
    s.form.quadrature_degree = static_cast<int>(parse_int(v, key, line));
  } else if (key == "companion") {
    s.companion = parse_bool(v, key, line);
  } else if (key == "vorticity_boundary") {
    if (v == "zero") s.vorticity_boundary = VorticityBoundary::zero;
    else if (v == "natural") s.vorticity_boundary = VorticityBoundary::natural;
    else throw ParseError("unknown vorticity boundary '" + v + "' for key vorticity_boundary", line);
  } else if (key == "out") {
    c.out = v;
  } else if (key == "snapshot_every") {
    c.snapshot_every = parse_int(v, key, line);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_int(v, key, line));
  } else if (key == "trials") {
    c.trials = static_cast<int>(parse_int(v, key, line));
  } else if (key == "jobs") {
    c.jobs = static_cast<int>(parse_int(v, key, line));
  } else {
    throw ParseError("unknown configuration key '" + key + "'", line);
  }
}

/// Parses `key = value` lines (`#` starts a comment). Defaults come from
/// the benchmark named by the `benchmark` key, wherever it appears.
inline RunConfig read_config(std::istream& is) {
  std::vector<std::tuple<std::string, std::string, int>> entries;
  std::string line;
  int lineno = 0;
  std::optional<BenchmarkName> bench;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", lineno);
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      throw ParseError("unknown configuration key '" + key + "'", lineno);
    }
    if (key == "benchmark") {
      bench = parse_benchmark(value);
      if (!bench) throw ParseError("unknown benchmark '" + value + "' for key benchmark", lineno);
    }
    entries.emplace_back(key, value, lineno);
  }
  RunConfig c = RunConfig::defaults(bench.value_or(BenchmarkName::gresho));
  for (const auto& [k, v, l] : entries) apply_config_value(c, k, v, l);
  return c;
}

inline RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_config(is);
}

/// Canonical form: every key in config_keys() order, numbers in shortest
/// round-trip notation.
inline void write_config(const RunConfig& c, std::ostream& os) {
  using detail::shortest;
  const auto& s = c.spec;
  std::string forms;
  for (std::size_t i = 0; i < c.formulations.size(); ++i) {
    forms += (i ? "," : "") + std::string(to_string(c.formulations[i]));
  }
  os << "benchmark = " << to_string(s.name) << '\n'
     << "formulation = " << to_string(s.kind) << '\n'
     << "formulations = " << forms << '\n'
     << "stepper = " << to_string(s.stepper.scheme) << '\n'
     << "dt = " << shortest(s.stepper.dt) << '\n'
     << "t_end = " << shortest(s.stepper.t_end) << '\n'
     << "nu = " << shortest(s.form.nu) << '\n'
     << "gamma = " << shortest(s.form.gamma) << '\n'
     << "mesh_n = " << s.mesh_n << '\n'
     << "mesh = " << s.mesh_path << '\n'
     << "initial = " << (s.initial == InitialCondition::project ? "project" : "interpolate") << '\n'
     << "newton_tol = " << shortest(s.stepper.newton_tol) << '\n'
     << "newton_max = " << s.stepper.newton_max << '\n'
     << "outflow_correction = " << (s.form.outflow_correction ? "true" : "false") << '\n'
     << "quadrature_degree = " << s.form.quadrature_degree << '\n'
     << "companion = " << (s.companion ? "true" : "false") << '\n'
     << "vorticity_boundary = " << (s.vorticity_boundary == VorticityBoundary::zero ? "zero" : "natural") << '\n'
     << "out = " << c.out << '\n'
     << "snapshot_every = " << c.snapshot_every << '\n'
     << "seed = " << c.seed << '\n'
     << "trials = " << c.trials << '\n'
     << "jobs = " << c.jobs << '\n';
}

inline void write_config(const RunConfig& c, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_config(c, os);
}

}  // namespace emacfem
