#pragma once

// Command-line driver. Kept in a header so tests can call run_cli in-process.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "emacfem/emacfem.hpp"

namespace emacfem::cli {

/// Exit codes. 1 is a failed verification report.
enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kDivergence = 3, kIo = 4 };

struct Hooks {
  /// Nonlinear kernel used by `verify`; tests swap in a corrupted one.
  NonlinearKernel kernel = nonlinear_term;
};

namespace detail {

struct Flag {
  std::string name;  // without dashes
  std::string key;   // config key
  std::string value;
  CLI::Option* opt = nullptr;
};

class Flags {
 public:
  void add(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    flags_.push_back(std::make_unique<Flag>(Flag{name, key, {}, nullptr}));
    flags_.back()->opt = app->add_option("--" + name, flags_.back()->value, help);
  }
  void add_common(CLI::App* app) {
    add(app, "benchmark", "benchmark", "gresho, taylor_green or cylinder");
    add(app, "stepper", "stepper", "cn, bdf2 or bdf3");
    add(app, "dt", "dt", "time step");
    add(app, "t-end", "t_end", "final time");
    add(app, "nu", "nu", "kinematic viscosity");
    add(app, "gamma", "gamma", "grad-div parameter");
    add(app, "mesh-n", "mesh_n", "cells per side of generated meshes");
    add(app, "mesh", "mesh", "TRIMESH file");
    add(app, "out", "out", "output directory");
    add(app, "snapshot-every", "snapshot_every", "VTK snapshot cadence in steps (0 = none)");
    add(app, "seed", "seed", "random seed");
    add(app, "trials", "trials", "random trials per check");
    add(app, "jobs", "jobs", "parallel runs in a sweep");
    app->add_option("--config", config_path, "key = value configuration file");
  }
  const Flag* find(const std::string& name) const {
    for (const auto& f : flags_) {
      if (f->name == name) return f.get();
    }
    return nullptr;
  }
  bool given(const std::string& name) const {
    const Flag* f = find(name);
    return f && f->opt->count() > 0;
  }

  /// Config file first, then the flags, so that flags win.
  RunConfig resolve(const std::string& preamble = {}) const {
    std::string text = preamble;
    int file_lines = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw IoError("cannot open " + config_path);
      std::ostringstream ss;
      ss << is.rdbuf();
      text += ss.str();
      if (!text.empty() && text.back() != '\n') text += '\n';
      file_lines = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
    }
    std::vector<const Flag*> order;
    for (const auto& f : flags_) {
      if (f->opt->count() == 0) continue;
      text += f->key + " = " + f->value + '\n';
      order.push_back(f.get());
    }
    std::istringstream is(text);
    try {
      return read_config(is);
    } catch (const ParseError& e) {
      if (e.line() <= file_lines) throw ParseError(std::string(e.what()) + " in " + config_path, e.line());
      const Flag* f = order.at(static_cast<std::size_t>(e.line() - file_lines - 1));
      throw ParameterError("--" + f->name + ": " + e.what());
    }
  }

  std::string config_path;

 private:
  std::vector<std::unique_ptr<Flag>> flags_;
};

inline std::string fmt(double v, int prec = 6) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

inline std::string base_name(const RunConfig& c) {
  std::string b(to_string(c.spec.name));
  for (auto& ch : b) {
    if (ch == '-') ch = '_';
  }
  return b;
}

inline void write_blowup_report(const BlowUp& b, FormulationKind kind, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "formulation = " << to_string(kind) << '\n'
     << "time = " << emacfem::detail::format_double(b.t) << '\n'
     << "reason = " << b.reason << '\n'
     << "residuals =";
  for (double r : b.residuals) os << ' ' << emacfem::detail::format_double(r);
  os << '\n';
}

inline std::string outcome(const SweepRow& row) {
  if (!row.error.empty()) return "error: " + row.error;
  if (row.result->run.blowup) return "blow-up at t=" + fmt(row.result->run.blowup->t);
  return "completed";
}

inline int cmd_run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  const std::string stem = base_name(c) + "_" + std::string(to_string(c.spec.kind));
  write_config(c, dir / (stem + ".cfg"));

  std::optional<MixedSpace> snap_space;
  SnapshotFn snapshot;
  if (c.snapshot_every > 0) {
    snap_space.emplace(build_space(benchmark_mesh(c.spec)));
    snapshot = [&](Index step, const State& s) {
      char name[64];
      std::snprintf(name, sizeof name, "_%06lld.vtk", static_cast<long long>(step));
      write_vtk(*snap_space, s, dir / (stem + name));
    };
  }
  const BenchmarkResult res = run_benchmark(c.spec, snapshot, c.snapshot_every);
  write_csv(res.run.series, dir / (stem + ".csv"));

  const auto& s = res.summary;
  out << "benchmark " << to_string(c.spec.name) << ", formulation " << to_string(c.spec.kind) << ", "
      << res.run.series.size() - 1 << " steps to t=" << fmt(res.run.final_state.t) << '\n'
      << "max |dE|/E0      " << fmt(s.max_energy_drift) << '\n'
      << "max |dM|         " << fmt(s.max_momentum_drift) << '\n'
      << "max |dM_ang|     " << fmt(s.max_angular_momentum_drift) << '\n'
      << "max div residual " << fmt(s.max_divergence_residual) << '\n'
      << "max newton iters " << s.max_newton_iters << '\n';
  if (!std::isnan(s.final_l2_error)) out << "final L2 error   " << fmt(s.final_l2_error) << '\n';
  if (!std::isnan(s.max_drag)) {
    out << "max c_d          " << fmt(s.max_drag) << '\n'
        << "max c_l          " << fmt(s.max_lift) << '\n'
        << "final dp         " << fmt(s.final_pressure_drop) << '\n';
  }
  out << "wrote " << (dir / (stem + ".csv")).string() << '\n';

  if (res.run.blowup) {
    const auto path = dir / (stem + "_blowup.txt");
    write_blowup_report(*res.run.blowup, c.spec.kind, path);
    err << "blow-up at t=" << fmt(res.run.blowup->t) << ": " << res.run.blowup->reason << " (report "
        << path.string() << ")\n";
    return kDivergence;
  }
  return kOk;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const std::vector<FormulationKind> kinds = c.formulations;
  const std::vector<SweepRow> rows = sweep(c.spec, kinds, c.jobs);
  const bool cylinder = c.spec.name == BenchmarkName::cylinder;
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  const auto path = dir / ("sweep_" + base_name(c) + ".csv");
  std::ofstream csv(path);
  if (!csv) throw IoError("cannot open " + path.string() + " for writing");
  using emacfem::detail::format_double;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (cylinder) {
    csv << "method,cd_max,cl_max,dp_final,outcome\n";
    out << std::left << std::setw(8) << "method" << std::setw(14) << "c_d,max" << std::setw(14) << "c_l,max"
        << std::setw(14) << "dp(T)" << "outcome\n";
  } else {
    csv << "method,max_rel_energy_drift,max_momentum_drift,max_angular_momentum_drift,final_l2_error,outcome\n";
    out << std::left << std::setw(8) << "method" << std::setw(14) << "|dE|/E0" << std::setw(14) << "|dM|"
        << std::setw(14) << "|dM_ang|" << std::setw(14) << "L2 error" << "outcome\n";
  }
  for (const auto& row : rows) {
    const BenchmarkSummary* s = row.result ? &row.result->summary : nullptr;
    auto val = [&](double BenchmarkSummary::*m) { return s ? s->*m : nan; };
    const std::string oc = outcome(row);
    std::string oc_csv = oc;
    std::replace(oc_csv.begin(), oc_csv.end(), ',', ';');
    out << std::setw(8) << to_string(row.kind);
    csv << to_string(row.kind);
    std::vector<double> vals;
    if (cylinder) {
      vals = {val(&BenchmarkSummary::max_drag), val(&BenchmarkSummary::max_lift),
              val(&BenchmarkSummary::final_pressure_drop)};
    } else {
      vals = {val(&BenchmarkSummary::max_energy_drift), val(&BenchmarkSummary::max_momentum_drift),
              val(&BenchmarkSummary::max_angular_momentum_drift), val(&BenchmarkSummary::final_l2_error)};
    }
    for (double v : vals) {
      out << std::setw(14) << fmt(v, 5);
      csv << ',' << (std::isnan(v) ? std::string() : format_double(v));
    }
    out << oc << '\n';
    csv << ',' << oc_csv << '\n';
  }
  out << "wrote " << path.string() << '\n';
  return kOk;
}

inline int cmd_verify(const RunConfig& c, const Hooks& hooks, std::ostream& out) {
  VerifyOptions opt;
  opt.seed = c.seed;
  opt.trials = c.trials;
  opt.kernel = hooks.kernel;
  const VerifyReport rep = verify_all(opt);
  out << "seed " << c.seed << ", " << c.trials << " trials\n";
  for (const auto& ch : rep.checks) {
    out << (ch.passed() ? "PASS " : "FAIL ") << std::left << std::setw(44) << ch.name << std::right
        << std::setw(12) << fmt(ch.value, 3) << "  (tol " << fmt(ch.tol, 1) << ")\n";
  }
  out << (rep.passed() ? "all checks passed\n" : "verification FAILED\n");
  return rep.passed() ? kOk : kVerifyFailed;
}

inline int cmd_convergence(const RunConfig& c, std::vector<int> meshes, std::vector<double> dts, double dt_ref,
                           std::ostream& out) {
  const auto& s = c.spec;
  if (meshes.empty()) meshes = {s.mesh_n, 2 * s.mesh_n};
  if (dts.empty()) dts = {0.02, 0.01};
  if (!(dt_ref > 0.0)) dt_ref = *std::min_element(dts.begin(), dts.end()) / 16.0;
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  const auto path = dir / ("convergence_" + std::string(to_string(s.kind)) + ".csv");
  std::ofstream csv(path);
  if (!csv) throw IoError("cannot open " + path.string() + " for writing");
  csv << "study,h,dt,error,rate\n";
  using emacfem::detail::format_double;

  out << "spatial (dt=" << fmt(s.stepper.dt) << ", T=" << fmt(s.stepper.t_end) << ")\n";
  out << std::left << std::setw(12) << "h" << std::setw(14) << "L2 error" << "rate\n";
  for (const auto& r : spatial_convergence(s.kind, s.form.nu, s.stepper, meshes)) {
    out << std::setw(12) << fmt(r.h, 4) << std::setw(14) << fmt(r.error, 4) << fmt(r.rate, 3) << '\n';
    csv << "space," << format_double(r.h) << ',' << format_double(r.dt) << ',' << format_double(r.error) << ','
        << (std::isnan(r.rate) ? "" : format_double(r.rate)) << '\n';
  }

  // The common final time must be a multiple of every step.
  StepperConfig st = s.stepper;
  const double dt_max = *std::max_element(dts.begin(), dts.end());
  st.t_end = std::floor(st.t_end / dt_max + 1e-9) * dt_max;
  out << "temporal (mesh " << meshes.back() << ", T=" << fmt(st.t_end) << ", reference dt=" << fmt(dt_ref) << ")\n";
  out << std::setw(12) << "dt" << std::setw(14) << "error" << "rate\n";
  for (const auto& r : temporal_convergence(s.kind, s.form.nu, st, meshes.back(), dts, dt_ref)) {
    out << std::setw(12) << fmt(r.dt, 4) << std::setw(14) << fmt(r.error, 4) << fmt(r.rate, 3) << '\n';
    csv << "time," << format_double(r.h) << ',' << format_double(r.dt) << ',' << format_double(r.error) << ','
        << (std::isnan(r.rate) ? "" : format_double(r.rate)) << '\n';
  }
  out << "wrote " << path.string() << '\n';
  return kOk;
}

inline int cmd_mesh_info(const RunConfig& c, std::ostream& out) {
  const Mesh mesh = benchmark_mesh(c.spec);
  const MixedSpace space = build_space(mesh);
  const MeshSize sz = mesh_size(mesh);
  out << "vertices         " << mesh.num_vertices() << '\n'
      << "cells            " << mesh.num_cells() << '\n'
      << "edges            " << mesh.num_edges() << '\n'
      << "boundary edges   " << mesh.boundary_edges().size() << '\n';
  for (auto tag : kAllBoundaryTags) {
    const auto n = std::count_if(mesh.boundary_edges().begin(), mesh.boundary_edges().end(),
                                 [&](const BoundaryEdge& e) { return e.tag == tag; });
    if (n > 0) out << "  " << std::left << std::setw(15) << to_string(tag) << n << '\n';
  }
  out << "h max            " << fmt(sz.h_max) << '\n'
      << "h min            " << fmt(sz.h_min) << '\n'
      << "min angle (deg)  " << fmt(sz.min_angle) << '\n'
      << "velocity dofs    " << space.num_velocity_dofs() << '\n'
      << "pressure dofs    " << space.num_pressure_dofs() << '\n';
  return kOk;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const char* flag) {
  std::vector<T> out;
  for (const auto& item : emacfem::detail::split(s, ',')) {
    if (item.empty()) continue;
    T v{};
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size()) {
      throw ParameterError(std::string(flag) + ": invalid value '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

/// Parses and executes one command line; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
                   const Hooks& hooks = {}) {
  CLI::App app{"Taylor-Hood Navier-Stokes solver with selectable nonlinear formulations"};
  app.require_subcommand(1, 1);

  detail::Flags run_f, sweep_f, verify_f, conv_f, info_f;
  CLI::App* run_cmd = app.add_subcommand("run", "run one benchmark");
  run_f.add(run_cmd, "formulation", "formulation", "conv, skew, rot, cons or emac");
  run_f.add_common(run_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run one benchmark for several formulations");
  sweep_f.add(sweep_cmd, "formulation", "formulations", "comma-separated list (default: all five)");
  sweep_f.add_common(sweep_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify", "check identities, annihilation and Jacobians");
  verify_f.add_common(verify_cmd);

  CLI::App* conv_cmd = app.add_subcommand("convergence", "Taylor-Green convergence study");
  conv_f.add(conv_cmd, "formulation", "formulation", "conv, skew, rot, cons or emac");
  conv_f.add_common(conv_cmd);
  std::string meshes_s, dts_s;
  double dt_ref = 0.0;
  conv_cmd->add_option("--meshes", meshes_s, "comma-separated mesh sizes (default: n,2n)");
  conv_cmd->add_option("--dts", dts_s, "comma-separated time steps (default: 0.02,0.01)");
  conv_cmd->add_option("--dt-ref", dt_ref, "reference time step (default: smallest / 16)");

  CLI::App* info_cmd = app.add_subcommand("mesh-info", "print mesh statistics");
  info_f.add_common(info_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (run_cmd->parsed()) {
      return detail::cmd_run(run_f.resolve(), out, err);
    }
    if (sweep_cmd->parsed()) {
      RunConfig c = sweep_f.resolve();
      if (c.formulations.empty()) {
        if (sweep_f.given("formulation")) throw ParameterError("--formulation: empty formulation list");
        c.formulations.assign(kAllFormulations.begin(), kAllFormulations.end());
      }
      return detail::cmd_sweep(c, out);
    }
    if (verify_cmd->parsed()) return detail::cmd_verify(verify_f.resolve(), hooks, out);
    if (conv_cmd->parsed()) {
      const RunConfig c = conv_f.resolve("benchmark = taylor_green\n");
      if (c.spec.name != BenchmarkName::taylor_green) {
        throw ParameterError("--benchmark: convergence studies use taylor_green");
      }
      return detail::cmd_convergence(c, detail::parse_list<int>(meshes_s, "--meshes"),
                                     detail::parse_list<double>(dts_s, "--dts"), dt_ref, out);
    }
    return detail::cmd_mesh_info(info_f.resolve(), out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace emacfem::cli
