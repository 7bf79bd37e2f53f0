#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "emacfem/vorticity.hpp"

namespace emacfem {

// ---------------------------------------------------------------------------
// Gresho standing vortex on (-0.5, 0.5)^2

struct FlowPoint {
  Vec2 velocity;
  double pressure = 0.0;
};

/// Pressure constants of the Gresho vortex. C2 makes p vanish at r = 0.4
/// and C1 makes it continuous at r = 0.2.
inline const double kGreshoC2 = -12.5 * 0.16 + 20.0 * 0.4 - 4.0 * std::log(0.4);
inline const double kGreshoC1 = kGreshoC2 - 20.0 * 0.2 + 4.0 * std::log(0.2);

/// Closed-form invariants of the exact field: E = pi/37.5 and
/// |integral of x u_y - y u_x| = 0.0186667 pi.
inline constexpr double kGreshoEnergy = std::numbers::pi * 0.8 / 30.0;
inline constexpr double kGreshoAngularMomentum = std::numbers::pi * 0.056 / 3.0;

/// Velocity and pressure of the vortex. In the annulus the velocity is
/// (2 - 5r)(-y/r, x/r), the tangential field matching the core at r = 0.2.
inline FlowPoint gresho_exact(const Vec2& x) {
  const double r = norm(x);
  if (r <= 0.2) return {{-5.0 * x.y, 5.0 * x.x}, 12.5 * r * r + kGreshoC1};
  if (r <= 0.4) {
    return {{-2.0 * x.y / r + 5.0 * x.y, 2.0 * x.x / r - 5.0 * x.x}, 12.5 * r * r - 20.0 * r + 4.0 * std::log(r) + kGreshoC2};
  }
  return {{0.0, 0.0}, 0.0};
}

inline double gresho_vorticity(const Vec2& x) {
  const double r = norm(x);
  if (r <= 0.2) return 10.0;
  if (r <= 0.4) return 2.0 / r - 10.0;
  return 0.0;
}

inline Vec2 gresho_velocity(const Vec2& x) { return gresho_exact(x).velocity; }

inline FlowProblem gresho_problem(FormulationKind kind, const FormConfig& form = {}) {
  FlowProblem p;
  p.kind = kind;
  p.form = form;
  p.bcs.set_no_penetration(BoundaryTag::wall);
  return p;
}

// ---------------------------------------------------------------------------
// Taylor-Green vortex on (0, 1)^2

struct TaylorGreen {
  double nu = 0.01;

  Vec2 velocity(const Vec2& x, double t) const {
    const double pi = std::numbers::pi;
    const double decay = std::exp(-2.0 * pi * pi * nu * t);
    return {std::sin(pi * x.x) * std::cos(pi * x.y) * decay, -std::cos(pi * x.x) * std::sin(pi * x.y) * decay};
  }

  double pressure(const Vec2& x, double t) const {
    const double pi = std::numbers::pi;
    return 0.25 * (std::cos(2.0 * pi * x.x) + std::cos(2.0 * pi * x.y)) * std::exp(-4.0 * pi * pi * nu * t);
  }

  FlowProblem problem(FormulationKind kind, FormConfig form = {}) const {
    FlowProblem p;
    form.nu = nu;
    p.kind = kind;
    p.form = form;
    p.bcs.set_velocity(BoundaryTag::wall, [tg = *this](const Vec2& x, double t) { return tg.velocity(x, t); });
    p.nullspace = PressureNullspace::zero_mean;
    return p;
  }
};

// ---------------------------------------------------------------------------
// Channel flow around a cylinder

inline constexpr double kCylinderDragRef = 2.95092;
inline constexpr double kCylinderLiftRef = 0.47795;
inline constexpr double kCylinderPressureDropRef = -0.11160;

/// Inflow u_x(0, y, t) = 6/0.41^2 sin(pi t/8) y (0.41 - y).
inline Vec2 cylinder_inflow(const Vec2& x, double t) {
  return {6.0 / (0.41 * 0.41) * std::sin(std::numbers::pi * t / 8.0) * x.y * (0.41 - x.y), 0.0};
}

inline FlowProblem cylinder_problem(FormulationKind kind, FormConfig form = {}) {
  FlowProblem p;
  p.kind = kind;
  p.form = form;
  p.bcs.set_no_slip(BoundaryTag::wall).set_no_slip(BoundaryTag::obstacle);
  p.bcs.set_velocity(BoundaryTag::inflow, cylinder_inflow);
  p.bcs.set_natural(BoundaryTag::outflow);
  return p;
}

// ---------------------------------------------------------------------------
// Benchmark specifications

enum class BenchmarkName { gresho, taylor_green, cylinder };

inline std::string_view to_string(BenchmarkName b) {
  switch (b) {
    case BenchmarkName::gresho: return "gresho";
    case BenchmarkName::taylor_green: return "taylor_green";
    case BenchmarkName::cylinder: return "cylinder";
  }
  return "?";
}

inline std::optional<BenchmarkName> parse_benchmark(std::string_view s) {
  for (auto b : {BenchmarkName::gresho, BenchmarkName::taylor_green, BenchmarkName::cylinder}) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

enum class InitialCondition { project, interpolate };

struct BenchmarkSpec {
  BenchmarkName name = BenchmarkName::gresho;
  /// Cells per side for generated meshes (gresho, taylor_green).
  int mesh_n = 24;
  /// TRIMESH file; required for the cylinder, optional otherwise.
  std::string mesh_path;
  FormulationKind kind = FormulationKind::emac;
  StepperConfig stepper{TimeScheme::cn, 0.02, 1.0};
  FormConfig form;
  InitialCondition initial = InitialCondition::project;
  /// Run the companion vorticity equations (gresho only).
  bool companion = true;
  VorticityBoundary vorticity_boundary = VorticityBoundary::zero;
  Vec2 probe_front{0.15, 0.2};
  Vec2 probe_back{0.25, 0.2};

  void validate() const {
    stepper.validate();
    form.validate();
    stepper.num_steps();
    if (mesh_path.empty() && name == BenchmarkName::cylinder) {
      throw ParameterError("cylinder benchmark requires a mesh file");
    }
    if (mesh_path.empty() && mesh_n < 1) throw ParameterError("mesh size must be >= 1");
  }

  static BenchmarkSpec defaults(BenchmarkName name) {
    BenchmarkSpec s;
    s.name = name;
    switch (name) {
      case BenchmarkName::gresho: break;
      case BenchmarkName::taylor_green:
        s.mesh_n = 16;
        s.form.nu = 0.01;
        s.stepper = {TimeScheme::cn, 1e-3, 0.25};
        s.companion = false;
        break;
      case BenchmarkName::cylinder:
        s.form.nu = 1e-3;
        s.stepper = {TimeScheme::bdf3, 0.005, 8.0};
        s.companion = false;
        break;
    }
    return s;
  }
};

inline Mesh benchmark_mesh(const BenchmarkSpec& spec) {
  if (!spec.mesh_path.empty()) return read_mesh(spec.mesh_path);
  switch (spec.name) {
    case BenchmarkName::gresho: return generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, spec.mesh_n, spec.mesh_n);
    case BenchmarkName::taylor_green: return generate_rect_mesh(0.0, 0.0, 1.0, 1.0, spec.mesh_n, spec.mesh_n);
    case BenchmarkName::cylinder: break;
  }
  throw ParameterError("cylinder benchmark requires a mesh file");
}

/// Initial state satisfying the boundary data at t = 0: the discretely
/// divergence-free projection of `u0` (or its nodal interpolant).
inline State initial_state(const MixedSpace& space, const FlowProblem& problem, const VectorField& u0,
                           InitialCondition how = InitialCondition::project, double t0 = 0.0) {
  const DofConstraints bc = velocity_constraints(space, problem.bcs, t0);
  State s;
  if (how == InitialCondition::project) {
    s = divfree_project(space, u0, bc, t0);
  } else {
    s = interpolate(space, u0, t0);
    for (std::size_t k = 0; k < bc.size(); ++k) s.coeffs[bc.dofs[k]] = bc.values[k];
  }
  return s;
}

/// Summary of one benchmark run. Drifts are maxima over all recorded time
/// levels relative to the initial level.
struct BenchmarkSummary {
  double energy0 = 0.0;
  double max_energy_drift = 0.0;  // relative
  double max_momentum_drift = 0.0;
  double max_angular_momentum_drift = 0.0;
  /// Max relative violation of 1/2|u^n|^2 + nu dt sum |grad u^{k+1/2}|^2 = 1/2|u^0|^2 (CN only).
  double max_energy_identity = std::numeric_limits<double>::quiet_NaN();
  double max_enstrophy_step = std::numeric_limits<double>::quiet_NaN();  // relative to enstrophy at t=0
  double max_total_vorticity_step = std::numeric_limits<double>::quiet_NaN();
  double max_divergence_residual = 0.0;  // max_j |(div u, q_j)|
  int max_newton_iters = 0;
  double final_l2_error = std::numeric_limits<double>::quiet_NaN();
  double max_drag = std::numeric_limits<double>::quiet_NaN();
  double max_lift = std::numeric_limits<double>::quiet_NaN();
  double final_pressure_drop = std::numeric_limits<double>::quiet_NaN();
};

struct BenchmarkResult {
  RunResult run;
  BenchmarkSummary summary;
};

/// Called with the step index (0 for the initial state) and the state.
using SnapshotFn = std::function<void(Index step, const State&)>;

inline BenchmarkResult run_benchmark(const BenchmarkSpec& spec, const SnapshotFn& snapshot = {},
                                     Index snapshot_every = 0) {
  spec.validate();
  const MixedSpace space = build_space(benchmark_mesh(spec));
  FlowProblem problem;
  State u0;
  const TaylorGreen tg{spec.form.nu};
  switch (spec.name) {
    case BenchmarkName::gresho:
      problem = gresho_problem(spec.kind, spec.form);
      u0 = initial_state(space, problem, gresho_velocity, spec.initial);
      break;
    case BenchmarkName::taylor_green:
      problem = tg.problem(spec.kind, spec.form);
      u0 = initial_state(space, problem, [&](const Vec2& x) { return tg.velocity(x, 0.0); }, spec.initial);
      break;
    case BenchmarkName::cylinder:
      problem = cylinder_problem(spec.kind, spec.form);
      if (!space.mesh().has_tag(BoundaryTag::obstacle)) {
        throw ParameterError("cylinder mesh has no boundary edges tagged obstacle");
      }
      u0 = State::zero(space);
      break;
  }

  BenchmarkSummary sum;
  const bool companion = spec.companion && spec.name == BenchmarkName::gresho;
  std::optional<VorticityStepper> vstep;
  VorticityState w_half, w_one;
  double enstrophy0 = 0.0;
  if (companion) {
    vstep.emplace(space, spec.form.nu, spec.vorticity_boundary);
    w_half = curl_project(space, u0, 0.5, spec.vorticity_boundary);
    w_one = curl_project(space, u0, 1.0, spec.vorticity_boundary);
    enstrophy0 = enstrophy(space, w_half);
    sum.max_enstrophy_step = sum.max_total_vorticity_step = 0.0;
  }
  const bool cn = spec.stepper.scheme == TimeScheme::cn;
  if (cn) sum.max_energy_identity = 0.0;
  double dissipation = 0.0;
  Index step_index = 0;

  StepObserver observer = [&](const State* prev, const State& cur, DiagnosticsRecord& rec) {
    if (spec.name == BenchmarkName::cylinder) {
      auto [cd, cl] = drag_lift(space, cur, spec.form.nu);
      rec.drag = cd;
      rec.lift = cl;
      rec.pressure_drop = pressure_drop(space, cur, spec.probe_front, spec.probe_back);
    }
    if (companion) {
      if (prev) {
        const double e_old = enstrophy(space, w_half), v_old = total_vorticity(space, w_one);
        w_half = vstep->advance(w_half, *prev, cur);
        w_one = vstep->advance(w_one, *prev, cur);
        const double e_new = enstrophy(space, w_half), v_new = total_vorticity(space, w_one);
        sum.max_enstrophy_step = std::max(sum.max_enstrophy_step, std::abs(e_new - e_old) / enstrophy0);
        sum.max_total_vorticity_step = std::max(sum.max_total_vorticity_step, std::abs(v_new - v_old));
      }
      rec.enstrophy = enstrophy(space, w_half);
      rec.total_vorticity = total_vorticity(space, w_one);
    }
    if (prev) {
      const Vector mid = 0.5 * (prev->coeffs + cur.coeffs);
      dissipation += spec.form.nu * spec.stepper.dt * gradient_norm_sq(space, mid);
      sum.max_divergence_residual =
          std::max(sum.max_divergence_residual, discrete_divergence(space, cur.coeffs).cwiseAbs().maxCoeff());
      if (cn && sum.energy0 > 0.0) {
        sum.max_energy_identity =
            std::max(sum.max_energy_identity, std::abs(rec.energy + dissipation - sum.energy0) / sum.energy0);
      }
      ++step_index;
    } else {
      sum.energy0 = rec.energy;
    }
    if (snapshot && snapshot_every > 0 && step_index % snapshot_every == 0) snapshot(step_index, cur);
  };

  BenchmarkResult out;
  out.run = run(space, problem, spec.stepper, u0, observer);
  const auto& series = out.run.series;
  const auto& first = series.front();
  for (const auto& r : series) {
    if (first.energy > 0.0) sum.max_energy_drift = std::max(sum.max_energy_drift, std::abs(r.energy - first.energy) / first.energy);
    sum.max_momentum_drift = std::max(sum.max_momentum_drift, norm(r.momentum - first.momentum));
    sum.max_angular_momentum_drift =
        std::max(sum.max_angular_momentum_drift, std::abs(r.angular_momentum - first.angular_momentum));
    sum.max_newton_iters = std::max(sum.max_newton_iters, r.newton_iters);
    if (r.drag) sum.max_drag = std::isnan(sum.max_drag) ? *r.drag : std::max(sum.max_drag, *r.drag);
    if (r.lift) sum.max_lift = std::isnan(sum.max_lift) ? *r.lift : std::max(sum.max_lift, *r.lift);
  }
  if (series.back().pressure_drop) sum.final_pressure_drop = *series.back().pressure_drop;
  const State& last = out.run.final_state;
  if (spec.name == BenchmarkName::gresho) {
    sum.final_l2_error = l2_error(space, last, VectorField(gresho_velocity));
  } else if (spec.name == BenchmarkName::taylor_green) {
    sum.final_l2_error = l2_error(space, last, VectorField([&](const Vec2& x) { return tg.velocity(x, last.t); }));
  }
  out.summary = sum;
  return out;
}

// ---------------------------------------------------------------------------
// Convergence studies (Taylor-Green)

struct ConvergenceRow {
  double h = 0.0;
  double dt = 0.0;
  double error = 0.0;
  /// log2 of the error ratio to the previous row; NaN for the first row.
  double rate = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline State taylor_green_final(const MixedSpace& space, const TaylorGreen& tg, FormulationKind kind,
                                const StepperConfig& stepper) {
  const FlowProblem problem = tg.problem(kind);
  const State u0 = initial_state(space, problem, [&](const Vec2& x) { return tg.velocity(x, 0.0); });
  RunResult r = run(space, problem, stepper, u0);
  if (r.blowup) throw DivergenceError(r.blowup->reason, r.blowup->t, r.blowup->residuals);
  return r.final_state;
}

inline void fill_rates(std::vector<ConvergenceRow>& rows, bool by_h) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double ratio = by_h ? rows[i - 1].h / rows[i].h : rows[i - 1].dt / rows[i].dt;
    rows[i].rate = std::log(rows[i - 1].error / rows[i].error) / std::log(ratio);
  }
}

}  // namespace detail

/// L2 velocity error against the exact solution at t_end on n x n meshes.
inline std::vector<ConvergenceRow> spatial_convergence(FormulationKind kind, double nu, const StepperConfig& stepper,
                                                       const std::vector<int>& mesh_ns) {
  const TaylorGreen tg{nu};
  std::vector<ConvergenceRow> rows;
  for (int n : mesh_ns) {
    const MixedSpace space = build_space(generate_rect_mesh(0.0, 0.0, 1.0, 1.0, n, n));
    const State u = detail::taylor_green_final(space, tg, kind, stepper);
    const double err = l2_error(space, u, VectorField([&](const Vec2& x) { return tg.velocity(x, u.t); }));
    rows.push_back({1.0 / n, stepper.dt, err});
  }
  detail::fill_rates(rows, true);
  return rows;
}

/// Time-discretization error on one mesh: the L2 distance at t_end to a run
/// with step `dt_reference`, which isolates the temporal error from the
/// (much larger) spatial error.
inline std::vector<ConvergenceRow> temporal_convergence(FormulationKind kind, double nu, StepperConfig stepper,
                                                        int mesh_n, const std::vector<double>& dts,
                                                        double dt_reference) {
  const TaylorGreen tg{nu};
  const MixedSpace space = build_space(generate_rect_mesh(0.0, 0.0, 1.0, 1.0, mesh_n, mesh_n));
  StepperConfig ref_cfg = stepper;
  ref_cfg.dt = dt_reference;
  const State ref = detail::taylor_green_final(space, tg, kind, ref_cfg);
  std::vector<ConvergenceRow> rows;
  for (double dt : dts) {
    stepper.dt = dt;
    State u = detail::taylor_green_final(space, tg, kind, stepper);
    State diff = u;
    diff.coeffs -= ref.coeffs;
    rows.push_back({1.0 / mesh_n, dt, l2_error(space, diff, VectorField([](const Vec2&) { return Vec2{}; }))});
  }
  detail::fill_rates(rows, false);
  return rows;
}

// ---------------------------------------------------------------------------
// Sweeps over formulations

struct SweepRow {
  FormulationKind kind;
  std::optional<BenchmarkResult> result;
  std::string error;
};

/// Runs `spec` once per formulation, up to `jobs` at a time. A failing run
/// is recorded in its row and the sweep continues.
inline std::vector<SweepRow> sweep(const BenchmarkSpec& spec, const std::vector<FormulationKind>& kinds,
                                   int jobs = 1) {
  if (kinds.empty()) throw ParameterError("sweep: empty formulation list");
  std::vector<SweepRow> rows(kinds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < kinds.size(); i = next++) {
      rows[i].kind = kinds[i];
      BenchmarkSpec s = spec;
      s.kind = kinds[i];
      try {
        rows[i].result = run_benchmark(s);
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(kinds.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

}  // namespace emacfem
