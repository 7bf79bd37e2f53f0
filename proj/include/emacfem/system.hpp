#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "emacfem/diagnostics.hpp"
#include "emacfem/forms.hpp"
#include "emacfem/linear_solver.hpp"

namespace emacfem {

enum class TimeScheme { cn, bdf2, bdf3 };

inline std::string_view to_string(TimeScheme s) {
  switch (s) {
    case TimeScheme::cn: return "cn";
    case TimeScheme::bdf2: return "bdf2";
    case TimeScheme::bdf3: return "bdf3";
  }
  return "?";
}

inline std::optional<TimeScheme> parse_time_scheme(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (auto scheme : {TimeScheme::cn, TimeScheme::bdf2, TimeScheme::bdf3}) {
    if (to_string(scheme) == lower) return scheme;
  }
  return std::nullopt;
}

struct StepperConfig {
  TimeScheme scheme = TimeScheme::cn;
  double dt = 0.01;
  double t_end = 1.0;
  double newton_tol = 1e-8;
  int newton_max = 20;

  void validate() const {
    if (!(dt > 0.0)) throw ParameterError("time step must be > 0");
    if (!(newton_tol > 0.0)) throw ParameterError("Newton tolerance must be > 0");
    if (newton_max < 1) throw ParameterError("Newton iteration cap must be >= 1");
    if (!(t_end >= 0.0)) throw ParameterError("end time must be >= 0");
  }

  /// Number of steps to reach t_end; t_end must be a multiple of dt.
  Index num_steps() const {
    const double n = std::round(t_end / dt);
    if (std::abs(n * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
      throw ParameterError("end time is not a whole number of time steps");
    }
    return static_cast<Index>(n);
  }
};

using TimeVectorField = std::function<Vec2(const Vec2&, double)>;

enum class BcKind { velocity, no_penetration, natural };

struct BoundaryCondition {
  BcKind kind = BcKind::natural;
  TimeVectorField value;
};

/// Boundary condition per tag. Tags without an entry are natural
/// (zero traction).
class BoundaryConditions {
 public:
  BoundaryConditions& set_velocity(BoundaryTag tag, TimeVectorField g) {
    conds_[static_cast<int>(tag)] = BoundaryCondition{BcKind::velocity, std::move(g)};
    return *this;
  }
  BoundaryConditions& set_no_slip(BoundaryTag tag) {
    return set_velocity(tag, [](const Vec2&, double) { return Vec2{}; });
  }
  BoundaryConditions& set_no_penetration(BoundaryTag tag) {
    conds_[static_cast<int>(tag)] = BoundaryCondition{BcKind::no_penetration, {}};
    return *this;
  }
  BoundaryConditions& set_natural(BoundaryTag tag) {
    conds_[static_cast<int>(tag)] = BoundaryCondition{};
    return *this;
  }

  const BoundaryCondition& operator[](BoundaryTag tag) const { return conds_[static_cast<int>(tag)]; }

 private:
  std::array<BoundaryCondition, kAllBoundaryTags.size()> conds_{};
};

/// Velocity unknowns fixed by the boundary conditions at time t.
///
/// No-penetration pins the normal component on axis-aligned edges only.
/// Velocity data override no-penetration, and where tags meet the later tag
/// in the order free, outflow, inflow, wall, obstacle wins, so walls keep
/// the corners they share with an inflow boundary.
inline DofConstraints velocity_constraints(const MixedSpace& space, const BoundaryConditions& bcs, double t) {
  const Mesh& mesh = space.mesh();
  std::map<Index, double> fixed;
  for (Index b = 0; b < static_cast<Index>(mesh.boundary_edges().size()); ++b) {
    const auto& be = mesh.boundary_edges()[b];
    if (bcs[be.tag].kind != BcKind::no_penetration) continue;
    const Vec2 n = mesh.outward_normal(b);
    int comp;
    if (std::abs(n.y) < 1e-12) {
      comp = 0;
    } else if (std::abs(n.x) < 1e-12) {
      comp = 1;
    } else {
      throw ParameterError("no-penetration on boundary edge " + std::to_string(b) +
                           " is unsupported: edge is not axis-aligned");
    }
    const Index mid = mesh.num_vertices() + mesh.boundary_edge_index(b);
    for (Index node : {be.vertices[0], be.vertices[1], mid}) fixed[space.velocity_dof(comp, node)] = 0.0;
  }
  for (auto tag : {BoundaryTag::free, BoundaryTag::outflow, BoundaryTag::inflow, BoundaryTag::wall,
                   BoundaryTag::obstacle}) {
    const auto& bc = bcs[tag];
    if (bc.kind != BcKind::velocity) continue;
    for (Index node : space.boundary_nodes(tag)) {
      const Vec2 g = bc.value(space.node_coordinate(node), t);
      fixed[space.velocity_dof(0, node)] = g.x;
      fixed[space.velocity_dof(1, node)] = g.y;
    }
  }
  DofConstraints c;
  c.dofs.reserve(fixed.size());
  c.values.reserve(fixed.size());
  for (const auto& [dof, value] : fixed) {
    c.dofs.push_back(dof);
    c.values.push_back(value);
  }
  return c;
}

/// True when every boundary tag in the mesh carries an essential condition,
/// so the pressure is determined only up to a constant.
inline bool is_enclosed(const MixedSpace& space, const BoundaryConditions& bcs) {
  for (const auto& be : space.mesh().boundary_edges()) {
    if (bcs[be.tag].kind == BcKind::natural) return false;
  }
  return true;
}

/// Replaces constrained rows by identity rows with the prescribed values and
/// eliminates the constrained columns into the right-hand side. The
/// sparsity pattern is left unchanged.
inline void apply_dirichlet(SparseSystem& system, const DofConstraints& constraints) {
  const Index n = system.size();
  std::vector<char> fixed(n, 0);
  Vector g = Vector::Zero(n);
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const Index d = constraints.dofs[k];
    if (d < 0 || d >= n) throw ParameterError("apply_dirichlet: constrained index out of range");
    fixed[d] = 1;
    g[d] = constraints.values[k];
  }
  SparseMatrix& a = system.matrix;
  for (Index r = 0; r < n; ++r) {
    bool has_diag = false;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      const Index col = it.col();
      if (fixed[r]) {
        it.valueRef() = col == r ? 1.0 : 0.0;
        has_diag |= col == r;
      } else if (fixed[col]) {
        system.rhs[r] -= it.value() * g[col];
        it.valueRef() = 0.0;
      }
    }
    if (fixed[r] && !has_diag) a.coeffRef(r, r) = 1.0;
  }
  for (Index r = 0; r < n; ++r) {
    if (fixed[r]) system.rhs[r] = g[r];
  }
}

enum class PressureNullspace { pin, zero_mean };

/// Pins the first pressure unknown to zero when the flow is enclosed.
/// Returns false (and leaves the system untouched) when it is not.
inline bool fix_pressure_nullspace(SparseSystem& system, const MixedSpace& space, bool enclosed) {
  if (!enclosed) return false;
  apply_dirichlet(system, DofConstraints{{space.pressure_dof(0)}, {0.0}});
  return true;
}

/// (p, 1) / |Omega|.
inline double pressure_mean(const MixedSpace& space, const Vector& x) {
  const double integral = integrate_cells(space, 2, [&](const CellValues& cv, std::size_t q) {
    return cv.pressure(space, x, q);
  });
  return integral / space.mesh().total_area();
}

inline void remove_pressure_mean(const MixedSpace& space, Vector& x) {
  const double mean = pressure_mean(space, x);
  x.tail(space.num_pressure_dofs()).array() -= mean;
}

/// Time-discrete context of one nonlinear solve for u^{n+1}:
///
///   (alpha u^{n+1} + history, v)/dt + NL(u_theta) + nu (grad u_theta, grad v)
///     + gamma (div u_theta, div v) - (p, div v) - (f(t_force), v) = 0
///   (q, div u^{n+1}) = 0
///
/// with u_theta = theta u^{n+1} + (1 - theta) u_old. dt = 0 drops the time
/// derivative (steady problem).
struct StepContext {
  double dt = 0.0;
  double alpha = 0.0;
  Vector history;
  double theta = 1.0;
  Vector u_old;
  double t_force = 0.0;
  double t_new = 0.0;
  TimeVectorField forcing;

  static StepContext steady(const MixedSpace& space, double t = 0.0) {
    StepContext c;
    c.history = Vector::Zero(space.num_velocity_dofs());
    c.u_old = c.history;
    c.t_force = c.t_new = t;
    return c;
  }

  static StepContext crank_nicolson(const MixedSpace& space, const State& un, double dt) {
    StepContext c;
    const Index nu = space.num_velocity_dofs();
    c.dt = dt;
    c.alpha = 1.0;
    c.history = -un.coeffs.head(nu);
    c.theta = 0.5;
    c.u_old = un.coeffs.head(nu);
    c.t_force = un.t + 0.5 * dt;
    c.t_new = un.t + dt;
    return c;
  }

  /// BDF of the given order; `history[0]` is u^n, `history[1]` u^{n-1}, ...
  static StepContext bdf(const MixedSpace& space, int order, const std::vector<const State*>& history, double dt) {
    static constexpr double coef[4][4] = {
        {0, 0, 0, 0}, {1.0, -1.0, 0, 0}, {1.5, -2.0, 0.5, 0}, {11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0}};
    if (order < 1 || order > 3 || static_cast<int>(history.size()) < order) {
      throw ParameterError("bdf: history length does not match the scheme order");
    }
    StepContext c;
    const Index nu = space.num_velocity_dofs();
    c.dt = dt;
    c.alpha = coef[order][0];
    c.history = Vector::Zero(nu);
    for (int j = 1; j <= order; ++j) c.history += coef[order][j] * history[j - 1]->coeffs.head(nu);
    c.theta = 1.0;
    c.u_old = Vector::Zero(nu);
    c.t_force = c.t_new = history[0]->t + dt;
    return c;
  }
};

/// Global residual and Jacobian assembly on a fixed sparsity pattern.
///
/// Every cell couples its 12 velocity and 3 pressure unknowns; the pattern
/// holds the full 15 x 15 local block, so values can be written through
/// precomputed positions and the symbolic factorization is reused.
class Assembler {
 public:
  Assembler(const MixedSpace& space, FormulationKind kind, const FormConfig& config)
      : space_(&space), kind_(kind), config_(config), ctx_(config.quadrature_degree) {
    config_.validate();
    build_pattern();
  }

  const MixedSpace& space() const { return *space_; }
  FormulationKind kind() const { return kind_; }
  const FormConfig& config() const { return config_; }

  /// Residual F(x) and, if `jac` is non-null, dF/dx written into `*jac`
  /// (which takes this assembler's pattern).
  void assemble(const Vector& x, const StepContext& step, Vector& residual, SparseMatrix* jac) const {
    const MixedSpace& space = *space_;
    const Index n = space.size();
    const Index nu = space.num_velocity_dofs();
    if (x.size() != n) throw ParameterError("assemble: state size does not match the space");
    residual = Vector::Zero(n);
    double* values = nullptr;
    if (jac) {
      *jac = pattern_;
      values = jac->valuePtr();
      std::fill(values, values + jac->nonZeros(), 0.0);
    }
    const double theta = step.theta;
    const Vector u_theta = theta < 1.0 ? Vector(theta * x.head(nu) + (1.0 - theta) * step.u_old) : Vector(x.head(nu));
    const double mass_scale = step.dt > 0.0 ? step.alpha / step.dt : 0.0;
    const double inv_dt = step.dt > 0.0 ? 1.0 / step.dt : 0.0;

    CellValues cv(ctx_);
    for (Index c = 0; c < space.mesh().num_cells(); ++c) {
      cv.reinit(space, c);
      std::array<double, 15> res{};
      std::array<std::array<double, 15>, 15> mat{};
      ElementVector nl_res{};
      ElementMatrix nl_jac{};
      add_nonlinear_cell(kind_, space, cv, u_theta, 1.0, nl_res, jac ? &nl_jac : nullptr);
      for (int a = 0; a < 12; ++a) {
        res[a] += nl_res[a];
        if (jac) {
          for (int b = 0; b < 12; ++b) mat[a][b] += theta * nl_jac[a][b];
        }
      }
      for (std::size_t q = 0; q < cv.size(); ++q) {
        const double w = cv.jxw(q);
        const auto [un, gn] = cv.velocity(space, x, q);
        const auto [ut, gt] = cv.velocity(space, u_theta, q);
        const double p = cv.pressure(space, x, q);
        Vec2 rate;
        if (step.dt > 0.0) rate = inv_dt * (step.alpha * un + cv.velocity(space, step.history, q).first);
        Vec2 f;
        if (step.forcing) f = step.forcing(cv.point(q), step.t_force);
        const double div_t = gt.trace();
        for (int i = 0; i < 6; ++i) {
          const double phi = cv.phi2(q, i);
          const Vec2& gphi = cv.grad2(q, i);
          for (int comp = 0; comp < 2; ++comp) {
            const Vec2 grow{gt(comp, 0), gt(comp, 1)};
            res[local_velocity(comp, i)] +=
                w * ((rate[comp] - f[comp]) * phi + config_.nu * dot(grow, gphi) +
                     (config_.gamma * div_t - p) * gphi[comp]);
          }
        }
        const double div_n = gn.trace();
        for (int k = 0; k < 3; ++k) res[12 + k] += w * cv.phi1(q, k) * div_n;
        if (!jac) continue;
        for (int i = 0; i < 6; ++i) {
          const double phi_i = cv.phi2(q, i);
          const Vec2& gi = cv.grad2(q, i);
          for (int j = 0; j < 6; ++j) {
            const double phi_j = cv.phi2(q, j);
            const Vec2& gj = cv.grad2(q, j);
            const double diag = w * (mass_scale * phi_i * phi_j + theta * config_.nu * dot(gi, gj));
            mat[local_velocity(0, i)][local_velocity(0, j)] += diag;
            mat[local_velocity(1, i)][local_velocity(1, j)] += diag;
            if (config_.gamma != 0.0) {
              for (int ci = 0; ci < 2; ++ci) {
                for (int cj = 0; cj < 2; ++cj) {
                  mat[local_velocity(ci, i)][local_velocity(cj, j)] += w * theta * config_.gamma * gi[ci] * gj[cj];
                }
              }
            }
          }
          for (int k = 0; k < 3; ++k) {
            const double psi = cv.phi1(q, k) * w;
            for (int comp = 0; comp < 2; ++comp) {
              mat[local_velocity(comp, i)][12 + k] -= psi * gi[comp];
              mat[12 + k][local_velocity(comp, i)] += psi * gi[comp];
            }
          }
        }
      }
      scatter(c, res, jac ? &mat : nullptr, residual, values);
    }

    if (config_.outflow_correction && outflow_correction_sign(kind_) != 0.0) {
      EdgeValues ev(config_.quadrature_degree);
      const auto& bnd = space.mesh().boundary_edges();
      for (Index b = 0; b < static_cast<Index>(bnd.size()); ++b) {
        if (bnd[b].tag != BoundaryTag::outflow) continue;
        ev.reinit(space, b);
        ElementVector eres{};
        ElementMatrix ejac{};
        add_outflow_edge(kind_, space, ev, u_theta, 1.0, eres, jac ? &ejac : nullptr);
        std::array<double, 15> res{};
        std::array<std::array<double, 15>, 15> mat{};
        for (int a = 0; a < 12; ++a) {
          res[a] = eres[a];
          if (jac) {
            for (int bb = 0; bb < 12; ++bb) mat[a][bb] = theta * ejac[a][bb];
          }
        }
        scatter(ev.cell(), res, jac ? &mat : nullptr, residual, values);
      }
    }
  }

  const SparseMatrix& pattern() const { return pattern_; }

 private:
  std::array<Index, 15> local_dofs(Index c) const {
    const auto nodes = space_->cell_nodes(c);
    const auto& t = space_->mesh().cell(c);
    std::array<Index, 15> g{};
    for (int i = 0; i < 6; ++i) {
      g[local_velocity(0, i)] = space_->velocity_dof(0, nodes[i]);
      g[local_velocity(1, i)] = space_->velocity_dof(1, nodes[i]);
    }
    for (int k = 0; k < 3; ++k) g[12 + k] = space_->pressure_dof(t[k]);
    return g;
  }

  void build_pattern() {
    const Index n = space_->size();
    const Index nc = space_->mesh().num_cells();
    std::vector<std::vector<int>> cols(n);
    for (Index c = 0; c < nc; ++c) {
      const auto g = local_dofs(c);
      for (int a = 0; a < 15; ++a) {
        for (int b = 0; b < 15; ++b) cols[g[a]].push_back(static_cast<int>(g[b]));
      }
    }
    std::vector<Eigen::Triplet<double, int>> trip;
    for (Index r = 0; r < n; ++r) {
      auto& v = cols[r];
      v.push_back(static_cast<int>(r));
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      for (int col : v) trip.emplace_back(static_cast<int>(r), col, 0.0);
    }
    pattern_.resize(n, n);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();
    const int* outer = pattern_.outerIndexPtr();
    const int* inner = pattern_.innerIndexPtr();
    positions_.resize(static_cast<std::size_t>(nc) * 225);
    for (Index c = 0; c < nc; ++c) {
      const auto g = local_dofs(c);
      for (int a = 0; a < 15; ++a) {
        for (int b = 0; b < 15; ++b) {
          const int* lo = inner + outer[g[a]];
          const int* hi = inner + outer[g[a] + 1];
          positions_[c * 225 + a * 15 + b] = static_cast<int>(std::lower_bound(lo, hi, g[b]) - inner);
        }
      }
    }
  }

  void scatter(Index c, const std::array<double, 15>& res, const std::array<std::array<double, 15>, 15>* mat,
               Vector& residual, double* values) const {
    const auto g = local_dofs(c);
    for (int a = 0; a < 15; ++a) residual[g[a]] += res[a];
    if (!mat) return;
    const int* pos = positions_.data() + c * 225;
    for (int a = 0; a < 15; ++a) {
      for (int b = 0; b < 15; ++b) values[pos[a * 15 + b]] += (*mat)[a][b];
    }
  }

  const MixedSpace* space_;
  FormulationKind kind_;
  FormConfig config_;
  QuadratureContext ctx_;
  SparseMatrix pattern_;
  std::vector<int> positions_;
};

/// Newton failure: iteration cap exceeded, non-finite residual, or a
/// singular Jacobian. Carries the residual history and the time level.
class DivergenceError : public SolverError {
 public:
  DivergenceError(const std::string& what, double t, std::vector<double> residuals)
      : SolverError(what), t_(t), residuals_(std::move(residuals)) {}
  double time() const { return t_; }
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  double t_;
  std::vector<double> residuals_;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residuals;
};

struct NewtonOptions {
  double tol = 1e-8;
  int max_iters = 20;
  PressureNullspace nullspace = PressureNullspace::pin;
};

/// Nonlinear solver for one time level, owning the factorization so the
/// symbolic analysis is shared by all steps.
class NewtonSolver {
 public:
  NewtonSolver(const MixedSpace& space, FormulationKind kind, const FormConfig& config, BoundaryConditions bcs)
      : assembler_(space, kind, config), bcs_(std::move(bcs)), enclosed_(is_enclosed(space, bcs_)) {}

  const Assembler& assembler() const { return assembler_; }
  const BoundaryConditions& boundary_conditions() const { return bcs_; }
  bool enclosed() const { return enclosed_; }

  /// Solves F(x) = 0 starting from `x`. Constrained velocity unknowns are set
  /// to their data at step.t_new first; the residual norm is taken over the
  /// unconstrained rows.
  NewtonReport solve(Vector& x, const StepContext& step, const NewtonOptions& opt) {
    const MixedSpace& space = assembler_.space();
    const DofConstraints bc = velocity_constraints(space, bcs_, step.t_new);
    DofConstraints zero = bc;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    std::vector<char> mask(space.size(), 0);
    for (std::size_t k = 0; k < bc.size(); ++k) {
      x[bc.dofs[k]] = bc.values[k];
      mask[bc.dofs[k]] = 1;
    }
    if (enclosed_) mask[space.pressure_dof(0)] = 1;

    NewtonReport report;
    SparseSystem sys;
    Vector r;
    for (int it = 0;; ++it) {
      assembler_.assemble(x, step, r, &sys.matrix);
      for (Index i = 0; i < r.size(); ++i) {
        if (mask[i]) r[i] = 0.0;
      }
      const double norm = r.norm();
      report.residuals.push_back(norm);
      if (!std::isfinite(norm)) fail("non-finite Newton residual", step, report);
      if (norm <= opt.tol) {
        report.iterations = it;
        break;
      }
      if (it == opt.max_iters) fail("Newton did not converge", step, report);
      sys.rhs = -r;
      apply_dirichlet(sys, zero);
      fix_pressure_nullspace(sys, space, enclosed_);
      Vector dx;
      try {
        solver_.factorize(sys.matrix);
        dx = solver_.solve(sys.rhs);
      } catch (const SolverError& e) {
        fail(std::string("linear solve failed: ") + e.what(), step, report);
      }
      x += dx;
    }
    if (enclosed_ && opt.nullspace == PressureNullspace::zero_mean) remove_pressure_mean(space, x);
    return report;
  }

 private:
  [[noreturn]] static void fail(const std::string& why, const StepContext& step, const NewtonReport& report) {
    std::ostringstream msg;
    msg << why << " at t = " << step.t_new << " after " << report.residuals.size() - 1 << " iterations";
    if (!report.residuals.empty()) msg << " (last residual " << report.residuals.back() << ")";
    throw DivergenceError(msg.str(), step.t_new, report.residuals);
  }

  Assembler assembler_;
  BoundaryConditions bcs_;
  bool enclosed_;
  DirectSolver solver_;
};

/// Everything that defines the continuous problem apart from the initial
/// state and the time discretization.
struct FlowProblem {
  FormulationKind kind = FormulationKind::emac;
  FormConfig form;
  BoundaryConditions bcs;
  TimeVectorField forcing;
  PressureNullspace nullspace = PressureNullspace::pin;
};

/// Time integrator. BDF2 and BDF3 take their first one or two steps with
/// Crank-Nicolson at the same dt.
///
/// For Crank-Nicolson the pressure block of each new state is p^{n+1/2}.
class TimeStepper {
 public:
  TimeStepper(const MixedSpace& space, FlowProblem problem, StepperConfig config, State initial)
      : space_(&space),
        problem_(std::move(problem)),
        config_(config),
        newton_(space, problem_.kind, problem_.form, problem_.bcs) {
    config_.validate();
    if (initial.coeffs.size() != space.size()) throw ParameterError("initial state size does not match the space");
    history_.push_front(std::move(initial));
  }

  /// Resumes from stored states, newest first.
  TimeStepper(const MixedSpace& space, FlowProblem problem, StepperConfig config, const std::vector<State>& history)
      : TimeStepper(space, std::move(problem), config, history.at(0)) {
    for (std::size_t j = 1; j < history.size() && static_cast<int>(j) < order(); ++j) {
      if (history[j].coeffs.size() != space.size()) throw ParameterError("history state size does not match the space");
      history_.push_back(history[j]);
    }
  }

  const State& current() const { return history_.front(); }
  /// State before the last step (the current one if no step was taken).
  const State& previous() const { return history_.size() > 1 ? history_[1] : history_[0]; }
  Index steps_taken() const { return steps_; }
  const NewtonReport& last_report() const { return report_; }
  const StepperConfig& config() const { return config_; }
  const FlowProblem& problem() const { return problem_; }
  const NewtonSolver& newton() const { return newton_; }

  int order() const {
    switch (config_.scheme) {
      case TimeScheme::cn: return 2;
      case TimeScheme::bdf2: return 2;
      case TimeScheme::bdf3: return 3;
    }
    return 2;
  }

  /// Scheme used for the next step.
  bool next_step_is_cn() const {
    return config_.scheme == TimeScheme::cn || static_cast<int>(history_.size()) < order();
  }

  const State& step() {
    const MixedSpace& space = *space_;
    const Index nu = space.num_velocity_dofs();
    const double dt = config_.dt;
    const State& un = history_.front();
    StepContext ctx;
    Vector x = un.coeffs;
    if (next_step_is_cn()) {
      ctx = StepContext::crank_nicolson(space, un, dt);
    } else {
      std::vector<const State*> hist;
      for (int j = 0; j < order(); ++j) hist.push_back(&history_[j]);
      ctx = StepContext::bdf(space, order(), hist, dt);
      if (order() == 2) {
        x.head(nu) = 2.0 * hist[0]->coeffs.head(nu) - hist[1]->coeffs.head(nu);
      } else {
        x.head(nu) = 3.0 * hist[0]->coeffs.head(nu) - 3.0 * hist[1]->coeffs.head(nu) + hist[2]->coeffs.head(nu);
      }
    }
    ctx.forcing = problem_.forcing;
    report_ = newton_.solve(x, ctx, {config_.newton_tol, config_.newton_max, problem_.nullspace});
    history_.push_front(State{std::move(x), ctx.t_new});
    while (static_cast<int>(history_.size()) > std::max(order(), 2)) history_.pop_back();
    ++steps_;
    return history_.front();
  }

 private:
  const MixedSpace* space_;
  FlowProblem problem_;
  StepperConfig config_;
  NewtonSolver newton_;
  std::deque<State> history_;
  NewtonReport report_;
  Index steps_ = 0;
};

/// One step from `history` (newest first). Builds a fresh solver; use
/// TimeStepper for trajectories.
inline State advance(const MixedSpace& space, const std::vector<State>& history, const StepperConfig& config,
                     const FlowProblem& problem) {
  if (history.empty()) throw ParameterError("advance: empty history");
  StepperConfig one = config;
  one.validate();
  const int needed = config.scheme == TimeScheme::bdf3 ? 3 : config.scheme == TimeScheme::bdf2 ? 2 : 1;
  if (static_cast<int>(history.size()) < needed) one.scheme = TimeScheme::cn;
  for (std::size_t j = 1; j < history.size(); ++j) {
    if (std::abs(history[j - 1].t - history[j].t - config.dt) > 1e-9 * std::max(1.0, config.dt)) {
      throw ParameterError("advance: history states are not spaced by dt");
    }
  }
  TimeStepper stepper(space, problem, one, history);
  return stepper.step();
}

struct BlowUp {
  double t = 0.0;
  std::string reason;
  std::vector<double> residuals;
};

struct RunResult {
  DiagnosticsSeries series;
  State final_state;
  std::optional<BlowUp> blowup;
};

/// Called after each accepted step (and once for the initial state with
/// `prev` null) to fill optional record fields.
using StepObserver = std::function<void(const State* prev, const State& cur, DiagnosticsRecord& rec)>;

/// Runs to config.t_end, recording diagnostics at every time level. Newton
/// divergence and non-finite diagnostics end the run with a blow-up report.
inline RunResult run(const MixedSpace& space, const FlowProblem& problem, const StepperConfig& config, State initial,
                     const StepObserver& observer = {}) {
  RunResult out;
  const Index steps = config.num_steps();
  TimeStepper stepper(space, problem, config, std::move(initial));
  auto record = [&](const State* prev, const State& cur, int iters) {
    DiagnosticsRecord rec = basic_diagnostics(space, cur);
    rec.newton_iters = iters;
    if (observer) observer(prev, cur, rec);
    out.series.push_back(rec);
    return rec.finite();
  };
  record(nullptr, stepper.current(), 0);
  for (Index k = 0; k < steps; ++k) {
    try {
      stepper.step();
    } catch (const DivergenceError& e) {
      out.blowup = BlowUp{e.time(), e.what(), e.residuals()};
      break;
    }
    if (!record(&stepper.previous(), stepper.current(), stepper.last_report().iterations)) {
      out.blowup = BlowUp{stepper.current().t, "non-finite diagnostics", stepper.last_report().residuals};
      break;
    }
  }
  out.final_state = stepper.current();
  return out;
}

}  // namespace emacfem
