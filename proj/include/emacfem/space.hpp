#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "emacfem/elements.hpp"
#include "emacfem/linear_solver.hpp"
#include "emacfem/mesh.hpp"

namespace emacfem {

/// Taylor-Hood P2/P1 space on a triangulation.
///
/// Scalar P2 nodes are numbered vertices first, then edge midpoints.
/// Unknowns are laid out as [u_x (P2) | u_y (P2) | p (P1)], so
/// N_u = 2 (#vertices + #edges) and N_p = #vertices.
class MixedSpace {
 public:
  explicit MixedSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
    nv_ = mesh_->num_vertices();
    n_scalar_ = nv_ + mesh_->num_edges();
    for (auto tag : kAllBoundaryTags) boundary_nodes_[static_cast<int>(tag)].clear();
    for (Index b = 0; b < static_cast<Index>(mesh_->boundary_edges().size()); ++b) {
      const auto& be = mesh_->boundary_edges()[b];
      auto& nodes = boundary_nodes_[static_cast<int>(be.tag)];
      nodes.push_back(be.vertices[0]);
      nodes.push_back(be.vertices[1]);
      nodes.push_back(nv_ + mesh_->boundary_edge_index(b));
    }
    for (auto& nodes : boundary_nodes_) {
      std::sort(nodes.begin(), nodes.end());
      nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

  Index num_scalar_nodes() const { return n_scalar_; }
  Index num_velocity_dofs() const { return 2 * n_scalar_; }
  Index num_pressure_dofs() const { return nv_; }
  Index size() const { return num_velocity_dofs() + num_pressure_dofs(); }

  Index velocity_dof(int component, Index node) const { return component * n_scalar_ + node; }
  Index pressure_dof(Index vertex) const { return 2 * n_scalar_ + vertex; }

  /// Scalar P2 node numbers of a cell in reference-node order.
  std::array<Index, 6> cell_nodes(Index c) const {
    const auto& t = mesh_->cell(c);
    const auto& e = mesh_->cell_edges(c);
    return {t[0], t[1], t[2], nv_ + e[0], nv_ + e[1], nv_ + e[2]};
  }

  Vec2 node_coordinate(Index node) const {
    if (node < nv_) return mesh_->vertex(node);
    const auto& e = mesh_->edges()[node - nv_];
    return 0.5 * (mesh_->vertex(e[0]) + mesh_->vertex(e[1]));
  }

  /// Sorted scalar P2 nodes lying on edges with the given tag.
  const std::vector<Index>& boundary_nodes(BoundaryTag tag) const { return boundary_nodes_[static_cast<int>(tag)]; }

  AffineMap cell_map(Index c) const {
    const auto& t = mesh_->cell(c);
    return AffineMap(mesh_->vertex(t[0]), mesh_->vertex(t[1]), mesh_->vertex(t[2]));
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  Index nv_ = 0;
  Index n_scalar_ = 0;
  std::array<std::vector<Index>, kAllBoundaryTags.size()> boundary_nodes_;
};

inline MixedSpace build_space(Mesh mesh) { return MixedSpace(std::make_shared<const Mesh>(std::move(mesh))); }

/// Coefficients of all unknowns at one time level.
struct State {
  Vector coeffs;
  double t = 0.0;

  static State zero(const MixedSpace& space, double t = 0.0) { return {Vector::Zero(space.size()), t}; }
};

/// Reference tabulation shared by all cells for one quadrature rule.
struct QuadratureContext {
  QuadratureRule rule;
  Tabulation p1;
  Tabulation p2;

  explicit QuadratureContext(int degree)
      : rule(quadrature_rule(degree)), p1(ElementKind::P1, rule.points), p2(ElementKind::P2, rule.points) {}
};

/// Physical basis data on one cell: quadrature points, weights times
/// Jacobian, and P2/P1 values and gradients.
class CellValues {
 public:
  explicit CellValues(const QuadratureContext& ctx) : ctx_(&ctx) {
    const std::size_t nq = ctx.rule.size();
    x_.resize(nq);
    jxw_.resize(nq);
    grad2_.resize(nq);
    grad1_.resize(nq);
  }

  void reinit(const MixedSpace& space, Index c) {
    cell_ = c;
    nodes_ = space.cell_nodes(c);
    const AffineMap map = space.cell_map(c);
    for (std::size_t q = 0; q < ctx_->rule.size(); ++q) {
      x_[q] = map.map(ctx_->rule.points[q]);
      jxw_[q] = ctx_->rule.weights[q] * map.det;
      for (int i = 0; i < 6; ++i) grad2_[q][i] = map.physical_gradient(ctx_->p2.at[q].gradients[i]);
      for (int i = 0; i < 3; ++i) grad1_[q][i] = map.physical_gradient(ctx_->p1.at[q].gradients[i]);
    }
  }

  std::size_t size() const { return jxw_.size(); }
  Index cell() const { return cell_; }
  const std::array<Index, 6>& nodes() const { return nodes_; }

  const Vec2& point(std::size_t q) const { return x_[q]; }
  double jxw(std::size_t q) const { return jxw_[q]; }
  double phi2(std::size_t q, int i) const { return ctx_->p2.at[q].values[i]; }
  const Vec2& grad2(std::size_t q, int i) const { return grad2_[q][i]; }
  double phi1(std::size_t q, int i) const { return ctx_->p1.at[q].values[i]; }
  const Vec2& grad1(std::size_t q, int i) const { return grad1_[q][i]; }

  /// Velocity value and gradient of the coefficient vector `u` (velocity
  /// block in the MixedSpace layout).
  std::pair<Vec2, Mat2> velocity(const MixedSpace& space, const Vector& u, std::size_t q) const {
    Vec2 val;
    Mat2 grad;
    for (int i = 0; i < 6; ++i) {
      const double ux = u[space.velocity_dof(0, nodes_[i])];
      const double uy = u[space.velocity_dof(1, nodes_[i])];
      const double phi = phi2(q, i);
      const Vec2& g = grad2_[q][i];
      val.x += ux * phi;
      val.y += uy * phi;
      grad(0, 0) += ux * g.x;
      grad(0, 1) += ux * g.y;
      grad(1, 0) += uy * g.x;
      grad(1, 1) += uy * g.y;
    }
    return {val, grad};
  }

  double pressure(const MixedSpace& space, const Vector& x, std::size_t q) const {
    const auto& t = space.mesh().cell(cell_);
    double p = 0.0;
    for (int i = 0; i < 3; ++i) p += x[space.pressure_dof(t[i])] * phi1(q, i);
    return p;
  }

  /// Value and gradient of a scalar P2 field given by node coefficients.
  std::pair<double, Vec2> scalar(std::span<const double> w, std::size_t q) const {
    double val = 0.0;
    Vec2 grad;
    for (int i = 0; i < 6; ++i) {
      val += w[nodes_[i]] * phi2(q, i);
      grad += w[nodes_[i]] * grad2_[q][i];
    }
    return {val, grad};
  }

 private:
  const QuadratureContext* ctx_;
  Index cell_ = -1;
  std::array<Index, 6> nodes_{};
  std::vector<Vec2> x_;
  std::vector<double> jxw_;
  std::vector<std::array<Vec2, 6>> grad2_;
  std::vector<std::array<Vec2, 3>> grad1_;
};

/// Basis data of the owning cell along one boundary edge.
class EdgeValues {
 public:
  explicit EdgeValues(int degree) : rule_(edge_quadrature(degree)) {}

  void reinit(const MixedSpace& space, Index boundary_edge) {
    const Mesh& mesh = space.mesh();
    auto [c, k] = mesh.boundary_edge_cell(boundary_edge);
    cell_ = c;
    nodes_ = space.cell_nodes(c);
    normal_ = mesh.outward_normal(boundary_edge);
    const auto ref = reference_nodes(ElementKind::P1);
    const Vec2 a = ref[k], b = ref[(k + 1) % 3];
    const AffineMap map = space.cell_map(c);
    auto [p, q] = mesh.oriented_boundary_edge(boundary_edge);
    const double len = norm(q - p);
    const std::size_t nq = rule_.size();
    x_.resize(nq);
    jxw_.resize(nq);
    p2_.resize(nq);
    p1_.resize(nq);
    for (std::size_t i = 0; i < nq; ++i) {
      const Vec2 xi = a + rule_.points[i] * (b - a);
      x_[i] = map.map(xi);
      jxw_[i] = rule_.weights[i] * len;
      p2_[i] = eval_basis(ElementKind::P2, xi);
      p1_[i] = eval_basis(ElementKind::P1, xi);
      for (int n = 0; n < 6; ++n) p2_[i].gradients[n] = map.physical_gradient(p2_[i].gradients[n]);
      for (int n = 0; n < 3; ++n) p1_[i].gradients[n] = map.physical_gradient(p1_[i].gradients[n]);
    }
  }

  std::size_t size() const { return jxw_.size(); }
  Index cell() const { return cell_; }
  const std::array<Index, 6>& nodes() const { return nodes_; }
  const Vec2& normal() const { return normal_; }
  const Vec2& point(std::size_t q) const { return x_[q]; }
  double jxw(std::size_t q) const { return jxw_[q]; }
  double phi2(std::size_t q, int i) const { return p2_[q].values[i]; }
  const Vec2& grad2(std::size_t q, int i) const { return p2_[q].gradients[i]; }

  std::pair<Vec2, Mat2> velocity(const MixedSpace& space, const Vector& u, std::size_t q) const {
    Vec2 val;
    Mat2 grad;
    for (int i = 0; i < 6; ++i) {
      const double ux = u[space.velocity_dof(0, nodes_[i])];
      const double uy = u[space.velocity_dof(1, nodes_[i])];
      val.x += ux * p2_[q].values[i];
      val.y += uy * p2_[q].values[i];
      grad += component_gradient(0, ux * p2_[q].gradients[i]);
      grad += component_gradient(1, uy * p2_[q].gradients[i]);
    }
    return {val, grad};
  }

  double pressure(const MixedSpace& space, const Vector& x, std::size_t q) const {
    const auto& t = space.mesh().cell(cell_);
    double p = 0.0;
    for (int i = 0; i < 3; ++i) p += x[space.pressure_dof(t[i])] * p1_[q].values[i];
    return p;
  }

 private:
  EdgeQuadratureRule rule_;
  Index cell_ = -1;
  std::array<Index, 6> nodes_{};
  Vec2 normal_;
  std::vector<Vec2> x_;
  std::vector<double> jxw_;
  std::vector<BasisValues> p2_;
  std::vector<BasisValues> p1_;
};

using VectorField = std::function<Vec2(const Vec2&)>;
using ScalarField = std::function<double(const Vec2&)>;

/// Nodal interpolation of a velocity field into the velocity block of `state`.
inline void interpolate_velocity(const MixedSpace& space, const VectorField& f, State& state) {
  for (Index n = 0; n < space.num_scalar_nodes(); ++n) {
    Vec2 v = f(space.node_coordinate(n));
    state.coeffs[space.velocity_dof(0, n)] = v.x;
    state.coeffs[space.velocity_dof(1, n)] = v.y;
  }
}

inline void interpolate_pressure(const MixedSpace& space, const ScalarField& f, State& state) {
  for (Index v = 0; v < space.num_pressure_dofs(); ++v) state.coeffs[space.pressure_dof(v)] = f(space.mesh().vertex(v));
}

/// State whose velocity is the nodal interpolant of `f`; pressure zero.
inline State interpolate(const MixedSpace& space, const VectorField& f, double t = 0.0) {
  State s = State::zero(space, t);
  interpolate_velocity(space, f, s);
  return s;
}

/// State whose pressure is the nodal interpolant of `f`; velocity zero.
inline State interpolate(const MixedSpace& space, const ScalarField& f, double t = 0.0) {
  State s = State::zero(space, t);
  interpolate_pressure(space, f, s);
  return s;
}

/// Default quadrature degree for errors against smooth analytic fields.
inline constexpr int kErrorQuadratureDegree = 8;

inline double l2_error(const MixedSpace& space, const State& state, const VectorField& exact,
                       int degree = kErrorQuadratureDegree) {
  QuadratureContext ctx(degree);
  CellValues cv(ctx);
  double sum = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    for (std::size_t q = 0; q < cv.size(); ++q) {
      Vec2 d = cv.velocity(space, state.coeffs, q).first - exact(cv.point(q));
      sum += dot(d, d) * cv.jxw(q);
    }
  }
  return std::sqrt(sum);
}

inline double l2_error(const MixedSpace& space, const State& state, const ScalarField& exact,
                       int degree = kErrorQuadratureDegree) {
  QuadratureContext ctx(degree);
  CellValues cv(ctx);
  double sum = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    for (std::size_t q = 0; q < cv.size(); ++q) {
      double d = cv.pressure(space, state.coeffs, q) - exact(cv.point(q));
      sum += d * d * cv.jxw(q);
    }
  }
  return std::sqrt(sum);
}

/// Prescribed values for a set of unknowns (sorted by dof, unique).
struct DofConstraints {
  std::vector<Index> dofs;
  std::vector<double> values;

  bool empty() const { return dofs.empty(); }
  std::size_t size() const { return dofs.size(); }
};

/// (div u_h, q_j) for every pressure basis function q_j.
inline Vector discrete_divergence(const MixedSpace& space, const Vector& x, int degree = 4) {
  QuadratureContext ctx(degree);
  CellValues cv(ctx);
  Vector r = Vector::Zero(space.num_pressure_dofs());
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    const auto& t = space.mesh().cell(c);
    for (std::size_t q = 0; q < cv.size(); ++q) {
      double div = cv.velocity(space, x, q).second.trace();
      for (int i = 0; i < 3; ++i) r[t[i]] += div * cv.phi1(q, i) * cv.jxw(q);
    }
  }
  return r;
}

/// L2 projection of `u0` onto the discretely divergence-free subspace:
/// minimizes ||u_h - u0|| subject to (div u_h, q) = 0 for all q, with the
/// velocity unknowns in `constraints` held at their prescribed values.
///
/// When every boundary velocity is constrained the multiplier is only
/// determined up to a constant; one multiplier unknown is then pinned, which
/// is consistent because the constrained normal flux integrates to zero.
inline State divfree_project(const MixedSpace& space, const VectorField& u0, const DofConstraints& constraints = {},
                             double t = 0.0, int degree = kErrorQuadratureDegree) {
  const Index n = space.size();
  const Index nu = space.num_velocity_dofs();
  QuadratureContext ctx(degree);
  CellValues cv(ctx);
  std::vector<Eigen::Triplet<double, int>> trip;
  Vector rhs = Vector::Zero(n);
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    const auto& nodes = cv.nodes();
    const auto& tri = space.mesh().cell(c);
    std::array<std::array<double, 6>, 6> mass{};
    std::array<std::array<std::array<double, 3>, 6>, 2> div{};  // div[comp][i][k] = (d_comp phi_i, psi_k)
    std::array<std::array<double, 6>, 2> load{};
    for (std::size_t q = 0; q < cv.size(); ++q) {
      const double w = cv.jxw(q);
      const Vec2 f = u0(cv.point(q));
      for (int i = 0; i < 6; ++i) {
        load[0][i] += f.x * cv.phi2(q, i) * w;
        load[1][i] += f.y * cv.phi2(q, i) * w;
        for (int j = 0; j < 6; ++j) mass[i][j] += cv.phi2(q, i) * cv.phi2(q, j) * w;
        for (int k = 0; k < 3; ++k) {
          div[0][i][k] += cv.grad2(q, i).x * cv.phi1(q, k) * w;
          div[1][i][k] += cv.grad2(q, i).y * cv.phi1(q, k) * w;
        }
      }
    }
    for (int comp = 0; comp < 2; ++comp) {
      for (int i = 0; i < 6; ++i) {
        const int row = static_cast<int>(space.velocity_dof(comp, nodes[i]));
        rhs[row] += load[comp][i];
        for (int j = 0; j < 6; ++j) {
          trip.emplace_back(row, static_cast<int>(space.velocity_dof(comp, nodes[j])), mass[i][j]);
        }
        for (int k = 0; k < 3; ++k) {
          const int prow = static_cast<int>(space.pressure_dof(tri[k]));
          trip.emplace_back(row, prow, div[comp][i][k]);
          trip.emplace_back(prow, row, div[comp][i][k]);
        }
      }
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());

  std::vector<char> fixed(n, 0);
  Vector values = Vector::Zero(n);
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    fixed[constraints.dofs[k]] = 1;
    values[constraints.dofs[k]] = constraints.values[k];
  }
  // Pin the first multiplier when the whole boundary is constrained.
  bool enclosed = true;
  const auto& mesh = space.mesh();
  for (Index b = 0; b < static_cast<Index>(mesh.boundary_edges().size()) && enclosed; ++b) {
    Vec2 nrm = mesh.outward_normal(b);
    for (Index v : mesh.boundary_edges()[b].vertices) {
      // The normal component is constrained if every component with a
      // nonzero normal weight is fixed.
      for (int comp = 0; comp < 2; ++comp) {
        if (std::abs(nrm[comp]) > 1e-12 && !fixed[space.velocity_dof(comp, v)]) enclosed = false;
      }
    }
  }
  if (enclosed) fixed[space.pressure_dof(0)] = 1;

  rhs -= a * values;
  for (int r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      if (fixed[it.row()] || fixed[it.col()]) it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (fixed[i]) rhs[i] = values[i];
  }
  a.prune(0.0);
  for (Index i = 0; i < n; ++i) {
    if (fixed[i] && a.coeff(i, i) == 0.0) a.coeffRef(i, i) = 1.0;
  }

  Vector sol = solve_linear({a, rhs});
  State s = State::zero(space, t);
  s.coeffs.head(nu) = sol.head(nu);
  return s;
}

}  // namespace emacfem
