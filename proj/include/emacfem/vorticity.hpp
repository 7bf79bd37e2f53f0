#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "emacfem/system.hpp"

namespace emacfem {

/// Scalar P2 vorticity on the velocity mesh. beta3 weights the
/// ((div u) w, v) term: 1/2 conserves enstrophy, 1 total vorticity.
///
/// The general vorticity family also carries beta1, beta2, beta4 and a
/// multiplier eta; in the 2D scalar reduction those terms vanish
/// identically, so they have no runtime parameter here.
struct VorticityState {
  Vector w;
  double t = 0.0;
  double beta3 = 0.5;
};

/// Boundary treatment of the companion equation: homogeneous Dirichlet, or
/// none (natural), which is admissible when u.n = 0 on the boundary.
enum class VorticityBoundary { zero, natural };

using TimeScalarField = std::function<double(const Vec2&, double)>;

namespace detail {

inline std::vector<Index> all_boundary_nodes(const MixedSpace& space) {
  std::vector<Index> nodes;
  for (auto tag : kAllBoundaryTags) {
    const auto& b = space.boundary_nodes(tag);
    nodes.insert(nodes.end(), b.begin(), b.end());
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

}  // namespace detail

/// L2 projection of curl u_h = d_x u_y - d_y u_x onto scalar P2. With
/// VorticityBoundary::zero the projection is onto P2 functions vanishing on
/// the boundary.
inline VorticityState curl_project(const MixedSpace& space, const State& u, double beta3 = 0.5,
                                   VorticityBoundary boundary = VorticityBoundary::natural,
                                   int degree = kDefaultQuadratureDegree) {
  const Index n = space.num_scalar_nodes();
  QuadratureContext ctx(degree);
  CellValues cv(ctx);
  std::vector<Eigen::Triplet<double, int>> trip;
  Vector rhs = Vector::Zero(n);
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    const auto& nodes = cv.nodes();
    for (std::size_t q = 0; q < cv.size(); ++q) {
      const double w = cv.jxw(q);
      const double curl = vorticity_of(cv.velocity(space, u.coeffs, q).second);
      for (int i = 0; i < 6; ++i) {
        rhs[nodes[i]] += curl * cv.phi2(q, i) * w;
        for (int j = 0; j < 6; ++j) {
          trip.emplace_back(static_cast<int>(nodes[i]), static_cast<int>(nodes[j]), cv.phi2(q, i) * cv.phi2(q, j) * w);
        }
      }
    }
  }
  SparseSystem sys{SparseMatrix(n, n), rhs};
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  if (boundary == VorticityBoundary::zero) {
    const auto bnodes = detail::all_boundary_nodes(space);
    apply_dirichlet(sys, DofConstraints{bnodes, std::vector<double>(bnodes.size(), 0.0)});
  }
  return {solve_linear(sys), u.t, beta3};
}

/// Crank-Nicolson integrator of the companion equation
///
///   (w_t, v) + ((u.grad) w, v) + nu (grad w, grad v) + beta3 ((div u) w, v) = (curl f, v)
///
/// driven by a stored velocity trajectory, with u^{n+1/2} = (u^n + u^{n+1})/2.
class VorticityStepper {
 public:
  VorticityStepper(const MixedSpace& space, double nu, VorticityBoundary boundary = VorticityBoundary::zero,
                   TimeScalarField curl_f = {}, int degree = kDefaultQuadratureDegree)
      : space_(&space), nu_(nu), boundary_(boundary), curl_f_(std::move(curl_f)), ctx_(degree) {
    if (boundary_ == VorticityBoundary::zero) boundary_nodes_ = detail::all_boundary_nodes(space);
  }

  /// Advances `w` from u_n.t to u_np1.t.
  VorticityState advance(const VorticityState& w, const State& u_n, const State& u_np1) {
    const MixedSpace& space = *space_;
    const double scale = std::max(1.0, std::abs(w.t));
    if (std::abs(u_n.t - w.t) > 1e-12 * scale) throw ParameterError("advance_vorticity: velocity and vorticity times differ");
    const double dt = u_np1.t - u_n.t;
    if (!(dt > 0.0)) throw ParameterError("advance_vorticity: velocity states are not increasing in time");
    const Index n = space.num_scalar_nodes();
    if (w.w.size() != n) throw ParameterError("advance_vorticity: vorticity size does not match the space");
    const Vector u_half = 0.5 * (u_n.coeffs + u_np1.coeffs);
    const double t_half = u_n.t + 0.5 * dt;

    CellValues cv(ctx_);
    std::vector<Eigen::Triplet<double, int>> lhs, op;
    Vector load = Vector::Zero(n);
    for (Index c = 0; c < space.mesh().num_cells(); ++c) {
      cv.reinit(space, c);
      const auto& nodes = cv.nodes();
      double mat_l[6][6] = {}, mat_o[6][6] = {};
      for (std::size_t q = 0; q < cv.size(); ++q) {
        const double jw = cv.jxw(q);
        const auto [uq, gq] = cv.velocity(space, u_half, q);
        const double div = gq.trace();
        const double f = curl_f_ ? curl_f_(cv.point(q), t_half) : 0.0;
        for (int i = 0; i < 6; ++i) {
          const double phi_i = cv.phi2(q, i);
          load[nodes[i]] += f * phi_i * jw;
          for (int j = 0; j < 6; ++j) {
            const double phi_j = cv.phi2(q, j);
            const double mass = phi_i * phi_j * jw;
            const double a = (dot(uq, cv.grad2(q, j)) * phi_i + nu_ * dot(cv.grad2(q, i), cv.grad2(q, j)) +
                              w.beta3 * div * phi_j * phi_i) *
                             jw;
            mat_l[i][j] += mass / dt + 0.5 * a;
            mat_o[i][j] += mass / dt - 0.5 * a;
          }
        }
      }
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          lhs.emplace_back(static_cast<int>(nodes[i]), static_cast<int>(nodes[j]), mat_l[i][j]);
          op.emplace_back(static_cast<int>(nodes[i]), static_cast<int>(nodes[j]), mat_o[i][j]);
        }
      }
    }
    SparseMatrix rhs_op(n, n);
    rhs_op.setFromTriplets(op.begin(), op.end());
    SparseSystem sys{SparseMatrix(n, n), rhs_op * w.w + load};
    sys.matrix.setFromTriplets(lhs.begin(), lhs.end());
    if (!boundary_nodes_.empty()) {
      apply_dirichlet(sys, DofConstraints{boundary_nodes_, std::vector<double>(boundary_nodes_.size(), 0.0)});
    }
    solver_.factorize(sys.matrix);
    return {solver_.solve(sys.rhs), u_np1.t, w.beta3};
  }

 private:
  const MixedSpace* space_;
  double nu_;
  VorticityBoundary boundary_;
  TimeScalarField curl_f_;
  QuadratureContext ctx_;
  std::vector<Index> boundary_nodes_;
  DirectSolver solver_;
};

/// One companion step with a fresh solver.
inline VorticityState advance_vorticity(const MixedSpace& space, const VorticityState& w, const State& u_n,
                                        const State& u_np1, double nu, TimeScalarField curl_f = {},
                                        VorticityBoundary boundary = VorticityBoundary::zero) {
  VorticityStepper stepper(space, nu, boundary, std::move(curl_f));
  return stepper.advance(w, u_n, u_np1);
}

/// 1/2 (w, w).
inline double enstrophy(const MixedSpace& space, const VorticityState& w, int degree = kDefaultQuadratureDegree) {
  return 0.5 * integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
           const double v = cv.scalar({w.w.data(), static_cast<std::size_t>(w.w.size())}, q).first;
           return v * v;
         });
}

/// (w, 1).
inline double total_vorticity(const MixedSpace& space, const VorticityState& w,
                              int degree = kDefaultQuadratureDegree) {
  return integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
    return cv.scalar({w.w.data(), static_cast<std::size_t>(w.w.size())}, q).first;
  });
}

}  // namespace emacfem
