#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "emacfem/forms.hpp"

namespace emacfem {

class LocationError : public Error {
 public:
  using Error::Error;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;
  Vec2 momentum;
  double angular_momentum = 0.0;
  double div_norm = 0.0;
  std::optional<double> drag;
  std::optional<double> lift;
  std::optional<double> pressure_drop;
  std::optional<double> enstrophy;
  std::optional<double> total_vorticity;
  int newton_iters = 0;

  bool finite() const {
    auto ok = [](const std::optional<double>& v) { return !v || std::isfinite(*v); };
    return std::isfinite(energy) && std::isfinite(momentum.x) && std::isfinite(momentum.y) &&
           std::isfinite(angular_momentum) && std::isfinite(div_norm) && ok(drag) && ok(lift) &&
           ok(pressure_drop) && ok(enstrophy) && ok(total_vorticity);
  }
};

using DiagnosticsSeries = std::vector<DiagnosticsRecord>;

/// E = 1/2 (u, u).
inline double kinetic_energy(const MixedSpace& space, const State& s, int degree = kDefaultQuadratureDegree) {
  return 0.5 * integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
           const Vec2 u = cv.velocity(space, s.coeffs, q).first;
           return dot(u, u);
         });
}

inline Vec2 linear_momentum(const MixedSpace& space, const State& s, int degree = kDefaultQuadratureDegree) {
  Vec2 m;
  for (int comp = 0; comp < 2; ++comp) {
    m[comp] = integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
      return cv.velocity(space, s.coeffs, q).first[comp];
    });
  }
  return m;
}

/// Integral of x u_y - y u_x.
inline double angular_momentum(const MixedSpace& space, const State& s, int degree = kDefaultQuadratureDegree) {
  return integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
    const Vec2 u = cv.velocity(space, s.coeffs, q).first;
    return cross(cv.point(q), u);
  });
}

inline double divergence_norm(const MixedSpace& space, const State& s, int degree = kDefaultQuadratureDegree) {
  return std::sqrt(integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
    const double d = cv.velocity(space, s.coeffs, q).second.trace();
    return d * d;
  }));
}

/// Sum over cells of ||grad u||^2, the viscous dissipation density.
inline double gradient_norm_sq(const MixedSpace& space, const Vector& x, int degree = kDefaultQuadratureDegree) {
  return integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
    const Mat2 g = cv.velocity(space, x, q).second;
    return contract(g, g);
  });
}

struct ForceScaling {
  double rho = 1.0;
  double u_ref = 1.0;
  double l_ref = 0.1;
};

/// Drag and lift coefficients from the traction on edges tagged `tag`,
///
///   c_d =  2/(rho L U^2) int_S (rho nu du_t/dn n_y - p n_x) ds
///   c_l = -2/(rho L U^2) int_S (rho nu du_t/dn n_x + p n_y) ds
///
/// with n the unit normal pointing out of the obstacle (into the fluid) and
/// t = (n_y, -n_x).
inline std::pair<double, double> drag_lift(const MixedSpace& space, const State& s, double nu,
                                           BoundaryTag tag = BoundaryTag::obstacle, const ForceScaling& scaling = {},
                                           int degree = kDefaultQuadratureDegree) {
  const Mesh& mesh = space.mesh();
  if (!mesh.has_tag(tag)) throw ParameterError("drag_lift: mesh has no boundary edges tagged " + std::string(to_string(tag)));
  EdgeValues ev(degree);
  double fd = 0.0, fl = 0.0;
  for (Index b = 0; b < static_cast<Index>(mesh.boundary_edges().size()); ++b) {
    if (mesh.boundary_edges()[b].tag != tag) continue;
    ev.reinit(space, b);
    const Vec2 n = -ev.normal();
    const Vec2 t{n.y, -n.x};
    for (std::size_t q = 0; q < ev.size(); ++q) {
      const Mat2 g = ev.velocity(space, s.coeffs, q).second;
      const double p = ev.pressure(space, s.coeffs, q);
      const double dut_dn = dot(g * n, t);
      fd += (scaling.rho * nu * dut_dn * n.y - p * n.x) * ev.jxw(q);
      fl += (scaling.rho * nu * dut_dn * n.x + p * n.y) * ev.jxw(q);
    }
  }
  const double c = 2.0 / (scaling.rho * scaling.l_ref * scaling.u_ref * scaling.u_ref);
  return {c * fd, -c * fl};
}

/// Cell containing `x` and the reference coordinates of `x` in it.
inline std::pair<Index, Vec2> locate(const MixedSpace& space, const Vec2& x) {
  constexpr double tol = 1e-12;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const Vec2 xi = space.cell_map(c).inverse(x);
    if (xi.x >= -tol && xi.y >= -tol && xi.x + xi.y <= 1.0 + tol) return {c, xi};
  }
  throw LocationError("point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") is outside the mesh");
}

inline double pressure_at(const MixedSpace& space, const State& s, const Vec2& x) {
  auto [c, xi] = locate(space, x);
  const BasisValues b = eval_basis(ElementKind::P1, xi);
  const auto& t = space.mesh().cell(c);
  double p = 0.0;
  for (int i = 0; i < 3; ++i) p += s.coeffs[space.pressure_dof(t[i])] * b.values[i];
  return p;
}

inline Vec2 velocity_at(const MixedSpace& space, const State& s, const Vec2& x) {
  auto [c, xi] = locate(space, x);
  const BasisValues b = eval_basis(ElementKind::P2, xi);
  const auto nodes = space.cell_nodes(c);
  Vec2 u;
  for (int i = 0; i < 6; ++i) {
    u.x += s.coeffs[space.velocity_dof(0, nodes[i])] * b.values[i];
    u.y += s.coeffs[space.velocity_dof(1, nodes[i])] * b.values[i];
  }
  return u;
}

inline double pressure_drop(const MixedSpace& space, const State& s, const Vec2& front = {0.15, 0.2},
                            const Vec2& back = {0.25, 0.2}) {
  return pressure_at(space, s, front) - pressure_at(space, s, back);
}

/// Energy, momenta and divergence norm of one state.
inline DiagnosticsRecord basic_diagnostics(const MixedSpace& space, const State& s) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.energy = kinetic_energy(space, s);
  r.momentum = linear_momentum(space, s);
  r.angular_momentum = angular_momentum(space, s);
  r.div_norm = divergence_norm(space, s);
  return r;
}

}  // namespace emacfem
