#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "emacfem/space.hpp"

namespace emacfem {

enum class FormulationKind { conv, skew, rot, cons, emac };

inline constexpr std::array<FormulationKind, 5> kAllFormulations{
    FormulationKind::conv, FormulationKind::skew, FormulationKind::rot, FormulationKind::cons, FormulationKind::emac};

inline std::string_view to_string(FormulationKind kind) {
  switch (kind) {
    case FormulationKind::conv: return "conv";
    case FormulationKind::skew: return "skew";
    case FormulationKind::rot: return "rot";
    case FormulationKind::cons: return "cons";
    case FormulationKind::emac: return "emac";
  }
  return "?";
}

inline std::optional<FormulationKind> parse_formulation(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (auto kind : kAllFormulations) {
    if (to_string(kind) == lower) return kind;
  }
  return std::nullopt;
}

/// Volume quadrature degree for all momentum forms. Trilinear integrands
/// with P2 velocity are degree 5 on affine cells, so 6 integrates them
/// exactly.
inline constexpr int kDefaultQuadratureDegree = 6;

struct FormConfig {
  double nu = 0.0;
  /// Grad-div stabilization parameter; 0 disables the term.
  double gamma = 0.0;
  /// Kinematic-pressure traction correction on outflow edges (EMAC, ROT).
  bool outflow_correction = true;
  int quadrature_degree = kDefaultQuadratureDegree;

  void validate() const {
    if (!(nu >= 0.0)) throw ParameterError("viscosity must be >= 0");
    if (!(gamma >= 0.0)) throw ParameterError("grad-div parameter must be >= 0");
    if (quadrature_degree < 5 || quadrature_degree > kMaxQuadratureDegree) {
      throw ParameterError("quadrature degree must be in 5..10");
    }
  }
};

/// Scalar 2D vorticity d_x u_y - d_y u_x of a velocity gradient.
constexpr double vorticity_of(const Mat2& grad) { return grad(1, 0) - grad(0, 1); }

/// Every nonlinear form is a bilinear expression B(a, G) evaluated at
/// (a, G) = (u, grad u):
///
///   conv  G a
///   skew  G a + 1/2 tr(G) a
///   rot   w(G) (-a_y, a_x)                      (curl u) x u in 2D
///   cons  G a + tr(G) a
///   emac  (G + G^T) a + tr(G) a                 2 D(u) u + (div u) u
///
/// so NL(u) = B(u, grad u) and its derivative in direction du is
/// B(du, grad u) + B(u, grad du).
constexpr Vec2 nonlinear_term(FormulationKind kind, const Vec2& a, const Mat2& g) {
  switch (kind) {
    case FormulationKind::conv: return g * a;
    case FormulationKind::skew: return g * a + (0.5 * g.trace()) * a;
    case FormulationKind::rot: {
      const double w = vorticity_of(g);
      return {-w * a.y, w * a.x};
    }
    case FormulationKind::cons: return g * a + g.trace() * a;
    case FormulationKind::emac: return (g + g.transpose()) * a + g.trace() * a;
  }
  return {};
}

using NonlinearKernel = Vec2 (*)(FormulationKind, const Vec2&, const Mat2&);

/// Sign of the outflow boundary integral of 1/2|u|^2 (v.n) that restores the
/// zero kinematic-pressure traction condition. EMAC carries the modified
/// pressure p - 1/2|u|^2 and ROT the Bernoulli pressure p + 1/2|u|^2;
/// integrating their gradient parts by parts leaves these boundary terms.
constexpr double outflow_correction_sign(FormulationKind kind) {
  switch (kind) {
    case FormulationKind::emac: return -1.0;
    case FormulationKind::rot: return 1.0;
    default: return 0.0;
  }
}

using ElementVector = std::array<double, 12>;
using ElementMatrix = std::array<std::array<double, 12>, 12>;

/// Local velocity unknown `comp * 6 + node` of a cell.
constexpr int local_velocity(int comp, int node) { return comp * 6 + node; }

/// Adds (NL(u), phi) and, when `jac` is given, its derivative with respect
/// to the cell's velocity coefficients, scaled by `scale`.
inline void add_nonlinear_cell(FormulationKind kind, const MixedSpace& space, const CellValues& cv, const Vector& u,
                               double scale, ElementVector& res, ElementMatrix* jac,
                               NonlinearKernel kernel = nonlinear_term) {
  for (std::size_t q = 0; q < cv.size(); ++q) {
    const auto [uq, gq] = cv.velocity(space, u, q);
    const double w = cv.jxw(q) * scale;
    const Vec2 nl = kernel(kind, uq, gq);
    for (int i = 0; i < 6; ++i) {
      const double phi = cv.phi2(q, i) * w;
      res[local_velocity(0, i)] += nl.x * phi;
      res[local_velocity(1, i)] += nl.y * phi;
    }
    if (!jac) continue;
    for (int d = 0; d < 2; ++d) {
      for (int j = 0; j < 6; ++j) {
        const Vec2 du = component_vector(d, cv.phi2(q, j));
        const Mat2 dg = component_gradient(d, cv.grad2(q, j));
        const Vec2 dnl = kernel(kind, du, gq) + kernel(kind, uq, dg);
        const int col = local_velocity(d, j);
        for (int i = 0; i < 6; ++i) {
          const double phi = cv.phi2(q, i) * w;
          (*jac)[local_velocity(0, i)][col] += dnl.x * phi;
          (*jac)[local_velocity(1, i)][col] += dnl.y * phi;
        }
      }
    }
  }
}

/// Adds the outflow correction sign * int 1/2|u|^2 (phi . n) ds over one
/// boundary edge and its derivative sign * int (u . du)(phi . n) ds.
inline void add_outflow_edge(FormulationKind kind, const MixedSpace& space, const EdgeValues& ev, const Vector& u,
                             double scale, ElementVector& res, ElementMatrix* jac) {
  const double sign = outflow_correction_sign(kind);
  if (sign == 0.0) return;
  const Vec2 n = ev.normal();
  for (std::size_t q = 0; q < ev.size(); ++q) {
    const Vec2 uq = ev.velocity(space, u, q).first;
    const double w = ev.jxw(q) * scale * sign;
    const double half_sq = 0.5 * dot(uq, uq);
    for (int i = 0; i < 6; ++i) {
      const double phi = ev.phi2(q, i) * w;
      res[local_velocity(0, i)] += half_sq * phi * n.x;
      res[local_velocity(1, i)] += half_sq * phi * n.y;
    }
    if (!jac) continue;
    for (int d = 0; d < 2; ++d) {
      for (int j = 0; j < 6; ++j) {
        const double udu = uq[d] * ev.phi2(q, j);
        for (int i = 0; i < 6; ++i) {
          const double phi = ev.phi2(q, i) * w;
          (*jac)[local_velocity(0, i)][local_velocity(d, j)] += udu * phi * n.x;
          (*jac)[local_velocity(1, i)][local_velocity(d, j)] += udu * phi * n.y;
        }
      }
    }
  }
}

/// Global vector of (NL(u), phi_k) over every velocity basis function,
/// including the outflow correction when enabled.
inline Vector nl_residual(FormulationKind kind, const MixedSpace& space, const Vector& u,
                          const FormConfig& config = {}, NonlinearKernel kernel = nonlinear_term) {
  QuadratureContext ctx(config.quadrature_degree);
  CellValues cv(ctx);
  Vector r = Vector::Zero(space.num_velocity_dofs());
  auto scatter = [&](const std::array<Index, 6>& nodes, const ElementVector& local) {
    for (int comp = 0; comp < 2; ++comp) {
      for (int i = 0; i < 6; ++i) r[space.velocity_dof(comp, nodes[i])] += local[local_velocity(comp, i)];
    }
  };
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    ElementVector local{};
    add_nonlinear_cell(kind, space, cv, u, 1.0, local, nullptr, kernel);
    scatter(cv.nodes(), local);
  }
  if (config.outflow_correction && outflow_correction_sign(kind) != 0.0) {
    EdgeValues ev(config.quadrature_degree);
    const auto& bnd = space.mesh().boundary_edges();
    for (Index b = 0; b < static_cast<Index>(bnd.size()); ++b) {
      if (bnd[b].tag != BoundaryTag::outflow) continue;
      ev.reinit(space, b);
      ElementVector local{};
      add_outflow_edge(kind, space, ev, u, 1.0, local, nullptr);
      scatter(ev.nodes(), local);
    }
  }
  return r;
}

/// Boundary part of nl_residual alone: the outflow correction vector.
inline Vector outflow_correction(FormulationKind kind, const MixedSpace& space, const Vector& u,
                                 int degree = kDefaultQuadratureDegree) {
  Vector r = Vector::Zero(space.num_velocity_dofs());
  if (outflow_correction_sign(kind) == 0.0) return r;
  EdgeValues ev(degree);
  const auto& bnd = space.mesh().boundary_edges();
  for (Index b = 0; b < static_cast<Index>(bnd.size()); ++b) {
    if (bnd[b].tag != BoundaryTag::outflow) continue;
    ev.reinit(space, b);
    ElementVector local{};
    add_outflow_edge(kind, space, ev, u, 1.0, local, nullptr);
    for (int comp = 0; comp < 2; ++comp) {
      for (int i = 0; i < 6; ++i) r[space.velocity_dof(comp, ev.nodes()[i])] += local[local_velocity(comp, i)];
    }
  }
  return r;
}

/// Sparse derivative of nl_residual with respect to the velocity block.
inline SparseMatrix nl_jacobian(FormulationKind kind, const MixedSpace& space, const Vector& u,
                                const FormConfig& config = {}) {
  QuadratureContext ctx(config.quadrature_degree);
  CellValues cv(ctx);
  std::vector<Eigen::Triplet<double, int>> trip;
  auto scatter = [&](const std::array<Index, 6>& nodes, const ElementMatrix& local) {
    for (int a = 0; a < 12; ++a) {
      for (int b = 0; b < 12; ++b) {
        trip.emplace_back(static_cast<int>(space.velocity_dof(a / 6, nodes[a % 6])),
                          static_cast<int>(space.velocity_dof(b / 6, nodes[b % 6])), local[a][b]);
      }
    }
  };
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    ElementVector res{};
    ElementMatrix jac{};
    add_nonlinear_cell(kind, space, cv, u, 1.0, res, &jac);
    scatter(cv.nodes(), jac);
  }
  if (config.outflow_correction && outflow_correction_sign(kind) != 0.0) {
    EdgeValues ev(config.quadrature_degree);
    const auto& bnd = space.mesh().boundary_edges();
    for (Index b = 0; b < static_cast<Index>(bnd.size()); ++b) {
      if (bnd[b].tag != BoundaryTag::outflow) continue;
      ev.reinit(space, b);
      ElementVector res{};
      ElementMatrix jac{};
      add_outflow_edge(kind, space, ev, u, 1.0, res, &jac);
      scatter(ev.nodes(), jac);
    }
  }
  const Index n = space.num_velocity_dofs();
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Volume integral of (NL(u), v) for an analytic test field v (e.g. e_i or
/// the rotation field (-y, x)).
inline double nl_functional(FormulationKind kind, const MixedSpace& space, const Vector& u, const VectorField& v,
                            int degree = kDefaultQuadratureDegree, NonlinearKernel kernel = nonlinear_term) {
  QuadratureContext ctx(degree);
  CellValues cv(ctx);
  double sum = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    for (std::size_t q = 0; q < cv.size(); ++q) {
      const auto [uq, gq] = cv.velocity(space, u, q);
      sum += dot(kernel(kind, uq, gq), v(cv.point(q))) * cv.jxw(q);
    }
  }
  return sum;
}

/// Volume integral of (NL(u), v) for a discrete test field v.
inline double nl_functional(FormulationKind kind, const MixedSpace& space, const Vector& u, const Vector& v,
                            int degree = kDefaultQuadratureDegree, NonlinearKernel kernel = nonlinear_term) {
  QuadratureContext ctx(degree);
  CellValues cv(ctx);
  double sum = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    for (std::size_t q = 0; q < cv.size(); ++q) {
      const auto [uq, gq] = cv.velocity(space, u, q);
      sum += dot(kernel(kind, uq, gq), cv.velocity(space, v, q).first) * cv.jxw(q);
    }
  }
  return sum;
}

/// Generic quadrature over cells of an integrand built from the cell values.
template <class Integrand>
double integrate_cells(const MixedSpace& space, int degree, Integrand&& f) {
  QuadratureContext ctx(degree);
  CellValues cv(ctx);
  double sum = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(space, c);
    for (std::size_t q = 0; q < cv.size(); ++q) sum += f(cv, q) * cv.jxw(q);
  }
  return sum;
}

/// b(u, v, w) = ((u . grad) v, w) for discrete velocity fields.
inline double trilinear_b(const MixedSpace& space, const Vector& u, const Vector& v, const Vector& w,
                          int degree = kDefaultQuadratureDegree) {
  return integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
    const Vec2 uq = cv.velocity(space, u, q).first;
    const Mat2 gv = cv.velocity(space, v, q).second;
    return dot(gv * uq, cv.velocity(space, w, q).first);
  });
}

/// ((div u) v, w).
inline double divergence_product(const MixedSpace& space, const Vector& u, const Vector& v, const Vector& w,
                                 int degree = kDefaultQuadratureDegree) {
  return integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
    return cv.velocity(space, u, q).second.trace() *
           dot(cv.velocity(space, v, q).first, cv.velocity(space, w, q).first);
  });
}

/// nu (grad u, grad v).
inline double viscous_form(const MixedSpace& space, const Vector& u, const Vector& v, double nu,
                           int degree = kDefaultQuadratureDegree) {
  return nu * integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
           return contract(cv.velocity(space, u, q).second, cv.velocity(space, v, q).second);
         });
}

/// (p, div v) with p taken from the pressure block of `p`.
inline double pressure_form(const MixedSpace& space, const Vector& p, const Vector& v,
                            int degree = kDefaultQuadratureDegree) {
  return integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
    return cv.pressure(space, p, q) * cv.velocity(space, v, q).second.trace();
  });
}

/// gamma (div u, div v).
inline double grad_div_form(const MixedSpace& space, const Vector& u, const Vector& v, double gamma,
                            int degree = kDefaultQuadratureDegree) {
  if (gamma == 0.0) return 0.0;
  return gamma * integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
           return cv.velocity(space, u, q).second.trace() * cv.velocity(space, v, q).second.trace();
         });
}

enum class Identity { vecid1, vecid2, vecid3, vecid5, vecid6, vecid6c, vecid7 };

inline constexpr std::array<Identity, 7> kAllIdentities{Identity::vecid1,  Identity::vecid2, Identity::vecid3,
                                                        Identity::vecid5,  Identity::vecid6, Identity::vecid6c,
                                                        Identity::vecid7};

inline std::string_view to_string(Identity id) {
  switch (id) {
    case Identity::vecid1: return "vecid1";
    case Identity::vecid2: return "vecid2";
    case Identity::vecid3: return "vecid3";
    case Identity::vecid5: return "vecid5";
    case Identity::vecid6: return "vecid6";
    case Identity::vecid6c: return "vecid6c";
    case Identity::vecid7: return "vecid7";
  }
  return "?";
}

/// True for the integral identities that need u to vanish on the boundary.
constexpr bool requires_zero_trace(Identity id) { return id == Identity::vecid1 || id == Identity::vecid2; }

/// |LHS - RHS| of a vector-calculus identity for discrete fields u, v, w.
///
///   vecid1   b(u,v,w) = -b(u,w,v) - ((div u) v, w)          (u zero trace)
///   vecid2   b(u,w,w) = -1/2 ((div u) w, w)                  (u zero trace)
///   vecid3   b(u,v,w) = ((grad v)^T w, u)
///   vecid6c  (D(u) u, u) = b(u,u,u)
///
/// The pointwise identities are checked at every quadrature point and the
/// largest violation is returned:
///
///   vecid5   (u.grad) u = (curl u) x u + grad 1/2|u|^2
///   vecid6   (grad u) u = D(u) u + 1/2 (curl u) x u
///   vecid7   (u.grad) u = 2 D(u) u - grad 1/2|u|^2
///
/// `kernel` supplies (u.grad)u, 2D(u)u and (curl u) x u through the conv,
/// emac and rot forms (minus their divergence parts), so a corrupted kernel
/// shows up here.
inline double verify_identity(Identity id, const MixedSpace& space, const Vector& u, const Vector& v,
                              const Vector& w, int degree = kDefaultQuadratureDegree,
                              NonlinearKernel kernel = nonlinear_term) {
  auto pointwise = [&](auto&& residual) {
    QuadratureContext ctx(degree);
    CellValues cv(ctx);
    double worst = 0.0;
    for (Index c = 0; c < space.mesh().num_cells(); ++c) {
      cv.reinit(space, c);
      for (std::size_t q = 0; q < cv.size(); ++q) {
        const auto [uq, gq] = cv.velocity(space, u, q);
        const Vec2 r = residual(uq, gq);
        worst = std::max({worst, std::abs(r.x), std::abs(r.y)});
      }
    }
    return worst;
  };
  // Parts of the kernel forms with the divergence terms removed.
  auto convective = [&](const Vec2& a, const Mat2& g) { return kernel(FormulationKind::conv, a, g); };
  auto two_d_u = [&](const Vec2& a, const Mat2& g) { return kernel(FormulationKind::emac, a, g) - g.trace() * a; };
  auto curl_cross = [&](const Vec2& a, const Mat2& g) { return kernel(FormulationKind::rot, a, g); };
  auto grad_half_sq = [](const Vec2& a, const Mat2& g) { return g.transpose() * a; };

  switch (id) {
    case Identity::vecid1:
      return std::abs(trilinear_b(space, u, v, w, degree) + trilinear_b(space, u, w, v, degree) +
                      divergence_product(space, u, v, w, degree));
    case Identity::vecid2:
      return std::abs(trilinear_b(space, u, w, w, degree) + 0.5 * divergence_product(space, u, w, w, degree));
    case Identity::vecid3: {
      const double rhs = integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
        const Mat2 gv = cv.velocity(space, v, q).second;
        return dot(gv.transpose() * cv.velocity(space, w, q).first, cv.velocity(space, u, q).first);
      });
      return std::abs(trilinear_b(space, u, v, w, degree) - rhs);
    }
    case Identity::vecid6c: {
      const double lhs = integrate_cells(space, degree, [&](const CellValues& cv, std::size_t q) {
        const auto [uq, gq] = cv.velocity(space, u, q);
        return 0.5 * dot(two_d_u(uq, gq), uq);
      });
      return std::abs(lhs - trilinear_b(space, u, u, u, degree));
    }
    case Identity::vecid5:
      return pointwise([&](const Vec2& a, const Mat2& g) {
        return convective(a, g) - curl_cross(a, g) - grad_half_sq(a, g);
      });
    case Identity::vecid6:
      return pointwise([&](const Vec2& a, const Mat2& g) {
        return g * a - 0.5 * two_d_u(a, g) - 0.5 * curl_cross(a, g);
      });
    case Identity::vecid7:
      return pointwise([&](const Vec2& a, const Mat2& g) {
        return convective(a, g) - two_d_u(a, g) + grad_half_sq(a, g);
      });
  }
  return 0.0;
}

}  // namespace emacfem
