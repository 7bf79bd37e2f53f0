#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "emacfem/common.hpp"
#include "emacfem/detail/quadrature_tables.hpp"

namespace emacfem {

/// Quadrature on the reference triangle {xi, eta >= 0, xi + eta <= 1}.
/// Weights sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct EdgeQuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

inline constexpr int kMaxQuadratureDegree = 10;

/// Volume quadrature exact for polynomials of total degree <= `degree`.
///
/// Degrees 1 and 2 use the centroid and the 3-point interior rule; higher
/// degrees use conical-product tables with ceil((degree+1)/2)^2 points.
inline QuadratureRule quadrature_rule(int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree) {
    throw ParameterError("quadrature_rule: unsupported degree " + std::to_string(degree) + " (expected 1..10)");
  }
  QuadratureRule rule;
  if (degree == 1) {
    rule.points = {{1.0 / 3.0, 1.0 / 3.0}};
    rule.weights = {0.5};
    rule.degree = 1;
    return rule;
  }
  if (degree == 2) {
    rule.points = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    rule.degree = 2;
    return rule;
  }
  auto fill = [&rule](const auto& table, int exact) {
    for (const auto& node : table) {
      rule.points.push_back({node.xi, node.eta});
      rule.weights.push_back(node.weight);
    }
    rule.degree = exact;
  };
  switch ((degree + 2) / 2) {
    case 2: fill(detail::kConical2, 3); break;
    case 3: fill(detail::kConical3, 5); break;
    case 4: fill(detail::kConical4, 7); break;
    case 5: fill(detail::kConical5, 9); break;
    default: fill(detail::kConical6, 11); break;
  }
  return rule;
}

inline EdgeQuadratureRule edge_quadrature(int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree) {
    throw ParameterError("edge_quadrature: unsupported degree " + std::to_string(degree) + " (expected 1..10)");
  }
  EdgeQuadratureRule rule;
  auto fill = [&rule](const auto& table) {
    for (const auto& node : table) {
      rule.points.push_back(node.s);
      rule.weights.push_back(node.weight);
    }
    rule.degree = 2 * static_cast<int>(table.size()) - 1;
  };
  switch ((degree + 2) / 2) {
    case 1: fill(detail::kGauss1); break;
    case 2: fill(detail::kGauss2); break;
    case 3: fill(detail::kGauss3); break;
    case 4: fill(detail::kGauss4); break;
    case 5: fill(detail::kGauss5); break;
    default: fill(detail::kGauss6); break;
  }
  return rule;
}

enum class ElementKind { P1, P2 };

constexpr int num_nodes(ElementKind kind) { return kind == ElementKind::P1 ? 3 : 6; }

/// Reference coordinates of the element nodes: vertices (0,0), (1,0), (0,1),
/// then for P2 the midpoints of edges 0-1, 1-2, 2-0.
inline std::span<const Vec2> reference_nodes(ElementKind kind) {
  static constexpr std::array<Vec2, 6> nodes{
      Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{0.5, 0.0}, Vec2{0.5, 0.5}, Vec2{0.0, 0.5}};
  return {nodes.data(), static_cast<std::size_t>(num_nodes(kind))};
}

struct BasisValues {
  std::array<double, 6> values{};
  std::array<Vec2, 6> gradients{};
};

/// Lagrange basis values and reference gradients at `xi`. Points outside the
/// reference triangle are evaluated by polynomial extension.
inline BasisValues eval_basis(ElementKind kind, const Vec2& xi) {
  BasisValues b;
  const double l0 = 1.0 - xi.x - xi.y, l1 = xi.x, l2 = xi.y;
  const Vec2 g0{-1.0, -1.0}, g1{1.0, 0.0}, g2{0.0, 1.0};
  if (kind == ElementKind::P1) {
    b.values = {l0, l1, l2, 0.0, 0.0, 0.0};
    b.gradients = {g0, g1, g2, Vec2{}, Vec2{}, Vec2{}};
    return b;
  }
  b.values = {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
              4.0 * l0 * l1,         4.0 * l1 * l2,         4.0 * l2 * l0};
  b.gradients = {(4.0 * l0 - 1.0) * g0,        (4.0 * l1 - 1.0) * g1,        (4.0 * l2 - 1.0) * g2,
                 4.0 * (l1 * g0 + l0 * g1), 4.0 * (l2 * g1 + l1 * g2), 4.0 * (l0 * g2 + l2 * g0)};
  return b;
}

/// Basis tables of one element kind at every point of a rule.
struct Tabulation {
  ElementKind kind;
  std::vector<BasisValues> at;

  Tabulation(ElementKind k, std::span<const Vec2> points) : kind(k) {
    at.reserve(points.size());
    for (const auto& p : points) at.push_back(eval_basis(k, p));
  }
};

/// Affine map from the reference triangle onto a physical cell.
struct AffineMap {
  Vec2 origin;
  Mat2 jacobian;      // columns are the two edge vectors from vertex 0
  Mat2 inv_transpose;
  double det;

  AffineMap(const Vec2& p0, const Vec2& p1, const Vec2& p2) : origin(p0) {
    Vec2 e1 = p1 - p0, e2 = p2 - p0;
    jacobian(0, 0) = e1.x;
    jacobian(1, 0) = e1.y;
    jacobian(0, 1) = e2.x;
    jacobian(1, 1) = e2.y;
    det = cross(e1, e2);
    inv_transpose(0, 0) = e2.y / det;
    inv_transpose(0, 1) = -e1.y / det;
    inv_transpose(1, 0) = -e2.x / det;
    inv_transpose(1, 1) = e1.x / det;
  }

  Vec2 map(const Vec2& xi) const { return origin + jacobian * xi; }
  Vec2 physical_gradient(const Vec2& ref_grad) const { return inv_transpose * ref_grad; }

  /// Reference coordinates of a physical point.
  Vec2 inverse(const Vec2& x) const {
    Vec2 d = x - origin;
    // inverse(J) = inv_transpose^T
    return {inv_transpose(0, 0) * d.x + inv_transpose(1, 0) * d.y,
            inv_transpose(0, 1) * d.x + inv_transpose(1, 1) * d.y};
  }
};

}  // namespace emacfem
