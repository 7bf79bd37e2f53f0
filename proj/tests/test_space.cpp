#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "emacfem/bench.hpp"

using namespace emacfem;

namespace {

// Gresho energy by composite Simpson on the radial profile, independent of
// the closed form.
double gresho_energy_radial() {
  auto speed = [](double r) { return r <= 0.2 ? 5 * r : (r <= 0.4 ? 2 - 5 * r : 0.0); };
  double sum = 0.0;
  for (auto [a, b] : {std::pair{0.0, 0.2}, std::pair{0.2, 0.4}}) {
    const int n = 2000;
    const double h = (b - a) / n;
    for (int i = 0; i <= n; ++i) {
      const double r = a + i * h;
      const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      sum += w * 0.5 * speed(r) * speed(r) * 2 * std::numbers::pi * r * h / 3;
    }
  }
  return sum;
}

}  // namespace

TEST(Space, Counts) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 1, 1));
  EXPECT_EQ(s.num_velocity_dofs(), 18);
  EXPECT_EQ(s.num_pressure_dofs(), 4);
  EXPECT_EQ(s.size(), 22);
  const MixedSpace big = build_space(generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, 48, 48));
  EXPECT_EQ(big.num_pressure_dofs(), 2401);
}

TEST(Space, MidpointNodesShared) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 4, 3));
  std::map<Index, int> refs;
  for (Index c = 0; c < s.mesh().num_cells(); ++c) {
    const auto nodes = s.cell_nodes(c);
    for (int i = 3; i < 6; ++i) ++refs[nodes[i]];
  }
  const auto& bn = s.boundary_nodes(BoundaryTag::wall);
  for (auto [node, n] : refs) {
    const bool on_boundary = std::binary_search(bn.begin(), bn.end(), node);
    EXPECT_EQ(n, on_boundary ? 1 : 2);
  }
  // Node coordinates of a midpoint lie halfway along the cell edge.
  const auto nodes = s.cell_nodes(0);
  const auto& t = s.mesh().cell(0);
  const Vec2 mid = 0.5 * (s.mesh().vertex(t[0]) + s.mesh().vertex(t[1]));
  EXPECT_EQ(s.node_coordinate(nodes[3]), mid);
}

TEST(Space, DofsAreBijection) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 3, 3));
  std::vector<int> hit(s.size(), 0);
  for (Index n = 0; n < s.num_scalar_nodes(); ++n) {
    ++hit[s.velocity_dof(0, n)];
    ++hit[s.velocity_dof(1, n)];
  }
  for (Index v = 0; v < s.num_pressure_dofs(); ++v) ++hit[s.pressure_dof(v)];
  for (int h : hit) EXPECT_EQ(h, 1);
}

TEST(Space, InterpolationReproducesPolynomials) {
  const MixedSpace s = build_space(generate_rect_mesh(-0.3, 0, 1, 0.7, 3, 4));
  const State one = interpolate(s, VectorField([](const Vec2&) { return Vec2{1, 0}; }));
  for (Index n = 0; n < s.num_scalar_nodes(); ++n) {
    EXPECT_EQ(one.coeffs[s.velocity_dof(0, n)], 1.0);
    EXPECT_EQ(one.coeffs[s.velocity_dof(1, n)], 0.0);
  }
  const VectorField lin = [](const Vec2& x) { return Vec2{x.y, x.x}; };
  EXPECT_LT(l2_error(s, interpolate(s, lin), lin), 1e-14);
  const VectorField quad = [](const Vec2& x) { return Vec2{x.x * x.y - 2 * x.y * x.y, 3 * x.x * x.x + x.y}; };
  EXPECT_LT(l2_error(s, interpolate(s, quad), quad), 1e-13);
  const ScalarField p = [](const Vec2& x) { return 2 * x.x - x.y + 0.5; };
  EXPECT_LT(l2_error(s, interpolate(s, p), p), 1e-13);
}

TEST(Space, GreshoInterpolantEnergy) {
  const double e_ref = gresho_energy_radial();
  EXPECT_NEAR(e_ref, 0.0837758, 1e-7);
  const MixedSpace s = build_space(generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, 48, 48));
  const State u = interpolate(s, VectorField(gresho_velocity));
  const double e = 0.5 * std::pow(l2_error(s, u, VectorField([](const Vec2&) { return Vec2{}; })), 2);
  EXPECT_NEAR(e, e_ref, 1e-3);
}

TEST(Space, L2Error) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 2, 2));
  EXPECT_NEAR(l2_error(s, State::zero(s), VectorField([](const Vec2&) { return Vec2{1, 0}; })), 1.0, 1e-14);
  auto err = [](int n) {
    const MixedSpace sp = build_space(generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, n, n));
    return l2_error(sp, interpolate(sp, VectorField(gresho_velocity)), VectorField(gresho_velocity));
  };
  EXPECT_GE(err(24) / err(48), 2.0);
}

TEST(Space, ProjectionOfDivergenceFreeInterpolantIsIdentity) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 4, 4));
  // Curl of the cubic stream function x^2 y - y^3/3 + x y: quadratic and
  // pointwise solenoidal, so its interpolant is in the constrained space.
  const VectorField u0 = [](const Vec2& x) { return Vec2{x.x * x.x - x.y * x.y + x.x, -2 * x.x * x.y - x.y}; };
  const State p = divfree_project(s, u0);
  const State i = interpolate(s, u0);
  EXPECT_LT((p.coeffs - i.coeffs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Space, ProjectionRemovesGradientPart) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 4, 4));
  // Gradient of the P1 hat at the vertex nearest (0.5, 0.5).
  Index hat = 0;
  for (Index v = 0; v < s.mesh().num_vertices(); ++v) {
    if (norm(s.mesh().vertex(v) - Vec2{0.5, 0.5}) < 1e-12) hat = v;
  }
  const VectorField grad_hat = [&](const Vec2& x) {
    for (Index c = 0; c < s.mesh().num_cells(); ++c) {
      const auto& t = s.mesh().cell(c);
      const AffineMap m = s.cell_map(c);
      const Vec2 xi = m.inverse(x);
      if (xi.x < -1e-12 || xi.y < -1e-12 || xi.x + xi.y > 1 + 1e-12) continue;
      for (int k = 0; k < 3; ++k) {
        if (t[k] == hat) return m.physical_gradient(eval_basis(ElementKind::P1, xi).gradients[k]);
      }
      return Vec2{};
    }
    return Vec2{};
  };
  const State p = divfree_project(s, grad_hat);
  EXPECT_LT(discrete_divergence(s, p.coeffs).cwiseAbs().maxCoeff(), 1e-12);
  // The hat gradient itself is far from discretely solenoidal.
  const State i = interpolate(s, grad_hat);
  EXPECT_GT(discrete_divergence(s, i.coeffs).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Space, GreshoProjectionConstraintAndEnergy) {
  const MixedSpace s = build_space(generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, 16, 16));
  const State p = divfree_project(s, gresho_velocity);
  const State i = interpolate(s, VectorField(gresho_velocity));
  EXPECT_LT(discrete_divergence(s, p.coeffs).cwiseAbs().maxCoeff(), 1e-12);
  const VectorField zero = [](const Vec2&) { return Vec2{}; };
  const double e_proj = 0.5 * std::pow(l2_error(s, p, zero), 2);
  EXPECT_NEAR(e_proj, gresho_energy_radial(), 1e-3);
  EXPECT_NEAR(e_proj, 0.5 * std::pow(l2_error(s, i, zero), 2), 1e-3);
}

TEST(Space, ProjectionIsNonExpansive) {
  // A polynomial field keeps every integral exact, so ||P u0|| <= ||u0|| holds
  // to rounding; the nodal interpolant has no such bound in general.
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 5, 5));
  const VectorField u0 = [](const Vec2& x) { return Vec2{x.x * x.x + x.y, x.x * x.y - 0.3}; };
  const VectorField zero = [](const Vec2&) { return Vec2{}; };
  const State p = divfree_project(s, u0);
  const double norm_u0 = l2_error(s, interpolate(s, u0), zero);  // exact for quadratics
  EXPECT_LE(l2_error(s, p, zero), norm_u0 * (1 + 1e-14));
  EXPECT_LT(l2_error(s, p, zero), norm_u0 * 0.99);
}
