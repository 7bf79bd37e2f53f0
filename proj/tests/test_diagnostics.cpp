#include <gtest/gtest.h>

#include <numbers>

#include "emacfem/bench.hpp"

using namespace emacfem;

namespace {

MixedSpace unit_square(int n) { return build_space(generate_rect_mesh(0, 0, 1, 1, n, n)); }

// Angular momentum of the Gresho profile, int r u_theta dA, by Simpson.
double gresho_angular_radial() {
  auto speed = [](double r) { return r <= 0.2 ? 5 * r : (r <= 0.4 ? 2 - 5 * r : 0.0); };
  double sum = 0.0;
  for (auto [a, b] : {std::pair{0.0, 0.2}, std::pair{0.2, 0.4}}) {
    const int n = 2000;
    const double h = (b - a) / n;
    for (int i = 0; i <= n; ++i) {
      const double r = a + i * h;
      const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      sum += w * r * speed(r) * 2 * std::numbers::pi * r * h / 3;
    }
  }
  return sum;
}

// [-1, 1]^2 with the square [-0.5, 0.5]^2 removed; the hole is the obstacle.
Mesh square_with_hole(int n) {
  const Mesh full = generate_rect_mesh(-1, -1, 1, 1, n, n);
  std::vector<Triangle> cells;
  for (const auto& t : full.cells()) {
    Vec2 c;
    for (Index v : t) c = c + full.vertex(v) * (1.0 / 3.0);
    if (std::abs(c.x) > 0.5 || std::abs(c.y) > 0.5) cells.push_back(t);
  }
  return Mesh::from_cells(full.vertices(), cells, [](const Vec2& mid) {
    return std::abs(mid.x) < 0.75 && std::abs(mid.y) < 0.75 ? BoundaryTag::obstacle : BoundaryTag::wall;
  });
}

State with_pressure(const MixedSpace& s, const ScalarField& p) {
  State x = State::zero(s);
  interpolate_pressure(s, p, x);
  return x;
}

}  // namespace

TEST(Diagnostics, UniformFlow) {
  const MixedSpace s = unit_square(3);
  const State u = interpolate(s, VectorField([](const Vec2&) { return Vec2{1, 0}; }));
  EXPECT_NEAR(kinetic_energy(s, u), 0.5, 1e-14);
  EXPECT_NEAR(linear_momentum(s, u).x, 1.0, 1e-14);
  EXPECT_NEAR(linear_momentum(s, u).y, 0.0, 1e-15);
  EXPECT_NEAR(angular_momentum(s, u), -0.5, 1e-14);
  EXPECT_NEAR(divergence_norm(s, u), 0.0, 1e-14);
}

TEST(Diagnostics, GreshoInterpolant) {
  const MixedSpace s = build_space(generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, 48, 48));
  const State u = interpolate(s, VectorField(gresho_velocity));
  const double m_ref = gresho_angular_radial();
  EXPECT_NEAR(m_ref, 0.0586431, 1e-7);
  EXPECT_NEAR(kinetic_energy(s, u), 0.0837758, 1e-3);
  EXPECT_NEAR(angular_momentum(s, u), m_ref, 1e-3);
  // Symmetric vortex: no net momentum.
  EXPECT_NEAR(linear_momentum(s, u).x, 0.0, 1e-14);
  EXPECT_NEAR(linear_momentum(s, u).y, 0.0, 1e-14);
}

TEST(Diagnostics, ScalingAndTranslation) {
  const MixedSpace s = unit_square(4);
  const State u = interpolate(s, VectorField([](const Vec2& x) { return Vec2{x.x * x.y, std::sin(x.x)}; }));
  const double a = -2.5;
  State au = u;
  au.coeffs *= a;
  EXPECT_NEAR(kinetic_energy(s, au), a * a * kinetic_energy(s, u), 1e-13);
  EXPECT_NEAR(linear_momentum(s, au).x, a * linear_momentum(s, u).x, 1e-13);
  EXPECT_NEAR(angular_momentum(s, au), a * angular_momentum(s, u), 1e-13);
  // Adding a constant c shifts M by c |Omega|.
  const Vec2 c{0.3, -0.7};
  State shifted = interpolate(s, VectorField([&](const Vec2& x) { return Vec2{x.x * x.y + c.x, std::sin(x.x) + c.y}; }));
  EXPECT_NEAR(linear_momentum(s, shifted).x - linear_momentum(s, u).x, c.x, 1e-14);
  EXPECT_NEAR(linear_momentum(s, shifted).y - linear_momentum(s, u).y, c.y, 1e-14);
}

TEST(Diagnostics, DragOfLinearPressure) {
  const MixedSpace s = build_space(square_with_hole(8));
  ASSERT_EQ(s.mesh().num_boundary_loops(), 2);
  const ForceScaling unit{1.0, 1.0, 1.0};
  // -2 * closed integral of x n_x over the hole boundary = -2 * area.
  auto [cd, cl] = drag_lift(s, with_pressure(s, [](const Vec2& x) { return x.x; }), 1.0, BoundaryTag::obstacle, unit);
  EXPECT_NEAR(cd, -2.0, 1e-13);
  EXPECT_NEAR(cl, 0.0, 1e-13);
  auto [cd_y, cl_y] = drag_lift(s, with_pressure(s, [](const Vec2& x) { return x.y; }), 1.0, BoundaryTag::obstacle, unit);
  EXPECT_NEAR(cd_y, 0.0, 1e-13);
  EXPECT_NEAR(cl_y, -2.0, 1e-13);
}

TEST(Diagnostics, ConstantPressureHasNoForce) {
  const MixedSpace s = build_space(square_with_hole(4));
  auto [cd, cl] = drag_lift(s, with_pressure(s, [](const Vec2&) { return 1.0; }), 1e-3);
  EXPECT_NEAR(cd, 0.0, 1e-12);
  EXPECT_NEAR(cl, 0.0, 1e-12);
}

TEST(Diagnostics, ShearOnObstacle) {
  // u = (y^2, 0): on the top face n = (0, 1), t = (1, 0), du_t/dn = 2y = 1;
  // on the bottom n = (0, -1), t = (-1, 0), du_t/dn = 2y = -1, and n_y flips
  // too, so both add nu. The vertical faces carry no shear.
  const MixedSpace s = build_space(square_with_hole(8));
  const State u = interpolate(s, VectorField([](const Vec2& x) { return Vec2{x.y * x.y, 0.0}; }));
  const double nu = 0.1;
  auto [cd, cl] = drag_lift(s, u, nu, BoundaryTag::obstacle, {1.0, 1.0, 1.0});
  EXPECT_NEAR(cd, 2.0 * 2.0 * nu, 1e-13);
  EXPECT_NEAR(cl, 0.0, 1e-13);
}

TEST(Diagnostics, DragNeedsTaggedEdges) {
  const MixedSpace s = unit_square(2);
  EXPECT_THROW(drag_lift(s, State::zero(s), 1.0), ParameterError);
}

TEST(Diagnostics, PressureDrop) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 0.5, 0.5, 5, 5));
  EXPECT_NEAR(pressure_drop(s, with_pressure(s, [](const Vec2&) { return 3.0; })), 0.0, 1e-14);
  EXPECT_NEAR(pressure_drop(s, with_pressure(s, [](const Vec2& x) { return x.x; })), -0.1, 1e-14);
  EXPECT_THROW(pressure_drop(s, State::zero(s), {0.15, 0.2}, {0.6, 0.2}), LocationError);
}

TEST(Diagnostics, PointEvaluation) {
  const MixedSpace s = unit_square(3);
  const State u = interpolate(s, VectorField([](const Vec2& x) { return Vec2{x.x * x.x, x.x * x.y - x.y}; }));
  const Vec2 v = velocity_at(s, u, {0.37, 0.81});
  EXPECT_NEAR(v.x, 0.37 * 0.37, 1e-14);
  EXPECT_NEAR(v.y, 0.37 * 0.81 - 0.81, 1e-14);
  EXPECT_THROW(velocity_at(s, u, {-0.1, 0.5}), LocationError);
}

TEST(Diagnostics, RecordIsFinite) {
  const MixedSpace s = unit_square(2);
  DiagnosticsRecord r = basic_diagnostics(s, State::zero(s, 0.5));
  EXPECT_EQ(r.t, 0.5);
  EXPECT_TRUE(r.finite());
  r.drag = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(r.finite());
}
