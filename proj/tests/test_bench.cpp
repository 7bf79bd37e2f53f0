#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "emacfem/bench.hpp"

using namespace emacfem;

namespace {

Vec2 polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

double gresho_p(double r, double theta = 0.3) { return gresho_exact(polar(r, theta)).pressure; }

BenchmarkSpec small_gresho(FormulationKind kind, int n, double t_end) {
  BenchmarkSpec s = BenchmarkSpec::defaults(BenchmarkName::gresho);
  s.kind = kind;
  s.mesh_n = n;
  s.stepper.t_end = t_end;
  return s;
}

}  // namespace

TEST(Bench, GreshoPointValues) {
  const FlowPoint a = gresho_exact({0.1, 0.0});
  EXPECT_NEAR(a.velocity.x, 0.0, 1e-15);
  EXPECT_NEAR(a.velocity.y, 0.5, 1e-15);
  const FlowPoint b = gresho_exact({0.4, 0.0});
  EXPECT_NEAR(norm(b.velocity), 0.0, 1e-15);
  EXPECT_NEAR(b.pressure, 0.0, 1e-14);
  EXPECT_NEAR(norm(gresho_velocity({0.3, 0.0})), 0.5, 1e-15);
  EXPECT_NEAR(gresho_vorticity({0.3, 0.0}), 2.0 / 0.3 - 10.0, 1e-14);
  EXPECT_NEAR(gresho_vorticity({0.3, 0.0}), -3.3333333, 1e-7);
  EXPECT_EQ(gresho_vorticity({0.1, 0.05}), 10.0);
  EXPECT_EQ(gresho_vorticity({0.45, 0.0}), 0.0);
  EXPECT_EQ(gresho_exact({0.45, 0.1}).pressure, 0.0);
}

TEST(Bench, GreshoIsContinuousOnRays) {
  for (double theta : {0.0, 0.7, 2.1, 4.0}) {
    for (double r : {0.2, 0.4}) {
      const FlowPoint in = gresho_exact(polar(r - 1e-12, theta));
      const FlowPoint out = gresho_exact(polar(r + 1e-12, theta));
      EXPECT_LT(norm(in.velocity - out.velocity), 1e-10) << r;
      EXPECT_NEAR(in.pressure, out.pressure, 1e-10) << r;
    }
  }
}

TEST(Bench, GreshoPressureBalancesCentripetalForce) {
  // Steady rotating flow: dp/dr = u_theta^2 / r.
  const double h = 1e-6;
  for (double r : {0.05, 0.15, 0.25, 0.33, 0.39}) {
    const double dpdr = (gresho_p(r + h) - gresho_p(r - h)) / (2 * h);
    const double ut = norm(gresho_velocity(polar(r, 0.3)));
    EXPECT_NEAR(dpdr, ut * ut / r, 1e-6) << r;
  }
}

TEST(Bench, PrintedAnnulusConstantWouldJump) {
  // With 20 (0.4)^2 in place of 20 (0.4) the annulus pressure misses zero at
  // r = 0.4 by 4.8; the continuous constant is what the library uses.
  const double printed = -12.5 * 0.16 + 20.0 * 0.16 - 4.0 * std::log(0.4);
  const double annulus_at_04 = 12.5 * 0.16 - 20.0 * 0.4 + 4.0 * std::log(0.4);
  EXPECT_NEAR(annulus_at_04 + printed, -4.8, 1e-12);
  EXPECT_NEAR(annulus_at_04 + kGreshoC2, 0.0, 1e-14);
}

TEST(Bench, GreshoInvariantConstants) {
  EXPECT_NEAR(kGreshoEnergy, 0.0837758, 1e-7);
  EXPECT_NEAR(kGreshoAngularMomentum, 0.0586431, 1e-7);
}

TEST(Bench, CylinderInflow) {
  EXPECT_NEAR(cylinder_inflow({0.0, 0.205}, 4.0).x, 1.5, 1e-14);
  EXPECT_EQ(cylinder_inflow({0.0, 0.0}, 4.0).x, 0.0);
  EXPECT_NEAR(cylinder_inflow({0.0, 0.41}, 4.0).x, 0.0, 1e-15);
  EXPECT_EQ(cylinder_inflow({0.0, 0.205}, 0.0).x, 0.0);
  EXPECT_EQ(cylinder_inflow({0.0, 0.1}, 2.0).y, 0.0);
}

TEST(Bench, TaylorGreenSolvesNavierStokes) {
  // Residual of u_t + (u.grad)u + grad p - nu lap u and div u by central
  // differences.
  const TaylorGreen tg{0.05};
  const double h = 1e-4;
  for (Vec2 x : {Vec2{0.2, 0.7}, Vec2{0.61, 0.33}, Vec2{0.9, 0.1}}) {
    const double t = 0.4;
    auto u = [&](const Vec2& y, double s = 0.4) { return tg.velocity(y, s); };
    const Vec2 ex{h, 0}, ey{0, h};
    const Vec2 ut = (u(x, t + h) - u(x, t - h)) * (0.5 / h);
    const Vec2 ux = (u(x + ex) - u(x - ex)) * (0.5 / h);
    const Vec2 uy = (u(x + ey) - u(x - ey)) * (0.5 / h);
    const Vec2 lap = (u(x + ex) + u(x - ex) + u(x + ey) + u(x - ey) - u(x) * 4.0) * (1.0 / (h * h));
    const Vec2 gp{(tg.pressure(x + ex, t) - tg.pressure(x - ex, t)) * (0.5 / h),
                  (tg.pressure(x + ey, t) - tg.pressure(x - ey, t)) * (0.5 / h)};
    const Vec2 r = ut + ux * u(x).x + uy * u(x).y + gp - lap * tg.nu;
    EXPECT_LT(norm(r), 1e-6);
    EXPECT_LT(std::abs(ux.x + uy.y), 1e-7);
  }
}

TEST(Bench, SpecValidation) {
  BenchmarkSpec c = BenchmarkSpec::defaults(BenchmarkName::cylinder);
  EXPECT_THROW(c.validate(), ParameterError);
  BenchmarkSpec g = BenchmarkSpec::defaults(BenchmarkName::gresho);
  g.mesh_n = 0;
  EXPECT_THROW(g.validate(), ParameterError);
  EXPECT_EQ(parse_benchmark("taylor_green"), BenchmarkName::taylor_green);
  EXPECT_FALSE(parse_benchmark("taylor-green"));
}

TEST(Bench, RunsAreDeterministic) {
  const BenchmarkSpec s = small_gresho(FormulationKind::rot, 8, 0.1);
  const BenchmarkResult a = run_benchmark(s), b = run_benchmark(s);
  EXPECT_EQ(a.run.final_state.coeffs, b.run.final_state.coeffs);
  ASSERT_EQ(a.run.series.size(), b.run.series.size());
  for (std::size_t i = 0; i < a.run.series.size(); ++i) EXPECT_EQ(a.run.series[i].energy, b.run.series[i].energy);
}

TEST(Bench, EmacGreshoSummary) {
  const BenchmarkResult r = run_benchmark(small_gresho(FormulationKind::emac, 12, 0.2));
  EXPECT_FALSE(r.run.blowup);
  EXPECT_EQ(r.run.series.size(), 11u);
  EXPECT_LT(r.summary.max_energy_drift, 1e-8);
  EXPECT_LT(r.summary.max_momentum_drift, 1e-12);
  EXPECT_LT(r.summary.max_energy_identity, 1e-8);
  EXPECT_LT(r.summary.max_enstrophy_step, 1e-8);
  EXPECT_LT(r.summary.max_divergence_residual, 1e-9);
  EXPECT_GT(r.summary.max_newton_iters, 0);
  EXPECT_LT(r.summary.final_l2_error, 0.1);
}

TEST(Bench, ConservativeFormFailsOnGresho) {
  // CONS either blows up or loses energy far beyond the conserving forms.
  const BenchmarkResult r = run_benchmark(small_gresho(FormulationKind::cons, 16, 1.0));
  EXPECT_TRUE(r.run.blowup || r.summary.max_energy_drift > 1e-2);
}

TEST(Bench, SnapshotsFollowTheStride) {
  std::vector<Index> seen;
  run_benchmark(small_gresho(FormulationKind::emac, 4, 0.1), [&](Index k, const State&) { seen.push_back(k); }, 2);
  EXPECT_EQ(seen, (std::vector<Index>{0, 2, 4}));
}

TEST(Bench, SpatialConvergence) {
  const auto rows = spatial_convergence(FormulationKind::emac, 0.01, {TimeScheme::cn, 0.005, 0.02}, {8, 16});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(std::isnan(rows[0].rate));
  EXPECT_GE(rows[1].rate, 2.8);
}

TEST(Bench, SweepKeepsGoingAndMatchesSingleRuns) {
  EXPECT_THROW(sweep(small_gresho(FormulationKind::emac, 4, 0.1), {}), ParameterError);
  const BenchmarkSpec s = small_gresho(FormulationKind::emac, 6, 0.1);
  const auto rows = sweep(s, {FormulationKind::skew, FormulationKind::emac}, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].kind, FormulationKind::skew);
  ASSERT_TRUE(rows[1].result);
  EXPECT_EQ(rows[1].result->run.final_state.coeffs, run_benchmark(s).run.final_state.coeffs);
  BenchmarkSpec bad = s;
  bad.stepper.dt = 1e3;
  bad.stepper.t_end = 1e3;
  const auto failed = sweep(bad, {FormulationKind::cons, FormulationKind::emac});
  EXPECT_TRUE(failed[0].result && failed[0].result->run.blowup);
}
