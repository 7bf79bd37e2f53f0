#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "emacfem/system.hpp"

namespace emacfem {

struct VerifyCheck {
  std::string name;
  double value = 0.0;  // worst residual over all trials
  double tol = 0.0;
  bool passed() const { return value <= tol; }
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed()) return false;
    }
    return true;
  }
  void append(const VerifyReport& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

inline constexpr std::uint64_t kDefaultSeed = 20190614;

struct VerifyOptions {
  std::uint64_t seed = kDefaultSeed;
  int trials = 100;
  int mesh_n = 4;
  double tol = 1e-12;
  double jacobian_tol = 1e-6;
  NonlinearKernel kernel = nonlinear_term;
};

namespace detail {

/// Unit square mesh with interior vertices jittered by up to 20% of h, so
/// that no identity holds merely by mesh symmetry.
inline Mesh jittered_square(int n, std::mt19937_64& rng) {
  const Mesh base = generate_rect_mesh(0.0, 0.0, 1.0, 1.0, n, n);
  std::uniform_real_distribution<double> jitter(-0.2 / n, 0.2 / n);
  std::vector<Vec2> verts = base.vertices();
  for (auto& v : verts) {
    const bool boundary = v.x == 0.0 || v.x == 1.0 || v.y == 0.0 || v.y == 1.0;
    if (!boundary) v += Vec2{jitter(rng), jitter(rng)};
  }
  return Mesh(std::move(verts), base.cells(), base.boundary_edges());
}

inline Vector random_velocity(const MixedSpace& space, std::mt19937_64& rng, bool zero_trace) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Vector u = Vector::Zero(space.size());
  for (Index i = 0; i < space.num_velocity_dofs(); ++i) u[i] = coef(rng);
  if (zero_trace) {
    for (auto tag : kAllBoundaryTags) {
      for (Index node : space.boundary_nodes(tag)) {
        u[space.velocity_dof(0, node)] = 0.0;
        u[space.velocity_dof(1, node)] = 0.0;
      }
    }
  }
  return u;
}

}  // namespace detail

/// Vector identities on random P2 fields; u has zero trace where required.
inline VerifyReport verify_identities(const VerifyOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  const MixedSpace space = build_space(detail::jittered_square(opt.mesh_n, rng));
  VerifyReport rep;
  for (auto id : kAllIdentities) rep.checks.push_back({std::string(to_string(id)), 0.0, opt.tol});
  for (int t = 0; t < opt.trials; ++t) {
    const Vector u0 = detail::random_velocity(space, rng, true);
    const Vector u = detail::random_velocity(space, rng, false);
    const Vector v = detail::random_velocity(space, rng, false);
    const Vector w = detail::random_velocity(space, rng, false);
    for (std::size_t k = 0; k < kAllIdentities.size(); ++k) {
      const Identity id = kAllIdentities[k];
      const Vector& uu = requires_zero_trace(id) ? u0 : u;
      const double r = verify_identity(id, space, uu, v, w, kDefaultQuadratureDegree, opt.kernel);
      rep.checks[k].value = std::max(rep.checks[k].value, r);
    }
  }
  return rep;
}

/// Energy, momentum and angular-momentum annihilation of the nonlinear
/// forms for random u vanishing on the boundary.
inline VerifyReport verify_annihilation(const VerifyOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed + 1);
  const MixedSpace space = build_space(detail::jittered_square(opt.mesh_n, rng));
  const int q = kDefaultQuadratureDegree;
  const VectorField e1 = [](const Vec2&) { return Vec2{1.0, 0.0}; };
  const VectorField e2 = [](const Vec2&) { return Vec2{0.0, 1.0}; };
  const VectorField rot = [](const Vec2& x) { return Vec2{-x.y, x.x}; };
  VerifyReport rep;
  rep.checks = {{"energy skew", 0.0, opt.tol},
                {"energy rot", 0.0, opt.tol},
                {"energy emac", 0.0, opt.tol},
                {"energy conv = -1/2 ((div u) u, u)", 0.0, opt.tol},
                {"energy cons = +1/2 ((div u) u, u)", 0.0, opt.tol},
                {"momentum emac", 0.0, opt.tol},
                {"momentum cons", 0.0, opt.tol},
                {"momentum conv = -((div u) u, e_i)", 0.0, opt.tol},
                {"angular momentum emac", 0.0, opt.tol},
                {"angular momentum cons", 0.0, opt.tol}};
  auto bump = [&](std::size_t k, double v) { rep.checks[k].value = std::max(rep.checks[k].value, std::abs(v)); };
  for (int t = 0; t < opt.trials; ++t) {
    const Vector u = detail::random_velocity(space, rng, true);
    auto nl = [&](FormulationKind k, const auto& v) { return nl_functional(k, space, u, v, q, opt.kernel); };
    const double div_uu = divergence_product(space, u, u, u, q);
    bump(0, nl(FormulationKind::skew, u));
    bump(1, nl(FormulationKind::rot, u));
    bump(2, nl(FormulationKind::emac, u));
    bump(3, nl(FormulationKind::conv, u) + 0.5 * div_uu);
    bump(4, nl(FormulationKind::cons, u) - 0.5 * div_uu);
    for (const auto* e : {&e1, &e2}) {
      bump(5, nl(FormulationKind::emac, *e));
      bump(6, nl(FormulationKind::cons, *e));
      const double div_ue = integrate_cells(space, q, [&](const CellValues& cv, std::size_t qq) {
        const auto [uq, gq] = cv.velocity(space, u, qq);
        return gq.trace() * dot(uq, (*e)(cv.point(qq)));
      });
      bump(7, nl(FormulationKind::conv, *e) + div_ue);
    }
    bump(8, nl(FormulationKind::emac, rot));
    bump(9, nl(FormulationKind::cons, rot));
  }
  return rep;
}

/// Relative difference between the assembled Jacobian and central finite
/// differences of the residual, max over columns / max |J|.
inline double jacobian_fd_error(const Assembler& assembler, const Vector& x, const StepContext& step,
                                double eps = 1e-6) {
  Vector r0;
  SparseMatrix jac;
  assembler.assemble(x, step, r0, &jac);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(jac);
  const double scale = std::max(dense.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  Vector rp, rm;
  for (Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp[j] += eps;
    xm[j] -= eps;
    assembler.assemble(xp, step, rp, nullptr);
    assembler.assemble(xm, step, rm, nullptr);
    const Vector fd = (rp - rm) / (2.0 * eps);
    worst = std::max(worst, (fd - dense.col(j)).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

/// Finite-difference Jacobian checks for every formulation and time scheme
/// on a 2-cell mesh whose right edge is an outflow boundary.
inline VerifyReport verify_jacobians(const VerifyOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed + 2);
  const Mesh mesh = generate_rect_mesh(0.0, 0.0, 1.0, 1.0, 1, 1).retagged([](const Vec2& a, const Vec2& b, BoundaryTag tag) {
    return a.x == 1.0 && b.x == 1.0 ? BoundaryTag::outflow : tag;
  });
  const MixedSpace space = build_space(mesh);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  auto random_state = [&](double t) {
    State s = State::zero(space, t);
    for (Index i = 0; i < space.size(); ++i) s.coeffs[i] = coef(rng);
    return s;
  };
  FormConfig form;
  form.nu = 0.3;
  form.gamma = 0.1;
  VerifyReport rep;
  const double dt = 0.1;
  for (auto kind : kAllFormulations) {
    const Assembler assembler(space, kind, form);
    for (auto scheme : {TimeScheme::cn, TimeScheme::bdf2, TimeScheme::bdf3}) {
      const State s2 = random_state(0.0), s1 = random_state(dt), s0 = random_state(2 * dt);
      StepContext ctx;
      if (scheme == TimeScheme::cn) {
        ctx = StepContext::crank_nicolson(space, s0, dt);
      } else {
        ctx = StepContext::bdf(space, scheme == TimeScheme::bdf2 ? 2 : 3, {&s0, &s1, &s2}, dt);
      }
      ctx.forcing = [](const Vec2& x, double t) { return Vec2{std::sin(x.y + t), x.x * x.y}; };
      const Vector x = random_state(3 * dt).coeffs;
      rep.checks.push_back({"jacobian " + std::string(to_string(kind)) + " " + std::string(to_string(scheme)),
                            jacobian_fd_error(assembler, x, ctx), opt.jacobian_tol});
    }
  }
  return rep;
}

inline VerifyReport verify_all(const VerifyOptions& opt = {}) {
  VerifyReport rep = verify_identities(opt);
  rep.append(verify_annihilation(opt));
  rep.append(verify_jacobians(opt));
  return rep;
}

}  // namespace emacfem
