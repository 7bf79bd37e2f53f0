// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance                      criteria 1-6 and 8
//   acceptance --cylinder-only      criterion 7 (long)
//   acceptance --expect-fail 3,5    exit 0 iff exactly the listed criteria fail

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "emacfem/emacfem.hpp"

using namespace emacfem;

namespace {

struct Verdict {
  int id;
  bool passed;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Worst check of a report as "name=value".
std::string worst(const VerifyReport& rep) {
  const VerifyCheck* w = nullptr;
  for (const auto& c : rep.checks) {
    if (!w || c.value / c.tol > w->value / w->tol) w = &c;
  }
  return w ? w->name + "=" + sci(w->value) : "-";
}

std::string failed_names(const VerifyReport& rep) {
  std::string out;
  for (const auto& c : rep.checks) {
    if (!c.passed()) out += (out.empty() ? "" : ",") + c.name;
  }
  return out;
}

Verdict verification(int id, const VerifyReport& rep, double seconds, double budget) {
  std::string d = std::to_string(rep.checks.size()) + " checks, worst " + worst(rep) + ", " + sci(seconds) + " s";
  if (!rep.passed()) d += ", failed: " + failed_names(rep);
  if (seconds > budget) d += ", over the " + sci(budget) + " s budget";
  return {id, rep.passed() && seconds <= budget, d};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BenchmarkSpec gresho_spec() {
  BenchmarkSpec s = BenchmarkSpec::defaults(BenchmarkName::gresho);
  s.mesh_n = 24;
  s.stepper = {TimeScheme::cn, 0.02, 1.0};
  s.form.nu = 0.0;
  return s;
}

const BenchmarkSummary* summary_of(const std::vector<SweepRow>& rows, FormulationKind k) {
  for (const auto& r : rows) {
    if (r.kind == k && r.result) return &r.result->summary;
  }
  return nullptr;
}

bool diverged(const std::vector<SweepRow>& rows, FormulationKind k) {
  for (const auto& r : rows) {
    if (r.kind == k) return !r.error.empty() || (r.result && r.result->run.blowup);
  }
  return false;
}

std::vector<Verdict> gresho_criteria(int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<FormulationKind> kinds(kAllFormulations.begin(), kAllFormulations.end());
  const auto rows = sweep(gresho_spec(), kinds, jobs);
  const double secs = seconds_since(t0);

  const BenchmarkSummary* emac = summary_of(rows, FormulationKind::emac);
  const BenchmarkSummary* skew = summary_of(rows, FormulationKind::skew);
  const BenchmarkSummary* rot = summary_of(rows, FormulationKind::rot);
  std::ostringstream d;
  bool ok = emac && skew && rot && !diverged(rows, FormulationKind::emac) && !diverged(rows, FormulationKind::skew) &&
            !diverged(rows, FormulationKind::rot);
  std::vector<std::string> misses;
  if (ok) {
    const double ratio_skew = skew->max_angular_momentum_drift / emac->max_angular_momentum_drift;
    const double ratio_rot = rot->max_angular_momentum_drift / emac->max_angular_momentum_drift;
    d << "EMAC dE/E=" << sci(emac->max_energy_drift) << " dM=" << sci(emac->max_momentum_drift)
      << " dMang=" << sci(emac->max_angular_momentum_drift) << "; SKEW dE/E=" << sci(skew->max_energy_drift)
      << " dMang ratio=" << sci(ratio_skew) << "; ROT dE/E=" << sci(rot->max_energy_drift)
      << " dMang ratio=" << sci(ratio_rot);
    if (emac->max_energy_drift > 1e-8) misses.push_back("EMAC energy");
    if (emac->max_momentum_drift > 1e-10) misses.push_back("EMAC momentum");
    if (emac->max_angular_momentum_drift > 1e-9) misses.push_back("EMAC angular momentum");
    if (skew->max_energy_drift > 1e-8) misses.push_back("SKEW energy");
    if (rot->max_energy_drift > 1e-8) misses.push_back("ROT energy");
    if (!(ratio_skew >= 1e3)) misses.push_back("SKEW/EMAC angular momentum ratio");
    if (!(ratio_rot >= 1e3)) misses.push_back("ROT/EMAC angular momentum ratio");
  } else {
    d << "a conserving formulation did not complete";
  }
  for (auto k : {FormulationKind::conv, FormulationKind::cons}) {
    const BenchmarkSummary* s = summary_of(rows, k);
    const bool div = diverged(rows, k);
    d << "; " << to_string(k) << (div ? " diverged" : " dE/E=" + sci(s ? s->max_energy_drift : 0.0));
    if (!div && !(s && s->max_energy_drift > 1e-6)) misses.push_back(std::string(to_string(k)) + " energy");
  }
  d << "; " << sci(secs) << " s";
  if (secs > 300) misses.push_back("runtime");
  ok = ok && misses.empty();
  if (!misses.empty()) {
    d << "; missed:";
    for (const auto& m : misses) d << ' ' << m << (&m == &misses.back() ? "" : ",");
  }
  std::vector<Verdict> out{{3, ok, d.str()}};

  // Companion vorticity on the EMAC run.
  if (emac) {
    const bool z = emac->max_enstrophy_step <= 1e-8;
    const bool w = emac->max_total_vorticity_step <= 1e-10;
    std::string det = "max enstrophy step " + sci(emac->max_enstrophy_step) + ", max total vorticity step " +
                      sci(emac->max_total_vorticity_step) + " (w = 0 on the boundary)";
    out.push_back({5, z && w, det});
  } else {
    out.push_back({5, false, "EMAC run failed"});
  }
  return out;
}

// The companion with no boundary condition on w, reported alongside criterion 5.
std::string natural_companion_note() {
  BenchmarkSpec s = gresho_spec();
  s.vorticity_boundary = VorticityBoundary::natural;
  const BenchmarkResult r = run_benchmark(s);
  return "natural-boundary companion: max enstrophy step " + sci(r.summary.max_enstrophy_step) +
         ", max total vorticity step " + sci(r.summary.max_total_vorticity_step);
}

Verdict energy_identity() {
  BenchmarkSpec s = gresho_spec();
  s.form.nu = 1e-2;
  s.companion = false;
  const BenchmarkResult r = run_benchmark(s);
  const double v = r.summary.max_energy_identity;
  const bool ok = !r.run.blowup && r.run.series.size() == 51 && v <= 1e-8;
  return {4, ok, "max relative violation " + sci(v) + " over " + std::to_string(r.run.series.size() - 1) + " steps"};
}

Verdict convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const double nu = 1e-2;
  const auto space_rows = spatial_convergence(FormulationKind::emac, nu, {TimeScheme::cn, 1e-3, 0.25}, {16, 32});
  // T = 0.25 is not a multiple of 0.02; the temporal study ends at 0.24 and
  // measures against a dt = 0.02/16 run on the same mesh.
  const auto time_rows =
      temporal_convergence(FormulationKind::emac, nu, {TimeScheme::cn, 0.02, 0.24}, 32, {0.02, 0.01}, 0.02 / 16);
  const double secs = seconds_since(t0);
  const double rs = space_rows[1].rate, rt = time_rows[1].rate;
  const bool ok = rs >= 2.5 && rt >= 1.8 && secs <= 900;
  return {6, ok,
          "spatial rate " + sci(rs) + " (errors " + sci(space_rows[0].error) + ", " + sci(space_rows[1].error) +
              "), temporal rate " + sci(rt) + " (errors " + sci(time_rows[0].error) + ", " + sci(time_rows[1].error) +
              "), " + sci(secs) + " s"};
}

Verdict cylinder() {
  BenchmarkSpec s = BenchmarkSpec::defaults(BenchmarkName::cylinder);
  s.mesh_path = std::string(EMACFEM_SOURCE_DIR) + "/data/cylinder_coarse.trimesh";
  s.kind = FormulationKind::emac;
  const auto t0 = std::chrono::steady_clock::now();
  const MixedSpace space = build_space(read_mesh(s.mesh_path));
  const BenchmarkResult r = run_benchmark(s);
  const double secs = seconds_since(t0);
  const double cd = r.summary.max_drag, dp = r.summary.final_pressure_drop;
  const bool ok = !r.run.blowup && std::abs(cd / kCylinderDragRef - 1.0) <= 0.05 &&
                  std::abs(dp / kCylinderPressureDropRef - 1.0) <= 0.10;
  return {7, ok,
          std::to_string(space.num_velocity_dofs()) + " velocity dofs, c_d,max " + sci(cd) + " (ref " +
              sci(kCylinderDragRef) + "), c_l,max " + sci(r.summary.max_lift) + ", dp(8) " + sci(dp) + " (ref " +
              sci(kCylinderPressureDropRef) + "), " + sci(secs) + " s" +
              (r.run.blowup ? ", blew up at t=" + sci(r.run.blowup->t) : "")};
}

void print(const Verdict& v) {
  std::cout << "criterion " << v.id << ": " << (v.passed ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool cylinder_only = false;
  std::vector<int> expect_fail;
  int jobs = static_cast<int>(std::max(1u, std::min(5u, std::thread::hardware_concurrency())));
  app.add_flag("--cylinder-only", cylinder_only, "run only the cylinder benchmark");
  app.add_option("--expect-fail", expect_fail, "criteria known to fail")->delimiter(',');
  app.add_option("--jobs", jobs, "parallel Gresho runs");
  CLI11_PARSE(app, argc, argv);

  std::vector<Verdict> verdicts;
  auto record = [&](const Verdict& v) {
    print(v);
    verdicts.push_back(v);
  };

  if (cylinder_only) {
    record(cylinder());
  } else {
    VerifyOptions opt;
    auto t0 = std::chrono::steady_clock::now();
    const VerifyReport ids = verify_identities(opt);
    record(verification(1, ids, seconds_since(t0), 10.0));
    t0 = std::chrono::steady_clock::now();
    const VerifyReport ann = verify_annihilation(opt);
    record(verification(2, ann, seconds_since(t0), 10.0));
    const auto gresho = gresho_criteria(jobs);
    record(gresho[0]);
    record(energy_identity());
    record(gresho[1]);
    std::cout << "  note: " << natural_companion_note() << std::endl;
    record(convergence());
    std::cout << "criterion 7: SKIP  extended tier, run `acceptance --cylinder-only`" << std::endl;
    t0 = std::chrono::steady_clock::now();
    const VerifyReport jac = verify_jacobians(opt);
    record(verification(8, jac, seconds_since(t0), 5.0));
  }

  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  bool as_expected = true;
  int failed = 0;
  for (const auto& v : verdicts) {
    failed += !v.passed;
    const bool listed = expected.count(v.id) > 0;
    if (v.passed == listed) {
      as_expected = false;
      std::cout << "criterion " << v.id << (listed ? " passed but is listed as failing" : " failed unexpectedly")
                << std::endl;
    }
  }
  std::cout << verdicts.size() - failed << " of " << verdicts.size() << " criteria passed" << std::endl;
  return as_expected ? 0 : 1;
}
