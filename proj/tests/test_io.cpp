#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "emacfem/io.hpp"

using namespace emacfem;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

DiagnosticsRecord awkward_record(double t) {
  DiagnosticsRecord r;
  r.t = t;
  r.energy = 0.1 + 0.2;
  r.momentum = {-1.0 / 3.0, 1e-300};
  r.angular_momentum = std::nextafter(0.0586431, 1.0);
  r.div_norm = 5e-324;
  r.newton_iters = 3;
  return r;
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("emacfem_test_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Io, CsvSingleRecord) {
  std::ostringstream os;
  write_csv({awkward_record(0.0)}, os);
  const auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "t,E,Mx,My,Mang,divnorm,newton_iters");
}

TEST(Io, CsvOptionalColumns) {
  DiagnosticsRecord a = awkward_record(0.0), b = awkward_record(0.1);
  b.drag = 2.5;
  b.total_vorticity = -1e-17;
  const auto cols = csv_columns({a, b});
  EXPECT_EQ(cols, (std::vector<std::string>{"t", "E", "Mx", "My", "Mang", "divnorm", "cd", "totvort", "newton_iters"}));
  std::ostringstream os;
  write_csv({a, b}, os);
  std::istringstream is(os.str());
  const auto back = read_csv(is);
  EXPECT_FALSE(back[0].drag);
  EXPECT_EQ(back[1].drag, 2.5);
  EXPECT_EQ(back[1].total_vorticity, -1e-17);
}

TEST(Io, CsvRoundTripIsBitExact) {
  DiagnosticsSeries series;
  for (int i = 0; i < 5; ++i) {
    DiagnosticsRecord r = awkward_record(0.02 * i);
    r.energy *= std::exp(-i / 7.0);
    r.enstrophy = std::sqrt(2.0) * i;
    series.push_back(r);
  }
  std::ostringstream os;
  write_csv(series, os);
  std::istringstream is(os.str());
  const auto back = read_csv(is);
  ASSERT_EQ(back.size(), series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    EXPECT_EQ(back[i].t, series[i].t);
    EXPECT_EQ(back[i].energy, series[i].energy);
    EXPECT_EQ(back[i].momentum.x, series[i].momentum.x);
    EXPECT_EQ(back[i].momentum.y, series[i].momentum.y);
    EXPECT_EQ(back[i].angular_momentum, series[i].angular_momentum);
    EXPECT_EQ(back[i].div_norm, series[i].div_norm);
    EXPECT_EQ(back[i].enstrophy, series[i].enstrophy);
    EXPECT_EQ(back[i].newton_iters, series[i].newton_iters);
  }
}

TEST(Io, CsvErrors) {
  EXPECT_THROW(write_csv(DiagnosticsSeries{}, std::cout), ParameterError);
  EXPECT_THROW(write_csv({awkward_record(0)}, fs::path("/nonexistent-dir/x/run.csv")), IoError);
  std::istringstream missing("t,E,Mx\n0,1,2\n");
  EXPECT_THROW(read_csv(missing), ParseError);
  std::istringstream short_row("t,E,Mx,My,Mang,divnorm,newton_iters\n0,1,2\n");
  try {
    read_csv(short_row);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(read_csv(fs::path("/nonexistent-dir/run.csv")), IoError);
}

TEST(Io, CsvFileRoundTrip) {
  const fs::path d = temp_dir("csv");
  write_csv({awkward_record(0.5)}, d / "run.csv");
  EXPECT_EQ(read_csv(d / "run.csv").at(0).energy, 0.1 + 0.2);
  fs::remove_all(d);
}

TEST(Io, VtkTwoCells) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 1, 1));
  const State u = interpolate(s, VectorField([](const Vec2& x) { return Vec2{x.x, -x.y}; }));
  std::ostringstream os;
  write_vtk(s, u, os);
  const std::string text = os.str();
  EXPECT_NE(text.find("POINTS 9 double"), std::string::npos);
  EXPECT_NE(text.find("CELLS 8 32"), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES 8"), std::string::npos);
  EXPECT_NE(text.find("POINT_DATA 9"), std::string::npos);
  EXPECT_NE(text.find("VECTORS velocity double"), std::string::npos);
  EXPECT_NE(text.find("SCALARS pressure double 1"), std::string::npos);
}

TEST(Io, VtkZeroStateHasZeroData) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 2, 2));
  std::ostringstream os;
  write_vtk(s, State::zero(s), os);
  const auto lines = lines_of(os.str());
  auto at = std::find(lines.begin(), lines.end(), "VECTORS velocity double");
  ASSERT_NE(at, lines.end());
  int zero_rows = 0;
  for (++at; at != lines.end(); ++at) {
    if (*at == "0 0 0" || *at == "0") ++zero_rows;
  }
  // Velocity, pressure and speed rows for every node.
  EXPECT_EQ(zero_rows, 3 * s.num_scalar_nodes());
}

TEST(Io, VtkUnwritablePath) {
  const MixedSpace s = build_space(generate_rect_mesh(0, 0, 1, 1, 1, 1));
  EXPECT_THROW(write_vtk(s, State::zero(s), fs::path("/nonexistent-dir/a.vtk")), IoError);
}

TEST(Io, ConfigRoundTrip) {
  RunConfig c = RunConfig::defaults(BenchmarkName::taylor_green);
  c.spec.kind = FormulationKind::rot;
  c.formulations = {FormulationKind::skew, FormulationKind::emac};
  c.spec.stepper = {TimeScheme::bdf3, 0.1 + 0.2, 1.0 / 3.0};
  c.spec.form.gamma = 0.1;
  c.spec.mesh_n = 20;
  c.spec.vorticity_boundary = VorticityBoundary::natural;
  c.out = "results/tg";
  c.seed = 7;
  c.jobs = 3;
  std::ostringstream first;
  write_config(c, first);
  std::istringstream is(first.str());
  const RunConfig back = read_config(is);
  std::ostringstream second;
  write_config(back, second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back.spec.stepper.dt, 0.1 + 0.2);
  EXPECT_EQ(back.spec.stepper.t_end, 1.0 / 3.0);
  EXPECT_EQ(back.formulations, c.formulations);
}

TEST(Io, ConfigDefaultsAndOverrides) {
  std::istringstream is("# comment\nformulation = emac\n\nbenchmark = taylor_green  # trailing\n");
  const RunConfig c = read_config(is);
  EXPECT_EQ(c.spec.kind, FormulationKind::emac);
  EXPECT_EQ(c.spec.name, BenchmarkName::taylor_green);
  EXPECT_EQ(c.spec.form.nu, 0.01);
  std::istringstream empty("");
  EXPECT_EQ(read_config(empty).spec.name, BenchmarkName::gresho);
}

TEST(Io, ConfigErrorsNameTheKey) {
  std::istringstream typo("dt = 0.1\nformulaton = emac\n");
  try {
    read_config(typo);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("formulaton"), std::string::npos);
    EXPECT_EQ(e.line(), 2);
  }
  std::istringstream bad_value("mesh_n = twelve\n");
  try {
    read_config(bad_value);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("mesh_n"), std::string::npos);
  }
  std::istringstream no_eq("dt 0.1\n");
  EXPECT_THROW(read_config(no_eq), ParseError);
  std::istringstream bad_form("formulations = emac,emacs\n");
  EXPECT_THROW(read_config(bad_form), ParseError);
  EXPECT_THROW(read_config(fs::path("/nonexistent-dir/run.cfg")), IoError);
}
