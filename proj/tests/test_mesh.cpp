#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "emacfem/mesh.hpp"

using namespace emacfem;

namespace {

// Independent edge count: unique unordered vertex pairs over all cells.
std::size_t count_edges(const Mesh& m) {
  std::set<std::pair<Index, Index>> e;
  for (const auto& c : m.cells()) {
    for (int k = 0; k < 3; ++k) e.insert(std::minmax(c[k], c[(k + 1) % 3]));
  }
  return e.size();
}

// Square with a square hole; the hole edges are tagged obstacle.
Mesh square_with_hole() {
  const Mesh full = generate_rect_mesh(0.0, 0.0, 1.0, 1.0, 4, 4);
  std::vector<Triangle> cells;
  for (Index c = 0; c < full.num_cells(); ++c) {
    const auto& t = full.cell(c);
    const Vec2 g = (full.vertex(t[0]) + full.vertex(t[1]) + full.vertex(t[2])) * (1.0 / 3.0);
    if (g.x > 0.25 && g.x < 0.75 && g.y > 0.25 && g.y < 0.75) continue;
    cells.push_back(t);
  }
  return Mesh::from_cells(full.vertices(), cells, [](const Vec2& mid) {
    const bool outer = mid.x == 0.0 || mid.x == 1.0 || mid.y == 0.0 || mid.y == 1.0;
    return outer ? BoundaryTag::wall : BoundaryTag::obstacle;
  });
}

}  // namespace

TEST(Mesh, RectCountsFollowCountingFormula) {
  const Mesh m = generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, 48, 48);
  EXPECT_EQ(m.num_vertices(), 49 * 49);
  EXPECT_EQ(m.num_cells(), 2 * 48 * 48);
  EXPECT_EQ(m.boundary_edges().size(), 4u * 48);
}

TEST(Mesh, SmallestRect) {
  const Mesh m = generate_rect_mesh(0, 0, 1, 1, 1, 1);
  EXPECT_EQ(m.num_vertices(), 4);
  EXPECT_EQ(m.num_cells(), 2);
  EXPECT_EQ(m.boundary_edges().size(), 4u);
  for (const auto& b : m.boundary_edges()) EXPECT_EQ(b.tag, BoundaryTag::wall);
}

TEST(Mesh, AreaPartition) {
  const Mesh m = generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, 2, 2);
  EXPECT_NEAR(m.total_area(), 1.0, 1e-14);
  EXPECT_NEAR(m.boundary_enclosed_area(), m.total_area(), 1e-12);
}

TEST(Mesh, CellsAreCounterclockwise) {
  for (auto pat : {DiagonalPattern::right, DiagonalPattern::crossed}) {
    const Mesh m = generate_rect_mesh(0, 0, 2, 1, 5, 3, pat);
    for (Index c = 0; c < m.num_cells(); ++c) EXPECT_GT(m.cell_area(c), 0.0);
    EXPECT_NEAR(m.total_area(), 2.0, 1e-13);
  }
}

TEST(Mesh, BadParametersRejected) {
  EXPECT_THROW(generate_rect_mesh(0, 0, 1, 1, 0, 3), ParameterError);
  EXPECT_THROW(generate_rect_mesh(1, 0, 0, 1, 2, 2), ParameterError);
}

TEST(Mesh, EdgeIncidence) {
  const Mesh m = generate_rect_mesh(0, 0, 1, 1, 3, 2);
  std::size_t boundary = 0;
  for (Index e = 0; e < m.num_edges(); ++e) {
    const auto& ec = m.edge_cells(e);
    if (ec[1] < 0) ++boundary;
  }
  EXPECT_EQ(boundary, m.boundary_edges().size());
  EXPECT_EQ(static_cast<std::size_t>(m.num_edges()), count_edges(m));
}

TEST(Mesh, TrimeshRoundTripMatchesGenerated) {
  std::istringstream in(R"(trimesh 2
# unit square, two cells
4 2 4
0 0
1 0
0 1
1 1
0 1 3
0 3 2
0 1 wall
1 3 wall
3 2 wall
2 0 wall
)");
  const Mesh read = read_mesh(in);
  const Mesh gen = generate_rect_mesh(0, 0, 1, 1, 1, 1);
  EXPECT_EQ(read.num_vertices(), gen.num_vertices());
  EXPECT_EQ(read.num_cells(), gen.num_cells());
  EXPECT_NEAR(read.total_area(), gen.total_area(), 1e-15);

  std::stringstream io;
  write_mesh(io, gen);
  EXPECT_TRUE(read_mesh(io) == gen);
}

TEST(Mesh, ClockwiseCellNamed) {
  std::istringstream in("trimesh 2\n3 1 3\n0 0\n1 0\n0 1\n0 2 1\n0 2 wall\n2 1 wall\n1 0 wall\n");
  try {
    read_mesh(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.entity(), 0);
    EXPECT_NE(std::string(e.what()).find("cell 0"), std::string::npos);
  }
}

TEST(Mesh, ParseErrorCarriesLine) {
  std::istringstream in("trimesh 2\n3 1 3\n0 0\n1 zero\n0 1\n0 1 2\n0 1 wall\n1 2 wall\n2 0 wall\n");
  try {
    read_mesh(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
  std::istringstream bad_tag("trimesh 2\n3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 wall\n1 2 wal\n2 0 wall\n");
  EXPECT_THROW(read_mesh(bad_tag), ParseError);
}

TEST(Mesh, HoleMeshLoopsAndEuler) {
  const Mesh m = square_with_hole();
  EXPECT_EQ(m.num_boundary_loops(), 2);
  EXPECT_TRUE(m.has_tag(BoundaryTag::obstacle));
  // Euler characteristic of an annulus: V - E + F = 0.
  const auto edges = static_cast<Index>(count_edges(m));
  EXPECT_EQ(m.num_vertices() - edges + m.num_cells(), 0);
  EXPECT_NEAR(m.total_area(), 0.75, 1e-14);
  EXPECT_NEAR(m.boundary_enclosed_area(), m.total_area(), 1e-12);
}

TEST(Mesh, CylinderMeshFile) {
  const Mesh m = read_mesh(std::string(EMACFEM_SOURCE_DIR) + "/data/cylinder_coarse.trimesh");
  EXPECT_EQ(m.num_boundary_loops(), 2);
  for (auto tag : {BoundaryTag::wall, BoundaryTag::inflow, BoundaryTag::outflow, BoundaryTag::obstacle}) {
    EXPECT_TRUE(m.has_tag(tag)) << to_string(tag);
  }
  const auto edges = static_cast<Index>(count_edges(m));
  EXPECT_EQ(m.num_vertices() - edges + m.num_cells(), 0);
  // Channel minus a polygonal disc of radius 0.05 (inscribed, so slightly larger area).
  const double area = 2.2 * 0.41 - std::numbers::pi * 0.05 * 0.05;
  EXPECT_NEAR(m.total_area(), area, 2e-4);
  EXPECT_NEAR(m.boundary_enclosed_area(), m.total_area(), 1e-12 * area);
}

TEST(Mesh, MeshSize) {
  const MeshSize one = mesh_size(generate_rect_mesh(0, 0, 1, 1, 1, 1));
  EXPECT_DOUBLE_EQ(one.h_max, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(one.min_angle, 45.0);
  const MeshSize big = mesh_size(generate_rect_mesh(-0.5, -0.5, 0.5, 0.5, 48, 48));
  EXPECT_NEAR(big.h_min, 1.0 / 48, 1e-15);
}

TEST(Mesh, RefinementHalvesAndQuadruples) {
  const Mesh m = square_with_hole();
  const Mesh r = m.refined();
  EXPECT_EQ(r.num_cells(), 4 * m.num_cells());
  EXPECT_NEAR(r.total_area(), m.total_area(), 1e-14);
  EXPECT_NEAR(mesh_size(r).h_max, 0.5 * mesh_size(m).h_max, 1e-15);
  std::size_t obstacle = 0;
  for (const auto& b : r.boundary_edges()) obstacle += b.tag == BoundaryTag::obstacle;
  EXPECT_EQ(obstacle, 16u);
}

TEST(Mesh, RetaggedUsesEndpoints) {
  const Mesh m = generate_rect_mesh(0, 0, 1, 1, 2, 2).retagged([](const Vec2& a, const Vec2& b, BoundaryTag t) {
    return a.x == 0.0 && b.x == 0.0 ? BoundaryTag::inflow : t;
  });
  std::size_t inflow = 0;
  for (const auto& b : m.boundary_edges()) inflow += b.tag == BoundaryTag::inflow;
  EXPECT_EQ(inflow, 2u);
}
