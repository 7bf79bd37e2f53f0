#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emacfem/common.hpp"

namespace emacfem {

enum class BoundaryTag { wall, inflow, outflow, obstacle, free };

inline constexpr std::array<BoundaryTag, 5> kAllBoundaryTags{
    BoundaryTag::wall, BoundaryTag::inflow, BoundaryTag::outflow, BoundaryTag::obstacle,
    BoundaryTag::free};

inline std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::wall: return "wall";
    case BoundaryTag::inflow: return "inflow";
    case BoundaryTag::outflow: return "outflow";
    case BoundaryTag::obstacle: return "obstacle";
    case BoundaryTag::free: return "free";
  }
  return "?";
}

inline std::optional<BoundaryTag> parse_boundary_tag(std::string_view s) {
  for (auto tag : kAllBoundaryTags) {
    if (to_string(tag) == s) return tag;
  }
  return std::nullopt;
}

using Triangle = std::array<Index, 3>;

struct BoundaryEdge {
  std::array<Index, 2> vertices;
  BoundaryTag tag;
};

/// Conforming triangulation of a polygonal domain.
///
/// Construction validates every invariant and throws ValidationError naming
/// the first offending entity. A Mesh is never modified afterwards;
/// refinement and retagging return new meshes.
///
/// Local edge k of a cell joins local vertices k and (k+1)%3.
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<Triangle> cells, std::vector<BoundaryEdge> boundary)
      : vertices_(std::move(vertices)), cells_(std::move(cells)), boundary_(std::move(boundary)) {
    validate_and_connect();
  }

  /// Mesh whose boundary is every edge with a single cell, tagged by
  /// `tag_of(edge midpoint)`. Vertices not referenced by any cell are dropped.
  static Mesh from_cells(const std::vector<Vec2>& vertices, const std::vector<Triangle>& cells,
                         const std::function<BoundaryTag(const Vec2&)>& tag_of) {
    std::vector<Index> remap(vertices.size(), -1);
    std::vector<Vec2> used;
    std::vector<Triangle> renumbered = cells;
    for (auto& t : renumbered) {
      for (auto& v : t) {
        if (v < 0 || v >= static_cast<Index>(vertices.size())) throw ValidationError("cell vertex out of range");
        if (remap[v] < 0) {
          remap[v] = static_cast<Index>(used.size());
          used.push_back(vertices[v]);
        }
        v = remap[v];
      }
    }
    std::map<std::pair<Index, Index>, int> count;
    for (const auto& t : renumbered) {
      for (int k = 0; k < 3; ++k) {
        auto key = std::minmax(t[k], t[(k + 1) % 3]);
        ++count[{key.first, key.second}];
      }
    }
    std::vector<BoundaryEdge> bnd;
    for (const auto& t : renumbered) {
      for (int k = 0; k < 3; ++k) {
        Index a = t[k], b = t[(k + 1) % 3];
        auto key = std::minmax(a, b);
        if (count[{key.first, key.second}] == 1) bnd.push_back({{a, b}, tag_of(0.5 * (used[a] + used[b]))});
      }
    }
    return Mesh(std::move(used), std::move(renumbered), std::move(bnd));
  }

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_cells() const { return static_cast<Index>(cells_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& cells() const { return cells_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const std::vector<std::array<Index, 2>>& edges() const { return edges_; }

  const Vec2& vertex(Index v) const { return vertices_[v]; }
  const Triangle& cell(Index c) const { return cells_[c]; }
  const std::array<Index, 3>& cell_edges(Index c) const { return cell_edges_[c]; }

  /// Cells on either side of an edge; the second entry is -1 on the boundary.
  const std::array<Index, 2>& edge_cells(Index e) const { return edge_cells_[e]; }

  /// Mesh edge index of boundary edge `b`.
  Index boundary_edge_index(Index b) const { return boundary_edge_ids_[b]; }
  /// Owning cell and local edge number of boundary edge `b`.
  std::pair<Index, int> boundary_edge_cell(Index b) const { return boundary_owner_[b]; }

  double cell_area(Index c) const {
    const auto& t = cells_[c];
    return 0.5 * cross(vertices_[t[1]] - vertices_[t[0]], vertices_[t[2]] - vertices_[t[0]]);
  }

  double total_area() const {
    double a = 0.0;
    for (Index c = 0; c < num_cells(); ++c) a += cell_area(c);
    return a;
  }

  /// Boundary edge endpoints in the orientation induced by the owning cell,
  /// so that the domain lies to the left.
  std::pair<Vec2, Vec2> oriented_boundary_edge(Index b) const {
    auto [c, k] = boundary_owner_[b];
    const auto& t = cells_[c];
    return {vertices_[t[k]], vertices_[t[(k + 1) % 3]]};
  }

  /// Unit outward normal of boundary edge `b`.
  Vec2 outward_normal(Index b) const {
    auto [p, q] = oriented_boundary_edge(b);
    Vec2 d = q - p;
    double len = norm(d);
    return {d.y / len, -d.x / len};
  }

  /// Area enclosed by the boundary loops (Green's formula); equals
  /// total_area() for a valid mesh.
  double boundary_enclosed_area() const {
    double a = 0.0;
    for (Index b = 0; b < static_cast<Index>(boundary_.size()); ++b) {
      auto [p, q] = oriented_boundary_edge(b);
      a += 0.5 * cross(p, q);
    }
    return a;
  }

  /// Number of closed boundary loops.
  int num_boundary_loops() const {
    std::vector<Index> parent(vertices_.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<Index>(i);
    std::function<Index(Index)> find = [&](Index i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    std::vector<char> on_boundary(vertices_.size(), 0);
    for (const auto& be : boundary_) {
      on_boundary[be.vertices[0]] = on_boundary[be.vertices[1]] = 1;
      parent[find(be.vertices[0])] = find(be.vertices[1]);
    }
    int loops = 0;
    for (std::size_t i = 0; i < parent.size(); ++i) {
      if (on_boundary[i] && find(static_cast<Index>(i)) == static_cast<Index>(i)) ++loops;
    }
    return loops;
  }

  /// Uniform red refinement: every triangle splits into four.
  Mesh refined() const {
    std::vector<Vec2> verts = vertices_;
    for (const auto& e : edges_) verts.push_back(0.5 * (vertices_[e[0]] + vertices_[e[1]]));
    const Index nv = num_vertices();
    std::vector<Triangle> cells;
    cells.reserve(cells_.size() * 4);
    for (Index c = 0; c < num_cells(); ++c) {
      const auto& t = cells_[c];
      const auto& ce = cell_edges_[c];
      Index m01 = nv + ce[0], m12 = nv + ce[1], m20 = nv + ce[2];
      cells.push_back({t[0], m01, m20});
      cells.push_back({m01, t[1], m12});
      cells.push_back({m20, m12, t[2]});
      cells.push_back({m01, m12, m20});
    }
    std::vector<BoundaryEdge> bnd;
    bnd.reserve(boundary_.size() * 2);
    for (Index b = 0; b < static_cast<Index>(boundary_.size()); ++b) {
      Index m = nv + boundary_edge_ids_[b];
      bnd.push_back({{boundary_[b].vertices[0], m}, boundary_[b].tag});
      bnd.push_back({{m, boundary_[b].vertices[1]}, boundary_[b].tag});
    }
    return Mesh(std::move(verts), std::move(cells), std::move(bnd));
  }

  /// Copy with boundary tags reassigned from the edge endpoints.
  Mesh retagged(const std::function<BoundaryTag(const Vec2&, const Vec2&, BoundaryTag)>& rule) const {
    auto bnd = boundary_;
    for (auto& be : bnd) be.tag = rule(vertices_[be.vertices[0]], vertices_[be.vertices[1]], be.tag);
    return Mesh(vertices_, cells_, std::move(bnd));
  }

  bool has_tag(BoundaryTag tag) const {
    return std::any_of(boundary_.begin(), boundary_.end(), [&](const auto& be) { return be.tag == tag; });
  }

  friend bool operator==(const Mesh& a, const Mesh& b) {
    if (a.vertices_ != b.vertices_ || a.cells_ != b.cells_ || a.boundary_.size() != b.boundary_.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.boundary_.size(); ++i) {
      if (a.boundary_[i].vertices != b.boundary_[i].vertices || a.boundary_[i].tag != b.boundary_[i].tag) {
        return false;
      }
    }
    return true;
  }

 private:
  void validate_and_connect() {
    const Index nv = num_vertices();
    if (cells_.empty()) throw ValidationError("mesh has no cells");
    for (Index c = 0; c < num_cells(); ++c) {
      for (Index v : cells_[c]) {
        if (v < 0 || v >= nv) {
          throw ValidationError("cell " + std::to_string(c) + " references vertex " + std::to_string(v) +
                                    " out of range",
                                c);
        }
      }
      if (!(cell_area(c) > 0.0)) {
        throw ValidationError("cell " + std::to_string(c) + " has non-positive signed area (clockwise or degenerate)",
                              c);
      }
    }

    std::map<std::pair<Index, Index>, Index> edge_id;
    cell_edges_.resize(cells_.size());
    for (Index c = 0; c < num_cells(); ++c) {
      for (int k = 0; k < 3; ++k) {
        Index a = cells_[c][k], b = cells_[c][(k + 1) % 3];
        auto key = std::minmax(a, b);
        auto [it, inserted] = edge_id.try_emplace({key.first, key.second}, num_edges());
        if (inserted) {
          edges_.push_back({key.first, key.second});
          edge_cells_.push_back({c, -1});
          edge_owner_.push_back({c, k});
        } else {
          auto& ec = edge_cells_[it->second];
          if (ec[1] != -1) {
            throw ValidationError("edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                                      ") is shared by more than two cells",
                                  it->second);
          }
          ec[1] = c;
        }
        cell_edges_[c][k] = it->second;
      }
    }

    std::vector<int> tag_count(edges_.size(), 0);
    boundary_edge_ids_.resize(boundary_.size());
    boundary_owner_.resize(boundary_.size());
    for (Index b = 0; b < static_cast<Index>(boundary_.size()); ++b) {
      auto [v0, v1] = boundary_[b].vertices;
      if (v0 < 0 || v0 >= nv || v1 < 0 || v1 >= nv) {
        throw ValidationError("boundary edge " + std::to_string(b) + " references a vertex out of range", b);
      }
      auto key = std::minmax(v0, v1);
      auto it = edge_id.find({key.first, key.second});
      if (it == edge_id.end()) {
        throw ValidationError("boundary edge " + std::to_string(b) + " is not an edge of any cell", b);
      }
      if (edge_cells_[it->second][1] != -1) {
        throw ValidationError("boundary edge " + std::to_string(b) + " is an interior edge", b);
      }
      if (++tag_count[it->second] > 1) {
        throw ValidationError("boundary edge " + std::to_string(b) + " is tagged more than once", b);
      }
      boundary_edge_ids_[b] = it->second;
      boundary_owner_[b] = edge_owner_[it->second];
    }

    std::vector<int> degree(vertices_.size(), 0);
    for (Index e = 0; e < num_edges(); ++e) {
      if (edge_cells_[e][1] == -1) {
        if (tag_count[e] == 0) {
          throw ValidationError("boundary edge (" + std::to_string(edges_[e][0]) + "," +
                                    std::to_string(edges_[e][1]) + ") carries no tag",
                                e);
        }
        ++degree[edges_[e][0]];
        ++degree[edges_[e][1]];
      }
    }
    for (Index v = 0; v < nv; ++v) {
      if (degree[v] != 0 && degree[v] != 2) {
        throw ValidationError("boundary is not a union of closed simple loops at vertex " + std::to_string(v), v);
      }
    }
  }

  std::vector<Vec2> vertices_;
  std::vector<Triangle> cells_;
  std::vector<BoundaryEdge> boundary_;

  std::vector<std::array<Index, 2>> edges_;
  std::vector<std::array<Index, 3>> cell_edges_;
  std::vector<std::array<Index, 2>> edge_cells_;
  std::vector<std::pair<Index, int>> edge_owner_;
  std::vector<Index> boundary_edge_ids_;
  std::vector<std::pair<Index, int>> boundary_owner_;
};

enum class DiagonalPattern {
  /// Each quad split along its lower-left to upper-right diagonal.
  right,
  /// Each quad split into four triangles around its center.
  crossed,
};

/// Structured triangulation of [x0,x1]x[y0,y1]; all boundary edges tagged `wall`.
inline Mesh generate_rect_mesh(double x0, double y0, double x1, double y1, Index nx, Index ny,
                               DiagonalPattern pattern = DiagonalPattern::right) {
  if (nx < 1 || ny < 1) throw ParameterError("generate_rect_mesh: cell counts must be >= 1");
  if (!(x1 > x0) || !(y1 > y0)) throw ParameterError("generate_rect_mesh: require x1 > x0 and y1 > y0");

  std::vector<Vec2> verts;
  verts.reserve((nx + 1) * (ny + 1));
  // Interpolate from both ends so the far boundary lands exactly on x1/y1.
  auto coord = [](double lo, double hi, Index i, Index n) {
    return i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
  };
  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) verts.push_back({coord(x0, x1, i, nx), coord(y0, y1, j, ny)});
  }
  auto id = [&](Index i, Index j) { return j * (nx + 1) + i; };

  std::vector<Triangle> cells;
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      Index a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if (pattern == DiagonalPattern::right) {
        cells.push_back({a, b, c});
        cells.push_back({a, c, d});
      } else {
        Index m = static_cast<Index>(verts.size());
        verts.push_back(0.25 * (verts[a] + verts[b] + verts[c] + verts[d]));
        cells.push_back({a, b, m});
        cells.push_back({b, c, m});
        cells.push_back({c, d, m});
        cells.push_back({d, a, m});
      }
    }
  }

  std::vector<BoundaryEdge> bnd;
  for (Index i = 0; i < nx; ++i) bnd.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::wall});
  for (Index j = 0; j < ny; ++j) bnd.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::wall});
  for (Index i = nx; i > 0; --i) bnd.push_back({{id(i, ny), id(i - 1, ny)}, BoundaryTag::wall});
  for (Index j = ny; j > 0; --j) bnd.push_back({{id(0, j), id(0, j - 1)}, BoundaryTag::wall});
  return Mesh(std::move(verts), std::move(cells), std::move(bnd));
}

struct MeshSize {
  double h_max;
  double h_min;
  /// Smallest interior angle, in degrees.
  double min_angle;
};

inline MeshSize mesh_size(const Mesh& mesh) {
  MeshSize s{0.0, std::numeric_limits<double>::infinity(), 180.0};
  for (const auto& e : mesh.edges()) {
    double len = norm(mesh.vertex(e[1]) - mesh.vertex(e[0]));
    s.h_max = std::max(s.h_max, len);
    s.h_min = std::min(s.h_min, len);
  }
  for (const auto& t : mesh.cells()) {
    for (int k = 0; k < 3; ++k) {
      Vec2 p = mesh.vertex(t[k]);
      Vec2 a = mesh.vertex(t[(k + 1) % 3]) - p;
      Vec2 b = mesh.vertex(t[(k + 2) % 3]) - p;
      double ang = std::atan2(std::abs(cross(a, b)), dot(a, b)) * 180.0 / std::numbers::pi;
      s.min_angle = std::min(s.min_angle, ang);
    }
  }
  return s;
}

// TRIMESH: "trimesh 2", counts "nv nc nb", then vertices, cells, tagged
// boundary edges. 0-based indices; '#' starts a comment.

inline Mesh read_mesh(std::istream& in) {
  int lineno = 0;
  std::vector<std::string> tokens;
  std::vector<int> token_line;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      tokens.push_back(tok);
      token_line.push_back(lineno);
    }
  }
  std::size_t pos = 0;
  auto line_of = [&](std::size_t p) { return p < token_line.size() ? token_line[p] : lineno; };
  auto next = [&](const char* what) -> const std::string& {
    if (pos >= tokens.size()) throw ParseError(std::string("unexpected end of file, expected ") + what, lineno);
    return tokens[pos++];
  };
  auto next_int = [&](const char* what) {
    const auto& s = next(what);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ParseError(std::string("expected integer ") + what + ", got '" + s + "'", line_of(pos - 1));
    return static_cast<Index>(v);
  };
  auto next_double = [&](const char* what) {
    const auto& s = next(what);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ParseError(std::string("expected number ") + what + ", got '" + s + "'", line_of(pos - 1));
    return v;
  };

  if (next("header") != "trimesh") throw ParseError("missing 'trimesh' header", line_of(0));
  if (next_int("format version") != 2) throw ParseError("unsupported trimesh version", line_of(1));
  Index nv = next_int("vertex count"), nc = next_int("cell count"), nb = next_int("boundary edge count");
  if (nv < 0 || nc < 0 || nb < 0) throw ParseError("negative count", line_of(pos - 1));

  std::vector<Vec2> verts(nv);
  for (auto& v : verts) {
    v.x = next_double("x");
    v.y = next_double("y");
  }
  std::vector<Triangle> cells(nc);
  for (auto& c : cells) {
    for (auto& v : c) v = next_int("cell vertex");
  }
  std::vector<BoundaryEdge> bnd(nb);
  for (auto& b : bnd) {
    b.vertices[0] = next_int("edge vertex");
    b.vertices[1] = next_int("edge vertex");
    const auto& tag = next("tag");
    auto parsed = parse_boundary_tag(tag);
    if (!parsed) throw ParseError("unknown boundary tag '" + tag + "'", line_of(pos - 1));
    b.tag = *parsed;
  }
  if (pos != tokens.size()) throw ParseError("trailing data after boundary edges", line_of(pos));
  return Mesh(std::move(verts), std::move(cells), std::move(bnd));
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

inline void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "trimesh 2\n" << mesh.num_vertices() << ' ' << mesh.num_cells() << ' ' << mesh.boundary_edges().size() << '\n';
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << '\n';
  for (const auto& c : mesh.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  for (const auto& b : mesh.boundary_edges()) {
    out << b.vertices[0] << ' ' << b.vertices[1] << ' ' << to_string(b.tag) << '\n';
  }
}

inline void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path + "'");
  write_mesh(out, mesh);
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace emacfem
