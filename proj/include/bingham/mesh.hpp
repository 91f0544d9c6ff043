#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace bingham {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

/// Vertex triple of a cell.  Slot 0 holds the newest vertex; the refinement
/// edge is the edge opposite to it, i.e. (v[1], v[2]).
using Cell = std::array<int, 3>;

struct ElementGeometry {
  double area = 0.0;
  double h = 0.0;                       // |K|^{1/2}
  std::array<double, 3> edge_length{};  // local edge k is opposite vertex k
  std::array<Point, 3> normal{};        // outward unit normals
};

/// Conforming triangulation with newest-vertex-bisection labelling.
///
/// Value type: refinement returns a new mesh.  Edges and boundary information
/// are derived once at construction.
class Triangulation {
 public:
  Triangulation() = default;
  Triangulation(std::vector<Point> vertices, std::vector<Cell> cells,
                std::vector<int> parent = {}, std::vector<int> generation = {});

  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }

  [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
  [[nodiscard]] const Point& vertex(int i) const { return vertices_[i]; }
  [[nodiscard]] const Cell& cell(std::size_t c) const { return cells_[c]; }

  /// Edge e as a sorted vertex pair.
  [[nodiscard]] const std::array<int, 2>& edge(std::size_t e) const { return edges_[e]; }
  /// Global edge index of local edge k (opposite local vertex k) of cell c.
  [[nodiscard]] int cell_edge(std::size_t c, int k) const { return cell_edges_[c][k]; }
  /// The one or two cells adjacent to an edge; second entry is -1 on the boundary.
  [[nodiscard]] const std::array<int, 2>& edge_cells(std::size_t e) const { return edge_cells_[e]; }
  [[nodiscard]] bool is_boundary_edge(std::size_t e) const { return edge_cells_[e][1] < 0; }
  [[nodiscard]] bool is_boundary_vertex(std::size_t v) const { return boundary_vertex_[v]; }

  /// Cell index in the mesh this one was refined from (identity for a root mesh).
  [[nodiscard]] int parent(std::size_t c) const { return parent_[c]; }
  [[nodiscard]] int generation(std::size_t c) const { return generation_[c]; }

  [[nodiscard]] double signed_area(std::size_t c) const;
  [[nodiscard]] double total_area() const;
  [[nodiscard]] double min_angle() const;

  /// Barycentric coordinates of p with respect to cell c.
  [[nodiscard]] std::array<double, 3> barycentric(std::size_t c, Point p) const;

 private:
  void build_topology();

  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<int> parent_;
  std::vector<int> generation_;

  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<std::array<int, 2>> edge_cells_;
  std::vector<bool> boundary_vertex_;
};

/// (0,1)^2 split into divisions x divisions squares, each cut along the same
/// diagonal.  Refinement edges follow the longest-edge rule.
Triangulation build_structured_unit_square(int divisions);

/// Newest-vertex bisection: every marked cell is bisected once, followed by
/// the closure that removes hanging nodes.
Triangulation refine(const Triangulation& mesh, std::span<const int> marked);

ElementGeometry element_geometry(const Triangulation& mesh, std::size_t cell);

/// All cells sharing at least one vertex with `cell`, sorted, including itself.
std::vector<int> patch(const Triangulation& mesh, std::size_t cell);

/// Edge-incidence census: every edge has one or two cells, no edge is shared by
/// more, and every cell is positively oriented.
bool is_conforming(const Triangulation& mesh);

/// VTK legacy ASCII unstructured grid with optional per-cell scalars.
void write_vtk(std::ostream& os, const Triangulation& mesh,
               std::span<const double> cell_scalars = {},
               const char* cell_scalar_name = "indicator");

}  // namespace bingham
