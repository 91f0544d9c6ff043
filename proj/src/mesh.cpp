#include "bingham/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace bingham {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Rotate so the longest edge is opposite slot 0; ties go to the lowest
// opposite-vertex index.  Rotation keeps the orientation.
Cell label_longest_edge(const Cell& c, const std::vector<Point>& v) {
  int best = 0;
  double best_len = -1.0;
  for (int k = 0; k < 3; ++k) {
    const double len = dist(v[c[(k + 1) % 3]], v[c[(k + 2) % 3]]);
    const bool longer = len > best_len * (1.0 + 1e-12);
    const bool tie = std::abs(len - best_len) <= 1e-12 * best_len;
    if (longer || (tie && c[k] < c[best])) {
      best = k;
      best_len = len;
    }
  }
  return {c[best], c[(best + 1) % 3], c[(best + 2) % 3]};
}

}  // namespace

Triangulation::Triangulation(std::vector<Point> vertices, std::vector<Cell> cells,
                             std::vector<int> parent, std::vector<int> generation)
    : vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      parent_(std::move(parent)),
      generation_(std::move(generation)) {
  if (parent_.empty()) {
    parent_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) parent_[c] = static_cast<int>(c);
  }
  if (generation_.empty()) generation_.assign(cells_.size(), 0);
  if (parent_.size() != cells_.size() || generation_.size() != cells_.size())
    throw std::invalid_argument("Triangulation: lineage arrays do not match cell count");
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int v : cells_[c])
      if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size())
        throw std::out_of_range("Triangulation: cell " + std::to_string(c) +
                                " references vertex " + std::to_string(v));
    if (signed_area(c) <= 0.0)
      throw std::invalid_argument("Triangulation: cell " + std::to_string(c) +
                                  " is not positively oriented");
  }
  build_topology();
}

void Triangulation::build_topology() {
  struct Half {
    std::uint64_t key;
    int cell;
    int local;
  };
  std::vector<Half> halves;
  halves.reserve(3 * cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c)
    for (int k = 0; k < 3; ++k)
      halves.push_back({edge_key(cells_[c][(k + 1) % 3], cells_[c][(k + 2) % 3]),
                        static_cast<int>(c), k});
  std::sort(halves.begin(), halves.end(), [](const Half& a, const Half& b) {
    return a.key != b.key ? a.key < b.key : a.cell < b.cell;
  });

  edges_.clear();
  edge_cells_.clear();
  cell_edges_.assign(cells_.size(), {-1, -1, -1});
  for (std::size_t i = 0; i < halves.size();) {
    std::size_t j = i;
    while (j < halves.size() && halves[j].key == halves[i].key) ++j;
    if (j - i > 2)
      throw std::invalid_argument("Triangulation: edge shared by more than two cells");
    const int e = static_cast<int>(edges_.size());
    edges_.push_back({static_cast<int>(halves[i].key >> 32),
                      static_cast<int>(halves[i].key & 0xffffffffu)});
    edge_cells_.push_back({halves[i].cell, j - i == 2 ? halves[i + 1].cell : -1});
    for (std::size_t h = i; h < j; ++h) cell_edges_[halves[h].cell][halves[h].local] = e;
    i = j;
  }

  boundary_vertex_.assign(vertices_.size(), false);
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edge_cells_[e][1] < 0) {
      boundary_vertex_[edges_[e][0]] = true;
      boundary_vertex_[edges_[e][1]] = true;
    }
}

double Triangulation::signed_area(std::size_t c) const {
  const Point& a = vertices_[cells_[c][0]];
  const Point& b = vertices_[cells_[c][1]];
  const Point& d = vertices_[cells_[c][2]];
  return 0.5 * ((b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y));
}

double Triangulation::total_area() const {
  double s = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) s += signed_area(c);
  return s;
}

double Triangulation::min_angle() const {
  double amin = std::numbers::pi;
  for (const Cell& c : cells_) {
    for (int k = 0; k < 3; ++k) {
      const Point p = vertices_[c[k]];
      const Point u = vertices_[c[(k + 1) % 3]] - p;
      const Point w = vertices_[c[(k + 2) % 3]] - p;
      const double cosang =
          (u.x * w.x + u.y * w.y) / (std::hypot(u.x, u.y) * std::hypot(w.x, w.y));
      amin = std::min(amin, std::acos(std::clamp(cosang, -1.0, 1.0)));
    }
  }
  return amin;
}

std::array<double, 3> Triangulation::barycentric(std::size_t c, Point p) const {
  const Point& a = vertices_[cells_[c][0]];
  const Point& b = vertices_[cells_[c][1]];
  const Point& d = vertices_[cells_[c][2]];
  const double det = (b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y);
  const double l1 = ((p.x - a.x) * (d.y - a.y) - (d.x - a.x) * (p.y - a.y)) / det;
  const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
  return {1.0 - l1 - l2, l1, l2};
}

Triangulation build_structured_unit_square(int divisions) {
  if (divisions < 1) throw std::invalid_argument("build_structured_unit_square: divisions must be >= 1");
  const int n = divisions;
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      cells.push_back(label_longest_edge({a, b, c}, vertices));
      cells.push_back(label_longest_edge({a, c, d}, vertices));
    }
  }
  return Triangulation(std::move(vertices), std::move(cells));
}

Triangulation refine(const Triangulation& mesh, std::span<const int> marked) {
  const std::size_t num_edges = mesh.num_edges();
  std::vector<char> bisect(num_edges, 0);
  std::vector<int> queue;
  for (int c : marked) {
    if (c < 0 || static_cast<std::size_t>(c) >= mesh.num_cells())
      throw std::out_of_range("refine: marked cell " + std::to_string(c) + " out of range");
    const int e = mesh.cell_edge(c, 0);
    if (!bisect[e]) {
      bisect[e] = 1;
      queue.push_back(e);
    }
  }

  // Closure: a cell with any bisected edge must have its refinement edge bisected.
  while (!queue.empty()) {
    const int e = queue.back();
    queue.pop_back();
    for (int c : mesh.edge_cells(e)) {
      if (c < 0) continue;
      const int r = mesh.cell_edge(c, 0);
      if (!bisect[r]) {
        bisect[r] = 1;
        queue.push_back(r);
      }
    }
  }

  std::vector<Point> vertices = mesh.vertices();
  std::unordered_map<std::uint64_t, int> midpoint;
  for (std::size_t e = 0; e < num_edges; ++e) {
    if (!bisect[e]) continue;
    const auto [a, b] = mesh.edge(e);
    midpoint.emplace(edge_key(a, b), static_cast<int>(vertices.size()));
    vertices.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
  }

  std::vector<Cell> cells;
  std::vector<int> parent;
  std::vector<int> generation;
  cells.reserve(mesh.num_cells() + 2 * midpoint.size());

  // Children of a bisected cell have original edges as refinement edges, and
  // grandchildren have edges created in this pass, so recursion stops at depth 2.
  auto split = [&](auto&& self, const Cell& t, int root, int gen) -> void {
    const auto it = midpoint.find(edge_key(t[1], t[2]));
    if (it == midpoint.end()) {
      cells.push_back(t);
      parent.push_back(root);
      generation.push_back(gen);
      return;
    }
    const int m = it->second;
    self(self, Cell{m, t[0], t[1]}, root, gen + 1);
    self(self, Cell{m, t[2], t[0]}, root, gen + 1);
  };
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    split(split, mesh.cell(c), static_cast<int>(c), mesh.generation(c));

  return Triangulation(std::move(vertices), std::move(cells), std::move(parent),
                       std::move(generation));
}

ElementGeometry element_geometry(const Triangulation& mesh, std::size_t cell) {
  ElementGeometry g;
  g.area = mesh.signed_area(cell);
  g.h = std::sqrt(g.area);
  const Cell& c = mesh.cell(cell);
  for (int k = 0; k < 3; ++k) {
    const Point a = mesh.vertex(c[(k + 1) % 3]);
    const Point b = mesh.vertex(c[(k + 2) % 3]);
    const double len = dist(a, b);
    g.edge_length[k] = len;
    // Counter-clockwise orientation: the outward normal of a->b is (dy, -dx).
    g.normal[k] = {(b.y - a.y) / len, -(b.x - a.x) / len};
  }
  return g;
}

std::vector<int> patch(const Triangulation& mesh, std::size_t cell) {
  // Vertex-to-cell incidence is not stored; a linear scan is fine for the
  // query sizes this is used with.
  const Cell& k = mesh.cell(cell);
  std::vector<int> out;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Cell& o = mesh.cell(c);
    bool shares = false;
    for (int a : o)
      for (int b : k) shares = shares || a == b;
    if (shares) out.push_back(static_cast<int>(c));
  }
  return out;
}

bool is_conforming(const Triangulation& mesh) {
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    if (mesh.signed_area(c) <= 0.0) return false;
  // Hanging nodes break the Euler characteristic of a simply connected domain
  // and leave boundary vertices with more than two boundary edges.
  const long euler = static_cast<long>(mesh.num_vertices()) - static_cast<long>(mesh.num_edges()) +
                     static_cast<long>(mesh.num_cells());
  if (euler != 1) return false;
  std::vector<int> boundary_degree(mesh.num_vertices(), 0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    ++boundary_degree[mesh.edge(e)[0]];
    ++boundary_degree[mesh.edge(e)[1]];
  }
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (boundary_degree[v] != 0 && boundary_degree[v] != 2) return false;
  return true;
}

void write_vtk(std::ostream& os, const Triangulation& mesh, std::span<const double> cell_scalars,
               const char* cell_scalar_name) {
  os << "# vtk DataFile Version 3.0\n"
     << "bingham mesh\n"
     << "ASCII\n"
     << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  os.precision(17);
  for (const Point& p : mesh.vertices()) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (const Cell& c : mesh.cells()) os << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) os << "5\n";
  if (!cell_scalars.empty()) {
    if (cell_scalars.size() != mesh.num_cells())
      throw std::invalid_argument("write_vtk: cell data size mismatch");
    os << "CELL_DATA " << mesh.num_cells() << '\n'
       << "SCALARS " << cell_scalar_name << " double 1\n"
       << "LOOKUP_TABLE default\n";
    for (double v : cell_scalars) os << v << '\n';
  }
}

}  // namespace bingham
