#include "bingham/femspace.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace bingham {

namespace {

std::array<Point, 3> barycentric_gradients(const Triangulation& mesh, std::size_t c, double& area) {
  const Cell& v = mesh.cell(c);
  const Point p0 = mesh.vertex(v[0]);
  const Point p1 = mesh.vertex(v[1]);
  const Point p2 = mesh.vertex(v[2]);
  area = mesh.signed_area(c);
  const double s = 1.0 / (2.0 * area);
  return {Point{s * (p1.y - p2.y), s * (p2.x - p1.x)},
          Point{s * (p2.y - p0.y), s * (p0.x - p2.x)},
          Point{s * (p0.y - p1.y), s * (p1.x - p0.x)}};
}

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

}  // namespace

void p2_basis(const std::array<double, 3>& l, const std::array<Point, 3>& gl,
              std::array<double, 6>& phi, std::array<Point, 6>& dphi) {
  for (int i = 0; i < 3; ++i) {
    phi[i] = l[i] * (2.0 * l[i] - 1.0);
    dphi[i] = (4.0 * l[i] - 1.0) * gl[i];
  }
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3;
    const int b = (k + 2) % 3;
    phi[3 + k] = 4.0 * l[a] * l[b];
    dphi[3 + k] = 4.0 * (l[a] * gl[b] + l[b] * gl[a]);
  }
}

TaylorHoodSpace::TaylorHoodSpace(std::shared_ptr<const Triangulation> mesh,
                                 const VectorFunction& dirichlet)
    : mesh_(std::move(mesh)) {
  if (!mesh_) throw std::invalid_argument("TaylorHoodSpace: null mesh");
  const int nv = static_cast<int>(mesh_->num_vertices());
  const int ne = static_cast<int>(mesh_->num_edges());
  num_nodes_ = nv + ne;

  boundary_node_.assign(num_nodes_, false);
  for (int v = 0; v < nv; ++v) boundary_node_[v] = mesh_->is_boundary_vertex(v);
  for (int e = 0; e < ne; ++e) boundary_node_[nv + e] = mesh_->is_boundary_edge(e);

  dirichlet_mask_.assign(2 * num_nodes_, false);
  for (int comp = 0; comp < 2; ++comp) {
    for (int node = 0; node < num_nodes_; ++node) {
      if (!boundary_node_[node]) continue;
      const Vec2 g = dirichlet ? dirichlet(node_point(node)) : Vec2{0.0, 0.0};
      dirichlet_dofs_.push_back(velocity_dof(node, comp));
      dirichlet_values_.push_back(g[comp]);
      dirichlet_mask_[velocity_dof(node, comp)] = true;
    }
  }
  // Flux functional of the P2 trace: Simpson on each boundary edge is exact.
  std::vector<int> position(2 * num_nodes_, -1);
  for (std::size_t i = 0; i < dirichlet_dofs_.size(); ++i) position[dirichlet_dofs_[i]] = static_cast<int>(i);
  flux_weights_.assign(dirichlet_dofs_.size(), 0.0);
  for (int e = 0; e < ne; ++e) {
    if (!mesh_->is_boundary_edge(e)) continue;
    const auto [a, b] = mesh_->edge(e);
    const Point pa = mesh_->vertex(a), pb = mesh_->vertex(b);
    Point n{pb.y - pa.y, pa.x - pb.x};  // length |e|
    const Cell& c = mesh_->cell(mesh_->edge_cells(e)[0]);
    const int third = c[0] != a && c[0] != b ? c[0] : (c[1] != a && c[1] != b ? c[1] : c[2]);
    if (dot(n, mesh_->vertex(third) - pa) > 0.0) n = -1.0 * n;
    const std::array<std::pair<int, double>, 3> nodes{{{a, 1.0 / 6.0}, {b, 1.0 / 6.0}, {nv + e, 4.0 / 6.0}}};
    for (const auto& [node, w] : nodes) {
      flux_weights_[position[velocity_dof(node, 0)]] += w * n.x;
      flux_weights_[position[velocity_dof(node, 1)]] += w * n.y;
    }
  }
  double flux = 0.0, scale = 0.0, norm2 = 0.0, gmax = 0.0;
  for (std::size_t i = 0; i < dirichlet_values_.size(); ++i) {
    flux += flux_weights_[i] * dirichlet_values_[i];
    scale += std::abs(flux_weights_[i] * dirichlet_values_[i]);
    gmax = std::max(gmax, std::abs(dirichlet_values_[i]));
  }
  // roundoff-level data (a profile evaluated at a wall) counts as no-slip
  const auto carries_data = [&](std::size_t i) { return std::abs(dirichlet_values_[i]) > 1e-12 * gmax; };
  for (std::size_t i = 0; i < dirichlet_values_.size(); ++i)
    if (carries_data(i)) norm2 += flux_weights_[i] * flux_weights_[i];
  interpolation_flux_ = flux;
  if (std::abs(flux) > 1e-14 * scale && norm2 > 0.0)
    for (std::size_t i = 0; i < dirichlet_values_.size(); ++i)
      if (carries_data(i)) dirichlet_values_[i] -= flux * flux_weights_[i] / norm2;

  for (int d = 0; d < 2 * num_nodes_; ++d)
    if (!dirichlet_mask_[d]) free_dofs_.push_back(d);
  for (int node = 0; node < num_nodes_; ++node)
    if (!boundary_node_[node]) free_nodes_.push_back(node);
}

double TaylorHoodSpace::boundary_flux() const {
  double flux = 0.0;
  for (std::size_t i = 0; i < dirichlet_values_.size(); ++i) flux += flux_weights_[i] * dirichlet_values_[i];
  return flux;
}

std::array<int, 6> TaylorHoodSpace::cell_nodes(std::size_t cell) const {
  const Cell& v = mesh_->cell(cell);
  const int nv = static_cast<int>(mesh_->num_vertices());
  return {v[0], v[1], v[2], nv + mesh_->cell_edge(cell, 0), nv + mesh_->cell_edge(cell, 1),
          nv + mesh_->cell_edge(cell, 2)};
}

Point TaylorHoodSpace::node_point(int node) const {
  const int nv = static_cast<int>(mesh_->num_vertices());
  if (node < nv) return mesh_->vertex(node);
  const auto& e = mesh_->edge(node - nv);
  return 0.5 * (mesh_->vertex(e[0]) + mesh_->vertex(e[1]));
}

void TaylorHoodSpace::apply_dirichlet(Vector& u) const {
  for (std::size_t i = 0; i < dirichlet_dofs_.size(); ++i) u[dirichlet_dofs_[i]] = dirichlet_values_[i];
}

void TaylorHoodSpace::zero_dirichlet(Vector& u) const {
  for (int d : dirichlet_dofs_) u[d] = 0.0;
}

ElementData TaylorHoodSpace::element(std::size_t cell) const {
  ElementData e;
  e.cell = static_cast<int>(cell);
  e.grad_lambda = barycentric_gradients(*mesh_, cell, e.area);
  e.nodes = cell_nodes(cell);
  const Cell& v = mesh_->cell(cell);
  e.vertices = {v[0], v[1], v[2]};
  const Point p0 = mesh_->vertex(v[0]);
  const Point p1 = mesh_->vertex(v[1]);
  const Point p2 = mesh_->vertex(v[2]);
  for (int q = 0; q < kNumQuad; ++q) {
    const QuadPoint& qp = kTriangleRule[q];
    const std::array<double, 3> l{1.0 - qp.l1 - qp.l2, qp.l1, qp.l2};
    e.lambda[q] = l;
    e.x[q] = l[0] * p0 + l[1] * p1 + l[2] * p2;
    e.jw[q] = 2.0 * e.area * qp.weight;
    p2_basis(l, e.grad_lambda, e.phi[q], e.dphi[q]);
  }
  return e;
}

FieldPair boundary_lift(const TaylorHoodSpace& space) {
  FieldPair f{Vector::Zero(space.num_velocity_dofs()), Vector::Zero(space.num_pressure_dofs())};
  space.apply_dirichlet(f.u);
  return f;
}

Vector interpolate_velocity(const TaylorHoodSpace& space, const VectorFunction& f) {
  Vector u(space.num_velocity_dofs());
  for (int node = 0; node < space.num_nodes(); ++node) {
    const Vec2 val = f(space.node_point(node));
    u[space.velocity_dof(node, 0)] = val[0];
    u[space.velocity_dof(node, 1)] = val[1];
  }
  return u;
}

Vector interpolate_pressure(const TaylorHoodSpace& space, const ScalarFunction& f) {
  Vector p(space.num_pressure_dofs());
  for (int v = 0; v < space.num_pressure_dofs(); ++v) p[v] = f(space.mesh().vertex(v));
  return p;
}

Vec2 evaluate_velocity(const TaylorHoodSpace& space, const Vector& u, std::size_t cell,
                       const std::array<double, 3>& bary) {
  double area = 0.0;
  const auto gl = barycentric_gradients(space.mesh(), cell, area);
  std::array<double, 6> phi{};
  std::array<Point, 6> dphi{};
  p2_basis(bary, gl, phi, dphi);
  const auto nodes = space.cell_nodes(cell);
  Vec2 r{0.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    r[0] += phi[i] * u[space.velocity_dof(nodes[i], 0)];
    r[1] += phi[i] * u[space.velocity_dof(nodes[i], 1)];
  }
  return r;
}

double evaluate_pressure(const TaylorHoodSpace& space, const Vector& p, std::size_t cell,
                         const std::array<double, 3>& bary) {
  const Cell& v = space.mesh().cell(cell);
  return bary[0] * p[v[0]] + bary[1] * p[v[1]] + bary[2] * p[v[2]];
}

Grad2 velocity_gradient(const ElementData& e, const Vector& u, int num_nodes, int q) {
  Grad2 g;
  for (int i = 0; i < 6; ++i) {
    const double ux = u[e.nodes[i]];
    const double uy = u[num_nodes + e.nodes[i]];
    const Point d = e.dphi[q][i];
    g.xx += ux * d.x;
    g.xy += ux * d.y;
    g.yx += uy * d.x;
    g.yy += uy * d.y;
  }
  return g;
}

Vec2 velocity_value(const ElementData& e, const Vector& u, int num_nodes, int q) {
  Vec2 r{0.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    r[0] += e.phi[q][i] * u[e.nodes[i]];
    r[1] += e.phi[q][i] * u[num_nodes + e.nodes[i]];
  }
  return r;
}

SparseMatrix assemble_scalar_stiffness(const TaylorHoodSpace& space) {
  const int nn = space.num_nodes();
  std::vector<Triplet> t;
  t.reserve(36 * space.mesh().num_cells());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    std::array<std::array<double, 6>, 6> k{};
    for (int q = 0; q < kNumQuad; ++q)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) k[i][j] += e.jw[q] * dot(e.dphi[q][i], e.dphi[q][j]);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) t.emplace_back(e.nodes[i], e.nodes[j], k[i][j]);
  }
  return from_triplets(t, nn, nn);
}

SparseMatrix assemble_pressure_mass(const TaylorHoodSpace& space) {
  const int np = space.num_pressure_dofs();
  std::vector<Triplet> t;
  t.reserve(9 * space.mesh().num_cells());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const Cell& v = space.mesh().cell(c);
    const double a = space.mesh().signed_area(c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t.emplace_back(v[i], v[j], a * (i == j ? 2.0 : 1.0) / 12.0);
  }
  return from_triplets(t, np, np);
}

RieszMatrices assemble_riesz_matrices(const TaylorHoodSpace& space) {
  const int nn = space.num_nodes();
  const int nd = space.num_velocity_dofs();
  std::vector<Triplet> tg;
  std::vector<Triplet> td;
  tg.reserve(72 * space.mesh().num_cells());
  td.reserve(144 * space.mesh().num_cells());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    std::array<std::array<double, 6>, 6> k{};
    // sym[a][b][i][j] = int d_b phi_i d_a phi_j
    std::array<std::array<std::array<std::array<double, 6>, 6>, 2>, 2> cross{};
    for (int q = 0; q < kNumQuad; ++q) {
      for (int i = 0; i < 6; ++i) {
        const Point gi = e.dphi[q][i];
        for (int j = 0; j < 6; ++j) {
          const Point gj = e.dphi[q][j];
          const double w = e.jw[q];
          k[i][j] += w * dot(gi, gj);
          const double gic[2] = {gi.x, gi.y};
          const double gjc[2] = {gj.x, gj.y};
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) cross[a][b][i][j] += w * gic[b] * gjc[a];
        }
      }
    }
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) {
            const int row = a * nn + e.nodes[i];
            const int col = b * nn + e.nodes[j];
            const double lap = a == b ? k[i][j] : 0.0;
            if (a == b) tg.emplace_back(row, col, lap);
            td.emplace_back(row, col, 0.5 * (lap + cross[a][b][i][j]));
          }
        }
      }
    }
  }
  return {from_triplets(tg, nd, nd), from_triplets(td, nd, nd), assemble_pressure_mass(space)};
}

Vector pressure_integrals(const TaylorHoodSpace& space) {
  Vector w = Vector::Zero(space.num_pressure_dofs());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const double a = space.mesh().signed_area(c) / 3.0;
    for (int v : space.mesh().cell(c)) w[v] += a;
  }
  return w;
}

void remove_pressure_mean(const TaylorHoodSpace& space, Vector& p) {
  const Vector w = pressure_integrals(space);
  p.array() -= w.dot(p) / w.sum();
}

double field_norm(const TaylorHoodSpace& space, const Vector& field, NormKind which) {
  const int nn = space.num_nodes();
  if (which == NormKind::L2Pressure) {
    if (field.size() != space.num_pressure_dofs())
      throw std::invalid_argument("field_norm: pressure vector has wrong length");
    const SparseMatrix m = assemble_pressure_mass(space);
    return std::sqrt(std::max(0.0, field.dot(m * field)));
  }
  if (field.size() != space.num_velocity_dofs())
    throw std::invalid_argument("field_norm: velocity vector has wrong length");
  double s = 0.0;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const Grad2 g = velocity_gradient(e, field, nn, q);
      if (which == NormKind::H1Velocity) {
        s += e.jw[q] * (g.xx * g.xx + g.xy * g.xy + g.yx * g.yx + g.yy * g.yy);
      } else {
        const double div = g.xx + g.yy;
        s += e.jw[q] * div * div;
      }
    }
  }
  return std::sqrt(s);
}

FieldPair prolongate(const TaylorHoodSpace& from, const TaylorHoodSpace& to, const FieldPair& f) {
  const Triangulation& coarse = from.mesh();
  const Triangulation& fine = to.mesh();
  FieldPair out{Vector::Zero(to.num_velocity_dofs()), Vector::Zero(to.num_pressure_dofs())};
  std::vector<bool> done_node(to.num_nodes(), false);
  std::vector<bool> done_vertex(to.num_pressure_dofs(), false);
  for (std::size_t c = 0; c < fine.num_cells(); ++c) {
    const int parent = fine.parent(c);
    if (parent < 0 || static_cast<std::size_t>(parent) >= coarse.num_cells())
      throw std::invalid_argument("prolongate: target mesh is not a refinement of the source");
    const auto nodes = to.cell_nodes(c);
    for (int i = 0; i < 6; ++i) {
      const int node = nodes[i];
      if (done_node[node]) continue;
      done_node[node] = true;
      const auto bary = coarse.barycentric(parent, to.node_point(node));
      const Vec2 val = evaluate_velocity(from, f.u, parent, bary);
      out.u[to.velocity_dof(node, 0)] = val[0];
      out.u[to.velocity_dof(node, 1)] = val[1];
      if (i < 3 && !done_vertex[node]) {
        done_vertex[node] = true;
        out.p[node] = evaluate_pressure(from, f.p, parent, bary);
      }
    }
  }
  to.apply_dirichlet(out.u);
  return out;
}

void write_vtk_fields(std::ostream& os, const TaylorHoodSpace& space, const FieldPair& f,
                      std::span<const double> cell_scalars) {
  const Triangulation& mesh = space.mesh();
  write_vtk(os, mesh, cell_scalars);
  const int nv = static_cast<int>(mesh.num_vertices());
  os << "POINT_DATA " << nv << '\n';
  os << "VECTORS velocity double\n";
  for (int v = 0; v < nv; ++v)
    os << f.u[space.velocity_dof(v, 0)] << ' ' << f.u[space.velocity_dof(v, 1)] << " 0\n";
  os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v) os << f.p[v] << '\n';
}

void write_coefficients_csv(std::ostream& os, const Vector& v) {
  os << "index,value\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << i << ',' << v[i] << '\n';
}

}  // namespace bingham
