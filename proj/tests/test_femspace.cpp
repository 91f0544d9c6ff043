#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "bingham/ailfem.hpp"
#include "bingham/femspace.hpp"
#include "bingham/forms.hpp"
#include "bingham/quadrature.hpp"

using namespace bingham;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// A global quadratic vector field.
Vec2 quad_field(Point p) {
  return {1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.x - 1.5 * p.x * p.y + 0.25 * p.y * p.y,
          -0.5 + p.x + 3.0 * p.y - p.x * p.x + 0.75 * p.x * p.y + 2.0 * p.y * p.y};
}

double quad_form(const SparseMatrix& a, const Vector& v) { return v.dot(a * v); }

}  // namespace

TEST_SUITE("femspace") {

TEST_CASE("dof counts and Dirichlet set") {
  auto mesh = oracle::square(4);
  TaylorHoodSpace space(mesh);
  CHECK(space.num_velocity_dofs() == 162);
  CHECK(space.num_pressure_dofs() == 25);
  TaylorHoodSpace small(oracle::square(1));
  CHECK(small.num_pressure_dofs() == 4);

  for (double v : space.dirichlet_values()) CHECK(v == 0.0);
  // every boundary velocity dof exactly once, nothing else
  std::multiset<int> seen(space.dirichlet_dofs().begin(), space.dirichlet_dofs().end());
  int boundary_nodes = 0;
  for (int node = 0; node < space.num_nodes(); ++node) {
    const bool b = space.is_boundary_node(node);
    boundary_nodes += b;
    for (int comp = 0; comp < 2; ++comp) CHECK(seen.count(space.velocity_dof(node, comp)) == (b ? 1u : 0u));
  }
  CHECK(boundary_nodes == 32);  // 16 boundary vertices + 16 boundary edges
  CHECK(space.free_dofs().size() + space.dirichlet_dofs().size() == 162u);

  // shared edges get one node: every edge node is referenced by 1 or 2 cells
  std::vector<int> uses(space.num_nodes(), 0);
  for (std::size_t c = 0; c < mesh->num_cells(); ++c)
    for (int k = 3; k < 6; ++k) ++uses[space.cell_nodes(c)[k]];
  for (int node = static_cast<int>(mesh->num_vertices()); node < space.num_nodes(); ++node)
    CHECK((uses[node] == 1 || uses[node] == 2));
}

TEST_CASE("boundary data carries zero net flux") {
  const Problem c = experiment_channel();
  // symmetric sides: the interpolant is already balanced and left alone
  TaylorHoodSpace even(oracle::square(4), c.dirichlet);
  CHECK(std::abs(even.interpolation_flux()) < 1e-15);
  CHECK(even.dirichlet_values() == TaylorHoodSpace(oracle::square(4), c.dirichlet).dirichlet_values());

  // refine along the inflow side only
  auto mesh = oracle::square(4);
  for (int round = 0; round < 3; ++round) {
    std::vector<int> marked;
    for (std::size_t k = 0; k < mesh->num_cells(); ++k) {
      const auto& cl = mesh->cell(k);
      if (std::min({mesh->vertex(cl[0]).x, mesh->vertex(cl[1]).x, mesh->vertex(cl[2]).x}) == 0.0)
        marked.push_back(static_cast<int>(k));
    }
    mesh = std::make_shared<const Triangulation>(refine(*mesh, marked));
  }
  TaylorHoodSpace space(mesh, c.dirichlet);
  CHECK(std::abs(space.interpolation_flux()) > 1e-8);
  CHECK(std::abs(space.boundary_flux()) < 1e-15);
  // second route: int div U over the domain, through B and constant pressure
  Vector u = Vector::Zero(space.num_velocity_dofs());
  space.apply_dirichlet(u);
  CHECK(std::abs((assemble_b(space) * u).sum()) < 1e-15);
  // walls keep their no-slip values and the correction is small
  Vector plain = Vector::Zero(space.num_velocity_dofs());
  for (int node = 0; node < space.num_nodes(); ++node)
    if (space.is_boundary_node(node)) plain[space.velocity_dof(node, 0)] = c.dirichlet(space.node_point(node))[0];
  CHECK((u - plain).lpNorm<Eigen::Infinity>() < 1e-3);
  for (int node = 0; node < space.num_nodes(); ++node) {
    const Point x = space.node_point(node);
    if (space.is_boundary_node(node) && (x.y == 0.0 || x.y == 1.0)) CHECK(std::abs(u[space.velocity_dof(node, 0)]) < 1e-15);
    if (space.is_boundary_node(node)) CHECK(u[space.velocity_dof(node, 1)] == 0.0);
  }
}

TEST_CASE("quadrature exact to degree 8") {
  double wsum = 0.0;
  for (const QuadPoint& q : kTriangleRule) {
    CHECK(q.weight > 0.0);
    wsum += q.weight;
  }
  CHECK(wsum == doctest::Approx(0.5).epsilon(1e-15));
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; a + b <= 8; ++b) {
      double s = 0.0;
      for (const QuadPoint& q : kTriangleRule) s += q.weight * std::pow(q.l1, a) * std::pow(q.l2, b);
      const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      CHECK(std::abs(s - exact) <= 1e-14 * exact);
    }
}

TEST_CASE("oracle rule sanity") {
  // the collapsed product rule used by other tests integrates degree 10 exactly
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; a + b <= 10; ++b) {
      double s = 0.0;
      for (const auto& q : oracle::triangle_rule(6)) s += q.w * std::pow(q.l1, a) * std::pow(q.l2, b);
      CHECK(s == doctest::Approx(factorial(a) * factorial(b) / factorial(a + b + 2)).epsilon(1e-13));
    }
}

TEST_CASE("interpolation") {
  auto mesh = oracle::graded_square(2, 3, 7);
  TaylorHoodSpace space(mesh);
  CHECK(interpolate_velocity(space, [](Point) { return Vec2{0.0, 0.0}; }).norm() == 0.0);

  // linear f reproduced at quadrature points, quadratic f anywhere
  const Vector lin = interpolate_velocity(space, [](Point p) { return Vec2{1 + 2 * p.x - p.y, 3 * p.y}; });
  const Vector quad = interpolate_velocity(space, quad_field);
  for (std::size_t c = 0; c < mesh->num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const Vec2 v = velocity_value(e, lin, space.num_nodes(), q);
      CHECK(v[0] == doctest::Approx(1 + 2 * e.x[q].x - e.x[q].y).epsilon(1e-13));
      CHECK(v[1] == doctest::Approx(3 * e.x[q].y).epsilon(1e-13));
      const Vec2 w = velocity_value(e, quad, space.num_nodes(), q);
      const Vec2 ex = quad_field(e.x[q]);
      CHECK(std::abs(w[0] - ex[0]) < 1e-13);
      CHECK(std::abs(w[1] - ex[1]) < 1e-13);
    }
  }
  // coefficient round trip through evaluation
  oracle::Gen g(9);
  const Vector u = g.vector(space.num_velocity_dofs());
  Vector back(space.num_velocity_dofs());
  for (std::size_t c = 0; c < mesh->num_cells(); ++c) {
    const auto nodes = space.cell_nodes(c);
    const std::array<std::array<double, 3>, 6> at{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, .5, .5}, {.5, 0, .5}, {.5, .5, 0}}};
    for (int k = 0; k < 6; ++k) {
      const Vec2 v = evaluate_velocity(space, u, c, at[k]);
      back[space.velocity_dof(nodes[k], 0)] = v[0];
      back[space.velocity_dof(nodes[k], 1)] = v[1];
    }
  }
  CHECK((back - u).norm() < 1e-13 * u.norm());

  TaylorHoodSpace channel(oracle::square(4), [](Point x) { return Vec2{channel_profile(x.y), 0.0}; });
  const Vector cu = interpolate_velocity(channel, [](Point x) { return Vec2{channel_profile(x.y), 0.0}; });
  // the vertex (0, 0.5) is node 2*5 = 10 on the 4x4 grid
  CHECK(channel.node_point(10).y == 0.5);
  CHECK(cu[channel.velocity_dof(10, 0)] == doctest::Approx(0.02).epsilon(1e-15));
}

TEST_CASE("independent P2 basis agrees") {
  oracle::Gen g(13);
  for (int i = 0; i < 100; ++i) {
    double a = g.uniform(), b = g.uniform();
    if (a + b > 1) {
      a = 1 - a;
      b = 1 - b;
    }
    const std::array<double, 3> l{1 - a - b, a, b};
    std::array<double, 6> phi;
    std::array<Point, 6> dphi;
    p2_basis(l, {Point{-1, -1}, Point{1, 0}, Point{0, 1}}, phi, dphi);
    const auto ref = oracle::p2_values(l);
    for (int k = 0; k < 6; ++k) CHECK(phi[k] == doctest::Approx(ref[k]).epsilon(1e-14));
  }
}

TEST_CASE("Riesz matrices") {
  auto mesh = oracle::graded_square(2, 2, 3);
  TaylorHoodSpace space(mesh);
  const RieszMatrices r = assemble_riesz_matrices(space);
  const Vector one = Vector::Ones(space.num_pressure_dofs());
  CHECK(quad_form(r.mass, one) == doctest::Approx(1.0).epsilon(1e-14));

  oracle::Gen g(4);
  for (int i = 0; i < 100; ++i) {
    const Vector u = g.vector(space.num_velocity_dofs());
    const double d = quad_form(r.symmetric, u), gr = quad_form(r.gradient, u);
    CHECK(d <= gr * (1 + 1e-12));
    // Korn on the zero-trace subspace
    const Vector v = g.free_velocity(space);
    const double dv = quad_form(r.symmetric, v), gv = quad_form(r.gradient, v);
    CHECK(dv <= gv * (1 + 1e-12));
    CHECK(gv <= 2.0 * dv * (1 + 1e-12));
  }
  // G on free dofs is positive definite
  const auto& free = space.free_dofs();
  const DenseMatrix gf = oracle::dense_restrict(r.gradient, free, free);
  const GeneralizedEigen e = dense_generalized_eigen(gf, DenseMatrix::Identity(free.size(), free.size()));
  CHECK(e.values[0] > 0.0);
  CHECK((DenseMatrix(r.gradient) - DenseMatrix(r.gradient).transpose()).norm() < 1e-12);
  CHECK((DenseMatrix(r.symmetric) - DenseMatrix(r.symmetric).transpose()).norm() < 1e-12);
}

TEST_CASE("field norms") {
  auto mesh = oracle::square(3);
  TaylorHoodSpace space(mesh);
  CHECK(field_norm(space, Vector::Zero(space.num_velocity_dofs()), NormKind::H1Velocity) == 0.0);
  const Vector u = interpolate_velocity(space, [](Point x) { return Vec2{x.y, 0.0}; });
  CHECK(field_norm(space, u, NormKind::H1Velocity) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(field_norm(space, u, NormKind::L2Divergence) == doctest::Approx(0.0));
  const Vector p = Vector::Constant(space.num_pressure_dofs(), -2.5);
  CHECK(field_norm(space, p, NormKind::L2Pressure) == doctest::Approx(2.5).epsilon(1e-14));
  const Vector ux = interpolate_velocity(space, [](Point x) { return Vec2{x.x, 0.0}; });
  CHECK(field_norm(space, ux, NormKind::L2Divergence) == doctest::Approx(1.0).epsilon(1e-14));

  // against the collapsed rule for a quadratic field
  const Vector q = interpolate_velocity(space, quad_field);
  double s = 0.0;
  for (std::size_t c = 0; c < mesh->num_cells(); ++c)
    s += oracle::integrate_cell(*mesh, c, [](Point x, const std::array<double, 3>&) {
      const double ux_x = 2 + x.x - 1.5 * x.y, ux_y = -1 - 1.5 * x.x + 0.5 * x.y;
      const double uy_x = 1 - 2 * x.x + 0.75 * x.y, uy_y = 3 + 0.75 * x.x + 4 * x.y;
      return ux_x * ux_x + ux_y * ux_y + uy_x * uy_x + uy_y * uy_y;
    });
  CHECK(field_norm(space, q, NormKind::H1Velocity) == doctest::Approx(std::sqrt(s)).epsilon(1e-13));
}

TEST_CASE("pressure mean removal") {
  auto mesh = oracle::graded_square(2, 3, 5);
  TaylorHoodSpace space(mesh);
  Vector p = interpolate_pressure(space, [](Point x) { return 3.0 + x.x * x.y; });
  remove_pressure_mean(space, p);
  CHECK(std::abs(pressure_integrals(space).dot(p)) < 1e-14);
}

TEST_CASE("property: nestedness of Riesz forms under refinement") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    oracle::Gen g(seed);
    auto coarse_mesh = oracle::graded_square(2, 2, seed);
    TaylorHoodSpace coarse(coarse_mesh);
    auto fine_mesh = std::make_shared<const Triangulation>(refine(*coarse_mesh, g.subset(coarse_mesh->num_cells(), 0.4)));
    TaylorHoodSpace fine(fine_mesh);
    const FieldPair c{g.free_velocity(coarse), g.vector(coarse.num_pressure_dofs())};
    const FieldPair f = prolongate(coarse, fine, c);
    const RieszMatrices rc = assemble_riesz_matrices(coarse), rf = assemble_riesz_matrices(fine);
    CHECK(quad_form(rf.gradient, f.u) == doctest::Approx(quad_form(rc.gradient, c.u)).epsilon(1e-12));
    CHECK(quad_form(rf.symmetric, f.u) == doctest::Approx(quad_form(rc.symmetric, c.u)).epsilon(1e-12));
    CHECK(quad_form(rf.mass, f.p) == doctest::Approx(quad_form(rc.mass, c.p)).epsilon(1e-12));
    // identical point values
    for (int i = 0; i < 50; ++i) {
      const std::size_t cell = g.integer(0, static_cast<int>(fine_mesh->num_cells()) - 1);
      double a = g.uniform(), b = g.uniform();
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      const std::array<double, 3> l{1 - a - b, a, b};
      const auto& cl = fine_mesh->cell(cell);
      const Point x = l[0] * fine_mesh->vertex(cl[0]) + l[1] * fine_mesh->vertex(cl[1]) + l[2] * fine_mesh->vertex(cl[2]);
      const int parent = fine_mesh->parent(cell);
      const auto lc = coarse_mesh->barycentric(parent, x);
      const Vec2 vf = evaluate_velocity(fine, f.u, cell, l), vc = evaluate_velocity(coarse, c.u, parent, lc);
      CHECK(std::abs(vf[0] - vc[0]) < 1e-12);
      CHECK(std::abs(vf[1] - vc[1]) < 1e-12);
      CHECK(std::abs(evaluate_pressure(fine, f.p, cell, l) - evaluate_pressure(coarse, c.p, parent, lc)) < 1e-12);
    }
  }
}

TEST_CASE("vtk fields and coefficient csv") {
  auto mesh = oracle::square(2);
  TaylorHoodSpace space(mesh);
  FieldPair f{interpolate_velocity(space, quad_field), Vector::Ones(space.num_pressure_dofs())};
  std::ostringstream os;
  write_vtk_fields(os, space, f);
  const std::string s = os.str();
  CHECK(s.find("POINT_DATA " + std::to_string(mesh->num_vertices())) != std::string::npos);
  CHECK(s.find("VECTORS velocity double") != std::string::npos);
  CHECK(s.find("SCALARS pressure double 1") != std::string::npos);
  CHECK(s.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  std::ostringstream csv;
  write_coefficients_csv(csv, f.p);
  CHECK(csv.str().rfind("index,value\n0,1\n", 0) == 0);
}

}  // TEST_SUITE
