#pragma once

// Test-only oracles: an independent quadrature (collapsed Gauss-Legendre
// product rule), an independent P2 basis, and fixed-seed generators.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "bingham/femspace.hpp"
#include "bingham/forms.hpp"
#include "bingham/mesh.hpp"
#include "bingham/solvers.hpp"

namespace oracle {

using bingham::Point;

/// Gauss-Legendre nodes/weights on [0, 1] by Newton on P_n.
inline std::vector<std::array<double, 2>> gauss_legendre(int n) {
  std::vector<std::array<double, 2>> out(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    out[i] = {0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)};  // weight on [0,1] is 2/(..)/2
  }
  return out;
}

struct RefPoint {
  double l1, l2, w;  // weights sum to 1/2
};

/// Duffy-collapsed product rule on the reference triangle, exact to degree 2n-2.
inline std::vector<RefPoint> triangle_rule(int n) {
  const auto g = gauss_legendre(n);
  std::vector<RefPoint> r;
  for (const auto& a : g)
    for (const auto& b : g) {
      const double u = a[0], v = b[0];
      r.push_back({u, (1.0 - u) * v, a[1] * b[1] * (1.0 - u)});
    }
  return r;
}

/// Integrates f over a physical cell with the collapsed rule.
inline double integrate_cell(const bingham::Triangulation& mesh, std::size_t c,
                             const std::function<double(Point, const std::array<double, 3>&)>& f, int n = 12) {
  const auto& cell = mesh.cell(c);
  const Point a = mesh.vertex(cell[0]), b = mesh.vertex(cell[1]), d = mesh.vertex(cell[2]);
  const double jac = std::abs((b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y));
  double s = 0.0;
  for (const RefPoint& q : triangle_rule(n)) {
    const std::array<double, 3> l{1.0 - q.l1 - q.l2, q.l1, q.l2};
    const Point x = l[0] * a + l[1] * b + l[2] * d;
    s += q.w * jac * f(x, l);
  }
  return s;
}

/// Independent P2 basis: vertex i -> l_i(2 l_i - 1); edge k (opposite vertex
/// k) -> 4 l_a l_b with {a, b} the other two vertices.
inline std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  std::array<double, 6> v{};
  for (int i = 0; i < 3; ++i) v[i] = l[i] * (2.0 * l[i] - 1.0);
  for (int k = 0; k < 3; ++k) v[3 + k] = 4.0 * l[(k + 1) % 3] * l[(k + 2) % 3];
  return v;
}

/// Central-difference gradient of a scalar function; step chosen for ~1e-10 accuracy on polynomials.
inline std::array<double, 2> fd_gradient(const std::function<double(Point)>& f, Point x, double h = 1e-5) {
  return {(f({x.x + h, x.y}) - f({x.x - h, x.y})) / (2 * h), (f({x.x, x.y + h}) - f({x.x, x.y - h})) / (2 * h)};
}

/// Fixed-seed generator with the handful of draws the property tests need.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  bingham::Vector vector(int n) {
    bingham::Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  /// Random velocity with zero trace.
  bingham::Vector free_velocity(const bingham::TaylorHoodSpace& s) {
    bingham::Vector v = vector(s.num_velocity_dofs());
    s.zero_dirichlet(v);
    return v;
  }

  bingham::SymTensor tensor(double scale = 1.0) { return {scale * normal(), scale * normal(), scale * normal()}; }

  /// Marks a random subset (at least one cell).
  std::vector<int> subset(std::size_t n, double p) {
    std::vector<int> out;
    for (std::size_t c = 0; c < n; ++c)
      if (uniform() < p) out.push_back(static_cast<int>(c));
    if (out.empty()) out.push_back(integer(0, static_cast<int>(n) - 1));
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

inline std::shared_ptr<const bingham::Triangulation> square(int divisions) {
  return std::make_shared<const bingham::Triangulation>(bingham::build_structured_unit_square(divisions));
}

/// Structured mesh followed by `rounds` random local refinements.
inline std::shared_ptr<const bingham::Triangulation> graded_square(int divisions, int rounds, std::uint64_t seed) {
  Gen g(seed);
  bingham::Triangulation m = bingham::build_structured_unit_square(divisions);
  for (int r = 0; r < rounds; ++r) {
    const auto marked = g.subset(m.num_cells(), 0.2);
    m = bingham::refine(m, marked);
  }
  return std::make_shared<const bingham::Triangulation>(std::move(m));
}

/// Dense copy of a sparse block restricted to `keep` rows and columns.
inline bingham::DenseMatrix dense_restrict(const bingham::SparseMatrix& a, const std::vector<int>& rows,
                                           const std::vector<int>& cols) {
  bingham::DenseMatrix full = bingham::DenseMatrix(a);
  bingham::DenseMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = full(rows[i], cols[j]);
  return out;
}


/// Jacobian of V -> int s_n(DU) : DV at U, assembled directly from the
/// derivative mu_n(t) I + 2 mu_n'(t) D (x) D, t = |D|^2.
inline bingham::SparseMatrix newton_jacobian(const bingham::TaylorHoodSpace& space, const bingham::RegularisedLaw& law,
                                             const bingham::Vector& u) {
  using namespace bingham;
  const int nn = space.num_nodes();
  const double inv_n2 = 1.0 / (law.n() * law.n());
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const SymTensor d = sym(velocity_gradient(e, u, nn, q));
      const double tt = ddot(d, d);
      const double mu = mu_n(law, tt);
      const double dmu = -0.5 * law.yield() * std::pow(tt + inv_n2, -1.5);
      std::array<SymTensor, 12> db;
      std::array<int, 12> dof;
      for (int k = 0; k < 6; ++k) {
        const Point g = e.dphi[q][k];
        db[k] = {g.x, 0.5 * g.y, 0.0};
        db[6 + k] = {0.0, 0.5 * g.x, g.y};
        dof[k] = e.nodes[k];
        dof[6 + k] = nn + e.nodes[k];
      }
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
          t.emplace_back(dof[i], dof[j],
                         e.jw[q] * (mu * ddot(db[j], db[i]) + 2.0 * dmu * ddot(d, db[j]) * ddot(d, db[i])));
    }
  }
  return from_triplets(t, space.num_velocity_dofs(), space.num_velocity_dofs());
}

/// Discrete solution of the convection-free regularised problem by damped
/// Newton, started from a few Kacanov steps.  Stops once the pde residual
/// dual norm is below `tol`.
inline bingham::FieldPair newton_oracle(const bingham::TaylorHoodSpace& space, const bingham::RegularisedLaw& law,
                                        const bingham::VectorFunction& f, double tol = 1e-12) {
  using namespace bingham;
  const auto fs = sample_at_quadrature(space, f);
  const SparseMatrix b = assemble_b(space);
  const DualNorms norms(space);
  const auto residual = [&](const FieldPair& x) {
    Vector r = operator_residual(space, law, x.u, fs, false) + b.transpose() * x.p;
    space.zero_dirichlet(r);
    return norms.pde(r);
  };
  FieldPair x = boundary_lift(space);
  for (int k = 0; k < 5; ++k) x = kacanov_step(space, law, x, f);
  double res = residual(x);
  for (int it = 0; it < 100 && res > tol; ++it) {
    const SparseMatrix j = newton_jacobian(space, law, x.u);
    const Vector rhs = j * x.u - operator_residual(space, law, x.u, fs, false);
    const FieldPair full = solve_saddle(space, j, b, rhs);
    double step = 1.0;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      FieldPair trial{x.u + step * (full.u - x.u), x.p + step * (full.p - x.p)};
      const double r = residual(trial);
      if (r < res || ls == 29) {
        x = std::move(trial);
        res = r;
        break;
      }
    }
  }
  if (!(res <= tol)) throw std::runtime_error("newton_oracle: no convergence");
  return x;
}

}  // namespace oracle
