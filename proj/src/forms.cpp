#include "bingham/forms.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace bingham {

namespace {

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

void check_velocity(const TaylorHoodSpace& space, const Vector& u, const char* who) {
  if (u.size() != space.num_velocity_dofs())
    throw std::invalid_argument(std::string(who) + ": velocity vector has wrong length");
}

void check_samples(const TaylorHoodSpace& space, const std::vector<Vec2>& f, const char* who) {
  if (f.size() != space.mesh().num_cells() * kNumQuad)
    throw std::invalid_argument(std::string(who) + ": expected kNumQuad samples per cell");
}

// (v . grad) w at quadrature point q.
inline Vec2 advect(const Vec2& v, const Grad2& gw) {
  return {v[0] * gw.xx + v[1] * gw.xy, v[0] * gw.yx + v[1] * gw.yy};
}

}  // namespace

SparseMatrix assemble_weighted_symmetric(const TaylorHoodSpace& space,
                                         const std::vector<double>& weights) {
  const int nn = space.num_nodes();
  const int nd = space.num_velocity_dofs();
  const std::size_t nc = space.mesh().num_cells();
  if (weights.size() != nc * kNumQuad)
    throw std::invalid_argument("assemble_weighted_symmetric: expected kNumQuad weights per cell");
  std::vector<Triplet> t;
  t.reserve(144 * nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const ElementData e = space.element(c);
    double k[2][2][6][6] = {};
    for (int q = 0; q < kNumQuad; ++q) {
      const double w = 0.5 * e.jw[q] * weights[c * kNumQuad + q];
      for (int i = 0; i < 6; ++i) {
        const Point gi = e.dphi[q][i];
        for (int j = 0; j < 6; ++j) {
          const Point gj = e.dphi[q][j];
          const double lap = dot(gi, gj);
          k[0][0][i][j] += w * (lap + gi.x * gj.x);
          k[0][1][i][j] += w * gi.y * gj.x;
          k[1][0][i][j] += w * gi.x * gj.y;
          k[1][1][i][j] += w * (lap + gi.y * gj.y);
        }
      }
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 6; ++i)
          for (int j = 0; j < 6; ++j)
            t.emplace_back(a * nn + e.nodes[i], b * nn + e.nodes[j], k[a][b][i][j]);
  }
  return from_triplets(t, nd, nd);
}

SparseMatrix assemble_a_n(const TaylorHoodSpace& space, const RegularisedLaw& law,
                          const Vector& u_prev) {
  check_velocity(space, u_prev, "assemble_a_n");
  const int nn = space.num_nodes();
  const std::size_t nc = space.mesh().num_cells();
  std::vector<double> mu(nc * kNumQuad);
  for (std::size_t c = 0; c < nc; ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const SymTensor d = sym(velocity_gradient(e, u_prev, nn, q));
      mu[c * kNumQuad + q] = mu_n(law, ddot(d, d));
    }
  }
  return assemble_weighted_symmetric(space, mu);
}

SparseMatrix assemble_b(const TaylorHoodSpace& space) {
  const int nn = space.num_nodes();
  std::vector<Triplet> t;
  t.reserve(36 * space.mesh().num_cells());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    double k[3][2][6] = {};
    for (int q = 0; q < kNumQuad; ++q)
      for (int r = 0; r < 3; ++r) {
        const double w = -e.jw[q] * e.lambda[q][r];
        for (int j = 0; j < 6; ++j) {
          k[r][0][j] += w * e.dphi[q][j].x;
          k[r][1][j] += w * e.dphi[q][j].y;
        }
      }
    for (int r = 0; r < 3; ++r)
      for (int b = 0; b < 2; ++b)
        for (int j = 0; j < 6; ++j) t.emplace_back(e.vertices[r], b * nn + e.nodes[j], k[r][b][j]);
  }
  return from_triplets(t, space.num_pressure_dofs(), space.num_velocity_dofs());
}

double trilinear_value(const TaylorHoodSpace& space, const Vector& v, const Vector& w,
                       const Vector& h) {
  check_velocity(space, v, "trilinear_value");
  check_velocity(space, w, "trilinear_value");
  check_velocity(space, h, "trilinear_value");
  const int nn = space.num_nodes();
  double s = 0.0;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const Vec2 vq = velocity_value(e, v, nn, q);
      const Vec2 wq = velocity_value(e, w, nn, q);
      const Vec2 hq = velocity_value(e, h, nn, q);
      const Vec2 vw = advect(vq, velocity_gradient(e, w, nn, q));
      const Vec2 vh = advect(vq, velocity_gradient(e, h, nn, q));
      s += 0.5 * e.jw[q] * (vw[0] * hq[0] + vw[1] * hq[1] - vh[0] * wq[0] - vh[1] * wq[1]);
    }
  }
  return s;
}

SparseMatrix assemble_convection(const TaylorHoodSpace& space, const Vector& u) {
  check_velocity(space, u, "assemble_convection");
  const int nn = space.num_nodes();
  std::vector<Triplet> t;
  t.reserve(72 * space.mesh().num_cells());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    double k[6][6] = {};
    for (int q = 0; q < kNumQuad; ++q) {
      const Vec2 uq = velocity_value(e, u, nn, q);
      std::array<double, 6> adv{};
      for (int i = 0; i < 6; ++i) adv[i] = uq[0] * e.dphi[q][i].x + uq[1] * e.dphi[q][i].y;
      const double w = 0.5 * e.jw[q];
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) k[i][j] += w * (adv[j] * e.phi[q][i] - adv[i] * e.phi[q][j]);
    }
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) t.emplace_back(a * nn + e.nodes[i], a * nn + e.nodes[j], k[i][j]);
  }
  return from_triplets(t, space.num_velocity_dofs(), space.num_velocity_dofs());
}

std::vector<Vec2> convection_strong_form(const TaylorHoodSpace& space, const Vector& u) {
  check_velocity(space, u, "convection_strong_form");
  const int nn = space.num_nodes();
  std::vector<Vec2> out(space.mesh().num_cells() * kNumQuad);
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const Vec2 uq = velocity_value(e, u, nn, q);
      const Grad2 g = velocity_gradient(e, u, nn, q);
      const Vec2 a = advect(uq, g);
      const double half_div = 0.5 * (g.xx + g.yy);
      out[c * kNumQuad + q] = {a[0] + half_div * uq[0], a[1] + half_div * uq[1]};
    }
  }
  return out;
}

std::vector<Vec2> sample_at_quadrature(const TaylorHoodSpace& space, const VectorFunction& f) {
  std::vector<Vec2> out(space.mesh().num_cells() * kNumQuad, Vec2{0.0, 0.0});
  if (!f) return out;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) out[c * kNumQuad + q] = f(e.x[q]);
  }
  return out;
}

Vector assemble_load_samples(const TaylorHoodSpace& space, const std::vector<Vec2>& f) {
  check_samples(space, f, "assemble_load");
  const int nn = space.num_nodes();
  Vector l = Vector::Zero(space.num_velocity_dofs());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const Vec2 fq = f[c * kNumQuad + q];
      for (int i = 0; i < 6; ++i) {
        const double w = e.jw[q] * e.phi[q][i];
        l[e.nodes[i]] += w * fq[0];
        l[nn + e.nodes[i]] += w * fq[1];
      }
    }
  }
  return l;
}

Vector assemble_load(const TaylorHoodSpace& space, const VectorFunction& f) {
  return assemble_load_samples(space, sample_at_quadrature(space, f));
}

Vector operator_residual(const TaylorHoodSpace& space, const RegularisedLaw& law, const Vector& u,
                         const std::vector<Vec2>& f_samples, bool convection) {
  check_velocity(space, u, "operator_residual");
  check_samples(space, f_samples, "operator_residual");
  const int nn = space.num_nodes();
  Vector r = Vector::Zero(space.num_velocity_dofs());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const Grad2 g = velocity_gradient(e, u, nn, q);
      const SymTensor s = s_n(law, sym(g));
      const Vec2 fq = f_samples[c * kNumQuad + q];
      Vec2 uq{0.0, 0.0};
      Vec2 uu{0.0, 0.0};
      if (convection) {
        uq = velocity_value(e, u, nn, q);
        uu = advect(uq, g);
      }
      const double w = e.jw[q];
      for (int i = 0; i < 6; ++i) {
        const Point d = e.dphi[q][i];
        const double phi = e.phi[q][i];
        double rx = s.xx * d.x + s.xy * d.y - fq[0] * phi;
        double ry = s.xy * d.x + s.yy * d.y - fq[1] * phi;
        if (convection) {
          const double adv = uq[0] * d.x + uq[1] * d.y;
          rx += 0.5 * (uu[0] * phi - adv * uq[0]);
          ry += 0.5 * (uu[1] * phi - adv * uq[1]);
        }
        r[e.nodes[i]] += w * rx;
        r[nn + e.nodes[i]] += w * ry;
      }
    }
  }
  return r;
}

ResidualPair residual_pair(const TaylorHoodSpace& space, const RegularisedLaw& law,
                           const FieldPair& fields, const std::vector<Vec2>& f_samples,
                           bool convection) {
  if (fields.p.size() != space.num_pressure_dofs())
    throw std::invalid_argument("residual_pair: pressure vector has wrong length");
  const SparseMatrix b = assemble_b(space);
  ResidualPair r;
  r.pde = operator_residual(space, law, fields.u, f_samples, convection);
  r.pde += b.transpose() * fields.p;
  space.zero_dirichlet(r.pde);
  r.ic = -(b * fields.u);
  return r;
}

ResidualPair residual_pair(const TaylorHoodSpace& space, const RegularisedLaw& law,
                           const FieldPair& fields, const VectorFunction& f, bool convection) {
  return residual_pair(space, law, fields, sample_at_quadrature(space, f), convection);
}

DualNorms::DualNorms(const TaylorHoodSpace& space) : space_(&space) {
  const auto& free = space.free_nodes();
  if (!free.empty()) laplace_ = SparseCholesky(submatrix(assemble_scalar_stiffness(space), free));
  mass_ = SparseCholesky(assemble_pressure_mass(space));
}

double DualNorms::pde(const Vector& f_pde) const {
  if (f_pde.size() != space_->num_velocity_dofs())
    throw std::invalid_argument("dual_norm_pde: residual has wrong length");
  const auto& free = space_->free_nodes();
  if (free.empty()) {
    std::cerr << "warning: dual_norm_pde: no free velocity dofs, returning 0\n";
    return 0.0;
  }
  double s = 0.0;
  Vector fc(static_cast<Eigen::Index>(free.size()));
  for (int comp = 0; comp < 2; ++comp) {
    for (std::size_t i = 0; i < free.size(); ++i) fc[i] = f_pde[space_->velocity_dof(free[i], comp)];
    s += fc.dot(laplace_.solve(fc));
  }
  return std::sqrt(std::max(0.0, s));
}

double DualNorms::ic(const Vector& f_ic) const {
  if (f_ic.size() != space_->num_pressure_dofs())
    throw std::invalid_argument("dual_norm_ic: residual has wrong length");
  return std::sqrt(std::max(0.0, f_ic.dot(mass_.solve(f_ic))));
}

double dual_norm_pde(const TaylorHoodSpace& space, const Vector& f_pde) {
  return DualNorms(space).pde(f_pde);
}

double dual_norm_ic(const TaylorHoodSpace& space, const Vector& f_ic) {
  return DualNorms(space).ic(f_ic);
}

double energy(const TaylorHoodSpace& space, const RegularisedLaw& law, const Vector& u,
              const std::vector<Vec2>& f_samples) {
  check_velocity(space, u, "energy");
  check_samples(space, f_samples, "energy");
  const int nn = space.num_nodes();
  const double inv_n2 = std::pow(law.n(), -2.0);
  double s = 0.0;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const SymTensor d = sym(velocity_gradient(e, u, nn, q));
      const double t = ddot(d, d);
      const Vec2 uq = velocity_value(e, u, nn, q);
      const Vec2 fq = f_samples[c * kNumQuad + q];
      s += e.jw[q] * (law.yield() * std::sqrt(t + inv_n2) + law.nu * t - fq[0] * uq[0] - fq[1] * uq[1]);
    }
  }
  return s;
}

double energy(const TaylorHoodSpace& space, const RegularisedLaw& law, const Vector& u,
              const VectorFunction& f) {
  return energy(space, law, u, sample_at_quadrature(space, f));
}

}  // namespace bingham
