#pragma once

#include <vector>

#include "bingham/constitutive.hpp"
#include "bingham/femspace.hpp"
#include "bingham/linalg.hpp"

namespace bingham {

/// Symmetric gradient of a velocity gradient.
inline SymTensor sym(const Grad2& g) { return {g.xx, 0.5 * (g.xy + g.yx), g.yy}; }

/// a_n(U; V, W) = int mu_n(|DU|^2) DV : DW on all velocity dofs.
SparseMatrix assemble_a_n(const TaylorHoodSpace& space, const RegularisedLaw& law,
                          const Vector& u_prev);

/// int w(x) DV : DW with a weight given per cell and quadrature point
/// (row-major, kNumQuad entries per cell).
SparseMatrix assemble_weighted_symmetric(const TaylorHoodSpace& space,
                                         const std::vector<double>& weights);

/// Rows are pressure dofs, columns velocity dofs: B(k, j) = b(psi_k, phi_j) = -int psi_k div phi_j.
SparseMatrix assemble_b(const TaylorHoodSpace& space);

/// B[v, w, h] = 1/2 int ((v . grad) w) . h - ((v . grad) h) . w
double trilinear_value(const TaylorHoodSpace& space, const Vector& v, const Vector& w,
                       const Vector& h);

/// Frozen-convection matrix C(i, j) = B[U; phi_j, phi_i]; skew-symmetric.
SparseMatrix assemble_convection(const TaylorHoodSpace& space, const Vector& u);

/// (U . grad) U + 1/2 (div U) U at the quadrature points, one block of
/// kNumQuad samples per cell.
std::vector<Vec2> convection_strong_form(const TaylorHoodSpace& space, const Vector& u);

/// int f . phi_j on all velocity dofs (Dirichlet entries included).
Vector assemble_load(const TaylorHoodSpace& space, const VectorFunction& f);

/// int f . phi_j with f sampled at the quadrature points (kNumQuad per cell).
Vector assemble_load_samples(const TaylorHoodSpace& space, const std::vector<Vec2>& f);

/// Samples f at the quadrature points of every cell.
std::vector<Vec2> sample_at_quadrature(const TaylorHoodSpace& space, const VectorFunction& f);

struct ResidualPair {
  Vector pde;  // velocity dual, zero on Dirichlet dofs
  Vector ic;   // pressure dual
};

/// The nonlinear operator int s_n(DU):DV + B[U,U,V] - int f.V on all velocity
/// dofs (no pressure, Dirichlet entries kept).
Vector operator_residual(const TaylorHoodSpace& space, const RegularisedLaw& law, const Vector& u,
                         const std::vector<Vec2>& f_samples, bool convection);

ResidualPair residual_pair(const TaylorHoodSpace& space, const RegularisedLaw& law,
                           const FieldPair& fields, const std::vector<Vec2>& f_samples,
                           bool convection);
ResidualPair residual_pair(const TaylorHoodSpace& space, const RegularisedLaw& law,
                           const FieldPair& fields, const VectorFunction& f, bool convection);

/// Discrete dual norms with the Riesz factorizations cached for one space.
///
/// pde: sup over V with zero trace of <F, V> / ||grad V||_2, evaluated as
/// sqrt(F^T G^{-1} F) on the free dofs.  G is block diagonal with the scalar
/// P2 Laplacian on each component, so one factorization serves both.
/// ic: sup over Q of <F, Q> / ||Q||_2 = sqrt(F^T M^{-1} F).
class DualNorms {
 public:
  explicit DualNorms(const TaylorHoodSpace& space);

  [[nodiscard]] double pde(const Vector& f_pde) const;
  [[nodiscard]] double ic(const Vector& f_ic) const;

 private:
  const TaylorHoodSpace* space_;
  SparseCholesky laplace_;
  SparseCholesky mass_;
};

double dual_norm_pde(const TaylorHoodSpace& space, const Vector& f_pde);
double dual_norm_ic(const TaylorHoodSpace& space, const Vector& f_ic);

/// H_n(U) = int kappa sigma sqrt(|DU|^2 + n^-2) + nu |DU|^2 - int f . U
double energy(const TaylorHoodSpace& space, const RegularisedLaw& law, const Vector& u,
              const std::vector<Vec2>& f_samples);
double energy(const TaylorHoodSpace& space, const RegularisedLaw& law, const Vector& u,
              const VectorFunction& f);

}  // namespace bingham
