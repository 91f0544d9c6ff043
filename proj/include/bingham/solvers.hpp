#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bingham/constitutive.hpp"
#include "bingham/femspace.hpp"
#include "bingham/forms.hpp"
#include "bingham/linalg.hpp"

namespace bingham {

enum class Method { Kacanov, KacanovConvective, Zarantonello };
enum class DeltaRule { Fixed, AdaptiveN };

std::string to_string(Method m);
Method parse_method(const std::string& s);
std::string to_string(DeltaRule r);
DeltaRule parse_delta_rule(const std::string& s);

struct SolverConfig {
  Method method = Method::Kacanov;
  DeltaRule delta_rule = DeltaRule::AdaptiveN;
  double delta = 0.5;  // used with DeltaRule::Fixed
  int max_inner_iterations = 200;
  bool force_min_one_step = true;
  bool convection = false;  // model includes B[U,U,V]; required by KacanovConvective

  void validate() const;
  /// Damping for graph index m: the fixed value or 2^-m.
  [[nodiscard]] double delta_for(int m) const;
};

/// Factorized saddle system
///   [A  B^T  0] [U]   [rhs]
///   [B  0    w] [P] = [0  ]
///   [0  w^T  0] [l]   [0  ]
/// with w_k = int psi_k, and Dirichlet rows of A replaced by identity rows.
///
/// The dense multiplier row ruins the fill-reducing ordering, so the sparse
/// part K is factored with a unit shift on one pressure diagonal entry
/// (K~ = K + e e^T, nonsingular) and the border plus the shift are removed by
/// a 2x2 solve.
class SaddleFactorization {
 public:
  SaddleFactorization(const TaylorHoodSpace& space, const SparseMatrix& a, const SparseMatrix& b,
                      bool zero_mean = true);

  /// Velocity right-hand side on all dofs; Dirichlet entries are replaced by
  /// `dirichlet_scale` times the boundary data.  P is returned mean-free.
  [[nodiscard]] FieldPair solve(const Vector& rhs, double dirichlet_scale = 1.0) const;

 private:
  const TaylorHoodSpace* space_;
  bool zero_mean_;
  std::optional<SparseLU> lu_;
  int shift_index_ = 0;
  Vector border_;    // c = (0, w)
  Vector x_shift_;   // K~^{-1} e
  Vector x_border_;  // K~^{-1} c
};

/// One-shot solve of the saddle system.  A singular system throws
/// SingularMatrixError whose message names the block holding the bad pivot.
FieldPair solve_saddle(const TaylorHoodSpace& space, const SparseMatrix& a, const SparseMatrix& b,
                       const Vector& rhs, bool zero_mean = true);

/// Holds the per-space data shared by successive linearisation steps: load,
/// divergence block, and the Riesz factorization of the Zarantonello scheme.
class FixedPointSolver {
 public:
  FixedPointSolver(const TaylorHoodSpace& space, const RegularisedLaw& law,
                   const VectorFunction& f, SolverConfig config);

  void set_law(const RegularisedLaw& law) { law_ = law; }
  [[nodiscard]] const RegularisedLaw& law() const { return law_; }
  [[nodiscard]] const SolverConfig& config() const { return config_; }
  [[nodiscard]] const TaylorHoodSpace& space() const { return *space_; }
  [[nodiscard]] const std::vector<Vec2>& f_samples() const { return f_samples_; }
  [[nodiscard]] const SparseMatrix& divergence() const { return b_; }
  [[nodiscard]] const DualNorms& dual_norms() const { return norms_; }

  FieldPair step(const FieldPair& current);
  FieldPair kacanov(const FieldPair& current, bool convection);
  FieldPair zarantonello(const FieldPair& current, double delta);

  [[nodiscard]] ResidualPair residuals(const FieldPair& fields) const;
  [[nodiscard]] double energy(const Vector& u) const;

 private:
  const TaylorHoodSpace* space_;
  RegularisedLaw law_;
  SolverConfig config_;
  std::vector<Vec2> f_samples_;
  Vector load_;
  SparseMatrix b_;
  DualNorms norms_;
  SparseMatrix riesz_;  // int DU : DV, built on first Zarantonello step
  std::unique_ptr<SaddleFactorization> riesz_lu_;
};

FieldPair kacanov_step(const TaylorHoodSpace& space, const RegularisedLaw& law,
                       const FieldPair& current, const VectorFunction& f);
FieldPair kacanov_convective_step(const TaylorHoodSpace& space, const RegularisedLaw& law,
                                  const FieldPair& current, const VectorFunction& f);
FieldPair zarantonello_step(const TaylorHoodSpace& space, const RegularisedLaw& law,
                            const FieldPair& current, const VectorFunction& f, double delta,
                            bool convection = true);

enum class StopReason { CriterionMet, MaxIterations };
std::string to_string(StopReason r);

struct InnerThresholds {
  /// E_N for the current iterate; re-evaluated after every step.  Unset means
  /// the constant `estimator_value`.
  std::function<double(const FieldPair&)> estimator;
  double estimator_value = std::numeric_limits<double>::infinity();
  double eta = std::numeric_limits<double>::infinity();
  double zeta = std::numeric_limits<double>::infinity();
  /// Power applied to E in the stopping test (1 is the criterion as written).
  double criterion_exponent = 1.0;
};

struct InnerStep {
  int inner;
  double energy;
  double res_pde;
  double res_ic;
  double estimator;
  double increment;  // ||grad(U_{l+1} - U_l)||_2
};

struct InnerLoopReport {
  int iterations = 0;
  double res_pde = 0.0;
  double res_ic = 0.0;
  double estimator = 0.0;  // E at the returned iterate
  std::vector<InnerStep> trace;
  StopReason stop = StopReason::CriterionMet;
};

/// Stopping threshold min(max(E^exponent, eta), zeta).
double inner_threshold(double estimator, const InnerThresholds& t);

/// Steps while ||F_pde|| + ||F_ic|| >= min(max(E, eta), zeta); equality continues.
std::pair<FieldPair, InnerLoopReport> inner_loop(FixedPointSolver& solver, const FieldPair& start,
                                                 const InnerThresholds& thresholds);

}  // namespace bingham
