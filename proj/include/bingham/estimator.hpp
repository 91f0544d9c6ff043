#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "bingham/constitutive.hpp"
#include "bingham/femspace.hpp"

namespace bingham {

/// Elementwise P1 symmetric tensor, coefficients at the cell's three vertices
/// (local order).
using ProjectedStress = std::vector<std::array<SymTensor, 3>>;

/// Elementwise L2 projection of s_n(DU) onto P1 symmetric tensors.  With
/// degree 0 the projection is the cell mean, stored as equal vertex values.
ProjectedStress project_pi_n(const TaylorHoodSpace& space, const RegularisedLaw& law, const Vector& u,
                             int degree = 1);

enum class JumpOwnership {
  Split,  // each interior edge computed once, half to each neighbour
  Double  // full edge value to both neighbours
};

struct IndicatorOptions {
  bool convection = false;
  JumpOwnership jumps = JumpOwnership::Split;
  int projection_degree = 1;  // 0 is a diagnostic variant, see README
};

struct IndicatorField {
  std::vector<double> eta_pde;
  std::vector<double> eta_ic;
  // eta_pde split into its three parts, for diagnostics
  std::vector<double> interior;
  std::vector<double> jump;
  std::vector<double> oscillation;

  [[nodiscard]] std::vector<double> total() const;
};

IndicatorField element_indicators(const TaylorHoodSpace& space, const RegularisedLaw& law,
                                  const FieldPair& fields, const std::vector<Vec2>& f_samples,
                                  const IndicatorOptions& options = {});
IndicatorField element_indicators(const TaylorHoodSpace& space, const RegularisedLaw& law,
                                  const FieldPair& fields, const VectorFunction& f,
                                  const IndicatorOptions& options = {});

struct GlobalEstimate {
  double e_pde = 0.0;
  double e_ic = 0.0;
  double e = 0.0;
};

GlobalEstimate global_estimator(const IndicatorField& ind);

/// Greedy Dörfler set: largest indicators first (ties to the lower index)
/// until the running sum reaches theta * sum.  Empty when all are zero.
std::vector<int> mark_doerfler(std::span<const double> eta, double theta);
std::vector<int> mark_doerfler(const IndicatorField& ind, double theta);

/// { K : eta(K) >= theta * max eta }, empty when all are zero.
std::vector<int> mark_maximum(std::span<const double> eta, double theta);
std::vector<int> mark_maximum(const IndicatorField& ind, double theta);

/// "cell,eta_pde,eta_ic"
void write_indicators_csv(std::ostream& os, const IndicatorField& ind);

}  // namespace bingham
