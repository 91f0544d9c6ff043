#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bingham/constitutive.hpp"
#include "bingham/estimator.hpp"
#include "bingham/femspace.hpp"
#include "bingham/mesh.hpp"
#include "bingham/solvers.hpp"

namespace bingham {

enum class ZetaVariant { InverseN, InverseNPlusOne };
enum class Marking { Doerfler, Maximum };

std::string to_string(ZetaVariant v);
ZetaVariant parse_zeta_variant(const std::string& s);
std::string to_string(Marking m);
Marking parse_marking(const std::string& s);

/// +inf at N = 0 and 1/N afterwards; the shifted variant is 1/(N+1).
double zeta(int n, ZetaVariant variant = ZetaVariant::InverseN);

struct AdaptConfig {
  double theta = 0.5;
  Marking marking = Marking::Doerfler;
  double c_graph = 4.0;
  double criterion_exponent = 1.0;  // 1 or 1/2
  ZetaVariant zeta_variant = ZetaVariant::InverseN;
  JumpOwnership jumps = JumpOwnership::Split;
  int projection_degree = 1;  // stress projection in the estimator; 0 only for diagnostics
  std::optional<bool> estimator_convection;  // B[U,U] in the interior term; unset follows the model
  std::size_t max_elements = 2000;  // stop once a mesh this large has been solved on
  int max_outer = 1000;

  void validate() const;
};

struct ExactSolution {
  VectorFunction velocity;
  std::function<Grad2(Point)> gradient;
};

struct Problem {
  std::string name = "custom";
  RegularisedLaw law;  // law.m is the starting exponent
  VectorFunction f;
  VectorFunction dirichlet;  // empty means homogeneous
  int initial_divisions = 4;
  SolverConfig solver;
  AdaptConfig adapt;
  std::optional<ExactSolution> exact;
};

struct AdaptiveRecord {
  int step = 0;
  std::size_t noe = 0;
  int m = 0;
  int nit = 0;
  double e_pde = 0.0;
  double e_ic = 0.0;
  double eta = 0.0;
  double res_pde = 0.0;
  double res_ic = 0.0;
  std::optional<double> error_h1;
  double wall_s = 0.0;
  bool refined = false;  // false: the exponent was raised instead
  StopReason stop = StopReason::CriterionMet;
  int velocity_dofs = 0;
};

struct IterationRow {
  int step;
  InnerStep inner;
};

struct AdaptiveState {
  int n = 0;  // outer index N
  int m = 0;
  std::shared_ptr<const Triangulation> mesh;
  std::shared_ptr<const TaylorHoodSpace> space;
  FieldPair fields;
  IndicatorField indicators;  // at the last recorded iterate
  std::vector<AdaptiveRecord> history;
  std::vector<IterationRow> iterations;
};

using RecordCallback = std::function<void(const AdaptiveState&, const AdaptiveRecord&)>;
/// Checked after each record; true ends the run early.
using StopPredicate = std::function<bool(const AdaptiveState&)>;

/// The adaptive loop.  Each outer step runs the inner linearisation loop, logs
/// a record, then either refines (E >= eta) or raises m.  Stops after the
/// step whose mesh has at least adapt.max_elements cells, or after
/// adapt.max_outer steps.
AdaptiveState ailfem_run(const Problem& problem, const RecordCallback& on_record = {},
                         const StopPredicate& stop = {});

/// ||grad(u - U)||_2 by quadrature on the space's mesh.
double h1_error(const TaylorHoodSpace& space, const Vector& u, const ExactSolution& exact);

/// Poiseuille-Bingham channel profile with plug 0.2 < y < 0.8.
double channel_profile(double y);
double channel_profile_derivative(double y);

Problem experiment_channel();
/// method must be zarantonello or kacanov_convective.
Problem experiment_convective(Method method);

struct ErrorRow {
  std::size_t noe;
  std::optional<double> error_h1;
  double estimator;  // E^{1/2} + ||F_pde||
};

std::vector<ErrorRow> error_report(const AdaptiveState& state);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// The last record on each distinct mesh, in order.
std::vector<AdaptiveRecord> last_per_mesh(const std::vector<AdaptiveRecord>& history);

}  // namespace bingham
