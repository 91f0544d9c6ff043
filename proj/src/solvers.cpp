#include "bingham/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace bingham {

std::string to_string(Method m) {
  switch (m) {
    case Method::Kacanov: return "kacanov";
    case Method::KacanovConvective: return "kacanov_convective";
    case Method::Zarantonello: return "zarantonello";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "kacanov") return Method::Kacanov;
  if (s == "kacanov_convective") return Method::KacanovConvective;
  if (s == "zarantonello") return Method::Zarantonello;
  throw std::invalid_argument("unknown method '" + s +
                              "' (accepted: kacanov, kacanov_convective, zarantonello)");
}

std::string to_string(DeltaRule r) { return r == DeltaRule::Fixed ? "fixed" : "adaptive_n"; }

DeltaRule parse_delta_rule(const std::string& s) {
  if (s == "fixed") return DeltaRule::Fixed;
  if (s == "adaptive_n") return DeltaRule::AdaptiveN;
  throw std::invalid_argument("unknown delta rule '" + s + "' (accepted: fixed, adaptive_n)");
}

std::string to_string(StopReason r) {
  return r == StopReason::CriterionMet ? "criterion_met" : "max_iterations";
}

void SolverConfig::validate() const {
  if (max_inner_iterations < 1) throw std::invalid_argument("SolverConfig: max_inner_iterations must be >= 1");
  if (delta_rule == DeltaRule::Fixed && !(delta > 0.0))
    throw std::invalid_argument("SolverConfig: fixed delta must be > 0");
  if (method == Method::Kacanov && convection)
    throw std::invalid_argument("SolverConfig: method kacanov has no convection term; use kacanov_convective");
  if (method == Method::KacanovConvective && !convection)
    throw std::invalid_argument("SolverConfig: kacanov_convective requires convection = true");
}

double SolverConfig::delta_for(int m) const {
  return delta_rule == DeltaRule::Fixed ? delta : std::ldexp(1.0, -m);
}

SaddleFactorization::SaddleFactorization(const TaylorHoodSpace& space, const SparseMatrix& a,
                                         const SparseMatrix& b, bool zero_mean)
    : space_(&space), zero_mean_(zero_mean) {
  const int nd = space.num_velocity_dofs();
  const int np = space.num_pressure_dofs();
  if (a.rows() != nd || a.cols() != nd) throw std::invalid_argument("solve_saddle: A block has wrong shape");
  if (b.rows() != np || b.cols() != nd) throw std::invalid_argument("solve_saddle: B block has wrong shape");
  const int n = nd + np;

  std::vector<Triplet> t;
  t.reserve(a.nonZeros() + 2 * b.nonZeros() + nd + 1);
  for (int r = 0; r < nd; ++r) {
    if (space.is_dirichlet(r)) {
      t.emplace_back(r, r, 1.0);
      continue;
    }
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) t.emplace_back(r, it.col(), it.value());
  }
  for (int k = 0; k < np; ++k)
    for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
      t.emplace_back(nd + k, it.col(), it.value());
      if (!space.is_dirichlet(it.col())) t.emplace_back(it.col(), nd + k, it.value());
    }
  shift_index_ = nd;
  if (zero_mean) t.emplace_back(shift_index_, shift_index_, 1.0);
  try {
    lu_.emplace(from_triplets(t, n, n));
  } catch (const SingularMatrixError& e) {
    const long p = e.pivot();
    std::string block = "unknown block";
    if (p >= 0 && p < nd) block = "velocity block (dof " + std::to_string(p) + ")";
    else if (p >= nd && p < nd + np) block = "pressure block (dof " + std::to_string(p - nd) + ")";
    throw SingularMatrixError("solve_saddle: singular saddle system, zero pivot in " + block +
                                  "; velocity dofs " + std::to_string(nd) + ", pressure dofs " +
                                  std::to_string(np) + (zero_mean ? "" : ", no zero-mean row") +
                                  ": " + e.what(),
                              p);
  }
  if (zero_mean) {
    border_ = Vector::Zero(n);
    border_.tail(np) = pressure_integrals(space);
    Vector e = Vector::Zero(n);
    e[shift_index_] = 1.0;
    x_shift_ = lu_->solve(e);
    x_border_ = lu_->solve(border_);
  }
}

FieldPair SaddleFactorization::solve(const Vector& rhs, double dirichlet_scale) const {
  const int nd = space_->num_velocity_dofs();
  const int np = space_->num_pressure_dofs();
  if (rhs.size() != nd) throw std::invalid_argument("solve_saddle: rhs has wrong length");
  Vector full = Vector::Zero(nd + np);
  full.head(nd) = rhs;
  const auto& dofs = space_->dirichlet_dofs();
  const auto& vals = space_->dirichlet_values();
  for (std::size_t i = 0; i < dofs.size(); ++i) full[dofs[i]] = dirichlet_scale * vals[i];
  Vector x = lu_->solve(full);
  if (zero_mean_) {
    // K x + c l = r, c^T x = 0 with K = K~ - e e^T.  Writing x = x_r + mu x_e - l x_c,
    // mu = e^T x closes the system.
    const int s = shift_index_;
    const double m11 = x_shift_[s] - 1.0;
    const double m12 = -x_border_[s];
    const double m21 = border_.dot(x_shift_);
    const double m22 = -border_.dot(x_border_);
    const double r1 = -x[s];
    const double r2 = -border_.dot(x);
    const double det = m11 * m22 - m12 * m21;
    if (det == 0.0 || !std::isfinite(det))
      throw SingularMatrixError("solve_saddle: singular zero-mean border", nd + np);
    const double mu = (r1 * m22 - m12 * r2) / det;
    const double lambda = (m11 * r2 - m21 * r1) / det;
    x += mu * x_shift_ - lambda * x_border_;
  }
  FieldPair out{x.head(nd), x.segment(nd, np)};
  if (zero_mean_) remove_pressure_mean(*space_, out.p);
  return out;
}

FieldPair solve_saddle(const TaylorHoodSpace& space, const SparseMatrix& a, const SparseMatrix& b,
                       const Vector& rhs, bool zero_mean) {
  return SaddleFactorization(space, a, b, zero_mean).solve(rhs);
}

FixedPointSolver::FixedPointSolver(const TaylorHoodSpace& space, const RegularisedLaw& law,
                                   const VectorFunction& f, SolverConfig config)
    : space_(&space),
      law_(law),
      config_(config),
      f_samples_(sample_at_quadrature(space, f)),
      load_(assemble_load_samples(space, f_samples_)),
      b_(assemble_b(space)),
      norms_(space) {
  law_.validate();
  config_.validate();
}

FieldPair FixedPointSolver::kacanov(const FieldPair& current, bool convection) {
  SparseMatrix a = assemble_a_n(*space_, law_, current.u);
  if (convection) a += assemble_convection(*space_, current.u);
  return solve_saddle(*space_, a, b_, load_);
}

FieldPair FixedPointSolver::zarantonello(const FieldPair& current, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("zarantonello_step: delta must be > 0");
  if (!riesz_lu_) {
    riesz_ = assemble_weighted_symmetric(
        *space_, std::vector<double>(space_->mesh().num_cells() * kNumQuad, 1.0));
    riesz_lu_ = std::make_unique<SaddleFactorization>(*space_, riesz_, b_);
  }
  const Vector f_u = operator_residual(*space_, law_, current.u, f_samples_, config_.convection);
  const Vector rhs = riesz_ * current.u - delta * f_u;
  // The multiplier solved for is delta * P.
  FieldPair next = riesz_lu_->solve(rhs);
  next.p /= delta;
  return next;
}

FieldPair FixedPointSolver::step(const FieldPair& current) {
  switch (config_.method) {
    case Method::Kacanov: return kacanov(current, false);
    case Method::KacanovConvective: return kacanov(current, true);
    case Method::Zarantonello: return zarantonello(current, config_.delta_for(law_.m));
  }
  throw std::logic_error("unreachable");
}

ResidualPair FixedPointSolver::residuals(const FieldPair& fields) const {
  ResidualPair r;
  r.pde = operator_residual(*space_, law_, fields.u, f_samples_, config_.convection);
  r.pde += b_.transpose() * fields.p;
  space_->zero_dirichlet(r.pde);
  r.ic = -(b_ * fields.u);
  return r;
}

double FixedPointSolver::energy(const Vector& u) const {
  return bingham::energy(*space_, law_, u, f_samples_);
}

FieldPair kacanov_step(const TaylorHoodSpace& space, const RegularisedLaw& law,
                       const FieldPair& current, const VectorFunction& f) {
  FixedPointSolver s(space, law, f, SolverConfig{});
  return s.kacanov(current, false);
}

FieldPair kacanov_convective_step(const TaylorHoodSpace& space, const RegularisedLaw& law,
                                  const FieldPair& current, const VectorFunction& f) {
  SolverConfig cfg;
  cfg.method = Method::KacanovConvective;
  cfg.convection = true;
  FixedPointSolver s(space, law, f, cfg);
  return s.kacanov(current, true);
}

FieldPair zarantonello_step(const TaylorHoodSpace& space, const RegularisedLaw& law,
                            const FieldPair& current, const VectorFunction& f, double delta,
                            bool convection) {
  SolverConfig cfg;
  cfg.method = Method::Zarantonello;
  cfg.convection = convection;
  FixedPointSolver s(space, law, f, cfg);
  return s.zarantonello(current, delta);
}

double inner_threshold(double estimator, const InnerThresholds& t) {
  const double e = t.criterion_exponent == 1.0 ? estimator : std::pow(estimator, t.criterion_exponent);
  return std::min(std::max(e, t.eta), t.zeta);
}

std::pair<FieldPair, InnerLoopReport> inner_loop(FixedPointSolver& solver, const FieldPair& start,
                                                 const InnerThresholds& thresholds) {
  const auto estimate = [&](const FieldPair& f) {
    return thresholds.estimator ? thresholds.estimator(f) : thresholds.estimator_value;
  };
  const auto& norms = solver.dual_norms();
  InnerLoopReport report;
  FieldPair current = start;

  if (!solver.config().force_min_one_step) {
    const ResidualPair r = solver.residuals(current);
    report.res_pde = norms.pde(r.pde);
    report.res_ic = norms.ic(r.ic);
    report.estimator = estimate(current);
    if (report.res_pde + report.res_ic < inner_threshold(report.estimator, thresholds))
      return {current, report};
  }

  while (true) {
    FieldPair next = solver.step(current);
    ++report.iterations;
    const ResidualPair r = solver.residuals(next);
    InnerStep s{};
    s.inner = report.iterations;
    s.energy = solver.energy(next.u);
    s.res_pde = norms.pde(r.pde);
    s.res_ic = norms.ic(r.ic);
    s.estimator = estimate(next);
    s.increment = field_norm(solver.space(), next.u - current.u, NormKind::H1Velocity);
    report.trace.push_back(s);
    report.res_pde = s.res_pde;
    report.res_ic = s.res_ic;
    report.estimator = s.estimator;
    current = std::move(next);
    if (s.res_pde + s.res_ic < inner_threshold(s.estimator, thresholds)) {
      report.stop = StopReason::CriterionMet;
      break;
    }
    if (report.iterations >= solver.config().max_inner_iterations) {
      report.stop = StopReason::MaxIterations;
      break;
    }
  }
  return {current, report};
}

}  // namespace bingham
