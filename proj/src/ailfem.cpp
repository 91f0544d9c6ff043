#include "bingham/ailfem.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bingham/forms.hpp"

namespace bingham {

std::string to_string(ZetaVariant v) {
  return v == ZetaVariant::InverseN ? "inverse_n" : "inverse_n_plus_one";
}

ZetaVariant parse_zeta_variant(const std::string& s) {
  if (s == "inverse_n") return ZetaVariant::InverseN;
  if (s == "inverse_n_plus_one") return ZetaVariant::InverseNPlusOne;
  throw std::invalid_argument("unknown zeta variant '" + s +
                              "' (accepted: inverse_n, inverse_n_plus_one)");
}

std::string to_string(Marking m) { return m == Marking::Doerfler ? "doerfler" : "maximum"; }

Marking parse_marking(const std::string& s) {
  if (s == "doerfler") return Marking::Doerfler;
  if (s == "maximum") return Marking::Maximum;
  throw std::invalid_argument("unknown marking '" + s + "' (accepted: doerfler, maximum)");
}

double zeta(int n, ZetaVariant variant) {
  if (n < 0) throw std::invalid_argument("zeta: N must be >= 0");
  if (variant == ZetaVariant::InverseNPlusOne) return 1.0 / (n + 1.0);
  return n == 0 ? std::numeric_limits<double>::infinity() : 1.0 / n;
}

void AdaptConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("adapt.theta must lie in (0, 1]");
  if (!(c_graph > 0.0)) throw std::invalid_argument("adapt.C_graph must be > 0");
  if (criterion_exponent != 1.0 && criterion_exponent != 0.5)
    throw std::invalid_argument("adapt.criterion_exponent must be 1 or 0.5");
  if (projection_degree != 0 && projection_degree != 1)
    throw std::invalid_argument("adapt.projection_degree must be 0 or 1");
  if (max_elements < 1) throw std::invalid_argument("budget.max_elements must be >= 1");
  if (max_outer < 1) throw std::invalid_argument("budget.max_outer must be >= 1");
}

double h1_error(const TaylorHoodSpace& space, const Vector& u, const ExactSolution& exact) {
  const int nn = space.num_nodes();
  double s = 0.0;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    for (int q = 0; q < kNumQuad; ++q) {
      const Grad2 g = velocity_gradient(e, u, nn, q);
      const Grad2 x = exact.gradient(e.x[q]);
      const double dxx = g.xx - x.xx, dxy = g.xy - x.xy, dyx = g.yx - x.yx, dyy = g.yy - x.yy;
      s += e.jw[q] * (dxx * dxx + dxy * dxy + dyx * dyx + dyy * dyy);
    }
  }
  return std::sqrt(s);
}

AdaptiveState ailfem_run(const Problem& problem, const RecordCallback& on_record,
                         const StopPredicate& stop) {
  problem.adapt.validate();
  problem.solver.validate();
  problem.law.validate();
  const AdaptConfig& adapt = problem.adapt;
  RegularisedLaw law = problem.law;

  AdaptiveState state;
  state.m = law.m;
  state.mesh = std::make_shared<const Triangulation>(build_structured_unit_square(problem.initial_divisions));
  state.space = std::make_shared<const TaylorHoodSpace>(state.mesh, problem.dirichlet);
  state.fields = boundary_lift(*state.space);
  auto solver = std::make_unique<FixedPointSolver>(*state.space, law, problem.f, problem.solver);
  const IndicatorOptions options{adapt.estimator_convection.value_or(problem.solver.convection), adapt.jumps,
                                 adapt.projection_degree};
  const auto t0 = std::chrono::steady_clock::now();

  for (state.n = 0;; ++state.n) {
    law.m = state.m;
    solver->set_law(law);

    IndicatorField last;
    InnerThresholds thresholds;
    thresholds.estimator = [&](const FieldPair& fp) {
      last = element_indicators(*state.space, law, fp, solver->f_samples(), options);
      return global_estimator(last).e;
    };
    thresholds.eta = graph_bound_eta(law, adapt.c_graph);
    thresholds.zeta = zeta(state.n, adapt.zeta_variant);
    thresholds.criterion_exponent = adapt.criterion_exponent;

    auto [fields, report] = inner_loop(*solver, state.fields, thresholds);
    state.fields = std::move(fields);
    state.indicators = std::move(last);
    const GlobalEstimate g = global_estimator(state.indicators);

    AdaptiveRecord rec;
    rec.step = state.n;
    rec.noe = state.mesh->num_cells();
    rec.m = state.m;
    rec.nit = report.iterations;
    rec.e_pde = g.e_pde;
    rec.e_ic = g.e_ic;
    rec.eta = thresholds.eta;
    rec.res_pde = report.res_pde;
    rec.res_ic = report.res_ic;
    if (problem.exact) rec.error_h1 = h1_error(*state.space, state.fields.u, *problem.exact);
    rec.stop = report.stop;
    rec.refined = g.e >= thresholds.eta;
    rec.velocity_dofs = state.space->num_velocity_dofs();
    rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const InnerStep& s : report.trace) state.iterations.push_back({state.n, s});
    state.history.push_back(rec);
    if (on_record) on_record(state, rec);

    if (rec.noe >= adapt.max_elements || state.n + 1 >= adapt.max_outer) break;
    if (stop && stop(state)) break;

    if (rec.refined) {
      const auto total = state.indicators.total();
      const std::vector<int> marked = adapt.marking == Marking::Doerfler
                                          ? mark_doerfler(std::span<const double>(total), adapt.theta)
                                          : mark_maximum(std::span<const double>(total), adapt.theta);
      auto mesh = std::make_shared<const Triangulation>(refine(*state.mesh, marked));
      auto space = std::make_shared<const TaylorHoodSpace>(mesh, problem.dirichlet);
      state.fields = prolongate(*state.space, *space, state.fields);
      solver.reset();
      state.mesh = std::move(mesh);
      state.space = std::move(space);
      solver = std::make_unique<FixedPointSolver>(*state.space, law, problem.f, problem.solver);
    } else {
      ++state.m;
    }
  }
  return state;
}

double channel_profile(double y) {
  if (y <= 0.2) return 0.2 * y - 0.5 * y * y;
  if (y < 0.8) return 0.02;
  const double d = y - 0.8;
  return 0.02 - 0.5 * d * d;
}

double channel_profile_derivative(double y) {
  if (y <= 0.2) return 0.2 - y;
  if (y < 0.8) return 0.0;
  return 0.8 - y;
}

Problem experiment_channel() {
  Problem p;
  p.name = "channel";
  p.law = RegularisedLaw{0.3, 1.0, 0, std::numbers::sqrt2};
  p.f = [](Point) { return Vec2{1.0, 0.0}; };
  p.dirichlet = [](Point x) { return Vec2{channel_profile(x.y), 0.0}; };
  p.initial_divisions = 4;
  p.solver.method = Method::Kacanov;
  p.solver.convection = false;
  p.adapt.c_graph = 4.0;
  p.exact = ExactSolution{
      [](Point x) { return Vec2{channel_profile(x.y), 0.0}; },
      [](Point x) { return Grad2{0.0, channel_profile_derivative(x.y), 0.0, 0.0}; }};
  return p;
}

Problem experiment_convective(Method method) {
  if (method == Method::Kacanov)
    throw std::invalid_argument("experiment_convective: method must be zarantonello or kacanov_convective");
  Problem p;
  p.name = "convective";
  p.law = RegularisedLaw{0.3, 1.0, 0, 1.0};
  p.f = [](Point x) {
    constexpr double pi = std::numbers::pi;
    return Vec2{std::sin(pi * x.x) * std::cos(pi * x.y) - std::cos(pi * x.x) * std::sin(pi * x.y),
                x.x * x.y};
  };
  p.initial_divisions = 4;
  p.solver.method = method;
  p.solver.convection = true;
  p.solver.delta_rule = DeltaRule::AdaptiveN;
  p.adapt.c_graph = 4.0;
  return p;
}

std::vector<ErrorRow> error_report(const AdaptiveState& state) {
  std::vector<ErrorRow> rows;
  rows.reserve(state.history.size());
  for (const AdaptiveRecord& r : state.history)
    rows.push_back({r.noe, r.error_h1, std::sqrt(r.e_pde + r.e_ic) + r.res_pde});
  return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("loglog_slope: all x values coincide");
  return (n * sxy - sx * sy) / den;
}

std::vector<AdaptiveRecord> last_per_mesh(const std::vector<AdaptiveRecord>& history) {
  std::vector<AdaptiveRecord> out;
  for (std::size_t i = 0; i < history.size(); ++i)
    if (i + 1 == history.size() || history[i + 1].noe != history[i].noe) out.push_back(history[i]);
  return out;
}

}  // namespace bingham
