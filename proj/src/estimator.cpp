#include "bingham/estimator.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "bingham/forms.hpp"

namespace bingham {

namespace {

SymTensor p1_value(const std::array<SymTensor, 3>& t, const std::array<double, 3>& l) {
  return l[0] * t[0] + l[1] * t[1] + l[2] * t[2];
}

// div of a P1 tensor: (div T)_a = sum_l d_l T_al.
Vec2 p1_divergence(const std::array<SymTensor, 3>& t, const std::array<Point, 3>& gl) {
  Vec2 d{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    d[0] += t[i].xx * gl[i].x + t[i].xy * gl[i].y;
    d[1] += t[i].xy * gl[i].x + t[i].yy * gl[i].y;
  }
  return d;
}

void check_theta(double theta, const char* who) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument(std::string(who) + ": theta must lie in (0, 1]");
}

}  // namespace

std::vector<double> IndicatorField::total() const {
  std::vector<double> t(eta_pde.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = eta_pde[k] + eta_ic[k];
  return t;
}

ProjectedStress project_pi_n(const TaylorHoodSpace& space, const RegularisedLaw& law, const Vector& u,
                             int degree) {
  if (degree != 0 && degree != 1) throw std::invalid_argument("project_pi_n: degree must be 0 or 1");
  const int nn = space.num_nodes();
  ProjectedStress out(space.mesh().num_cells());
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const ElementData e = space.element(c);
    std::array<SymTensor, 3> rhs{};
    for (int q = 0; q < kNumQuad; ++q) {
      const SymTensor s = s_n(law, sym(velocity_gradient(e, u, nn, q)));
      for (int i = 0; i < 3; ++i) rhs[i] = rhs[i] + (e.jw[q] * e.lambda[q][i]) * s;
    }
    if (degree == 0) {
      // barycentric weights sum to one, so the three moments add up to int S
      const SymTensor mean = (1.0 / e.area) * (rhs[0] + rhs[1] + rhs[2]);
      out[c] = {mean, mean, mean};
      continue;
    }
    // Inverse of the P1 mass matrix |K|/12 [[2,1,1],[1,2,1],[1,1,2]].
    const double f = 3.0 / e.area;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      const int k = (i + 2) % 3;
      out[c][i] = f * (3.0 * rhs[i] - rhs[j] - rhs[k]);
    }
  }
  return out;
}

IndicatorField element_indicators(const TaylorHoodSpace& space, const RegularisedLaw& law,
                                  const FieldPair& fields, const std::vector<Vec2>& f_samples,
                                  const IndicatorOptions& options) {
  const Triangulation& mesh = space.mesh();
  const std::size_t nc = mesh.num_cells();
  if (f_samples.size() != nc * kNumQuad)
    throw std::invalid_argument("element_indicators: expected kNumQuad samples per cell");
  const int nn = space.num_nodes();
  const Vector& u = fields.u;
  const Vector& p = fields.p;
  const ProjectedStress pi = project_pi_n(space, law, u, options.projection_degree);
  std::vector<Vec2> conv;
  if (options.convection) conv = convection_strong_form(space, u);

  IndicatorField ind;
  ind.interior.assign(nc, 0.0);
  ind.jump.assign(nc, 0.0);
  ind.oscillation.assign(nc, 0.0);
  ind.eta_ic.assign(nc, 0.0);

  for (std::size_t c = 0; c < nc; ++c) {
    const ElementData e = space.element(c);
    const Vec2 div_pi = p1_divergence(pi[c], e.grad_lambda);
    Vec2 grad_p{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      grad_p[0] += p[e.vertices[i]] * e.grad_lambda[i].x;
      grad_p[1] += p[e.vertices[i]] * e.grad_lambda[i].y;
    }
    double interior = 0.0;
    double osc = 0.0;
    double div2 = 0.0;
    for (int q = 0; q < kNumQuad; ++q) {
      const std::size_t iq = c * kNumQuad + q;
      const Grad2 g = velocity_gradient(e, u, nn, q);
      Vec2 r{-div_pi[0] + grad_p[0] - f_samples[iq][0], -div_pi[1] + grad_p[1] - f_samples[iq][1]};
      if (options.convection) {
        r[0] += conv[iq][0];
        r[1] += conv[iq][1];
      }
      interior += e.jw[q] * (r[0] * r[0] + r[1] * r[1]);
      const SymTensor d = s_n(law, sym(g)) - p1_value(pi[c], e.lambda[q]);
      osc += e.jw[q] * ddot(d, d);
      const double dv = g.xx + g.yy;
      div2 += e.jw[q] * dv * dv;
    }
    ind.interior[c] = e.area * interior;  // h_K^2 = |K|
    ind.oscillation[c] = osc;
    ind.eta_ic[c] = div2;
  }

  const double share = options.jumps == JumpOwnership::Split ? 0.5 : 1.0;
  for (std::size_t ed = 0; ed < mesh.num_edges(); ++ed) {
    if (mesh.is_boundary_edge(ed)) continue;
    const auto& vs = mesh.edge(ed);
    const auto& cs = mesh.edge_cells(ed);
    const Point a = mesh.vertex(vs[0]);
    const Point b = mesh.vertex(vs[1]);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const Point n{(b.y - a.y) / len, -(b.x - a.x) / len};  // fixed orientation; jump sign is irrelevant

    // Local slots of the edge endpoints in both cells.
    std::array<std::array<int, 2>, 2> slot{};
    for (int s = 0; s < 2; ++s) {
      const Cell& cell = mesh.cell(cs[s]);
      for (int k = 0; k < 3; ++k) {
        if (cell[k] == vs[0]) slot[s][0] = k;
        if (cell[k] == vs[1]) slot[s][1] = k;
      }
    }
    double jump2 = 0.0;
    for (const EdgePoint& ep : kEdgeRule) {
      const double pv = (1.0 - ep.s) * p[vs[0]] + ep.s * p[vs[1]];
      std::array<SymTensor, 2> t{};
      for (int s = 0; s < 2; ++s) {
        std::array<double, 3> l{0.0, 0.0, 0.0};
        l[slot[s][0]] = 1.0 - ep.s;
        l[slot[s][1]] = ep.s;
        t[s] = p1_value(pi[cs[s]], l);
        t[s].xx -= pv;
        t[s].yy -= pv;
      }
      const SymTensor d = t[0] - t[1];
      const double jx = d.xx * n.x + d.xy * n.y;
      const double jy = d.xy * n.x + d.yy * n.y;
      jump2 += ep.weight * len * (jx * jx + jy * jy);
    }
    const double contrib = share * len * jump2;  // h_e ||[.]||^2_e
    ind.jump[cs[0]] += contrib;
    ind.jump[cs[1]] += contrib;
  }

  ind.eta_pde.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) ind.eta_pde[c] = ind.interior[c] + ind.jump[c] + ind.oscillation[c];
  return ind;
}

IndicatorField element_indicators(const TaylorHoodSpace& space, const RegularisedLaw& law,
                                  const FieldPair& fields, const VectorFunction& f,
                                  const IndicatorOptions& options) {
  return element_indicators(space, law, fields, sample_at_quadrature(space, f), options);
}

GlobalEstimate global_estimator(const IndicatorField& ind) {
  GlobalEstimate g;
  g.e_pde = std::accumulate(ind.eta_pde.begin(), ind.eta_pde.end(), 0.0);
  g.e_ic = std::accumulate(ind.eta_ic.begin(), ind.eta_ic.end(), 0.0);
  g.e = g.e_pde + g.e_ic;
  return g;
}

std::vector<int> mark_doerfler(std::span<const double> eta, double theta) {
  check_theta(theta, "mark_doerfler");
  std::vector<int> order(eta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta[a] > eta[b]; });
  double total = 0.0;
  for (int k : order) total += eta[k];
  std::vector<int> marked;
  if (!(total > 0.0)) return marked;
  double sum = 0.0;
  for (int k : order) {
    if (!(eta[k] > 0.0)) break;
    marked.push_back(k);
    sum += eta[k];
    if (sum >= theta * total) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

std::vector<int> mark_doerfler(const IndicatorField& ind, double theta) {
  const auto t = ind.total();
  return mark_doerfler(std::span<const double>(t), theta);
}

std::vector<int> mark_maximum(std::span<const double> eta, double theta) {
  check_theta(theta, "mark_maximum");
  std::vector<int> marked;
  if (eta.empty()) return marked;
  const double mx = *std::max_element(eta.begin(), eta.end());
  if (!(mx > 0.0)) return marked;
  for (std::size_t k = 0; k < eta.size(); ++k)
    if (eta[k] >= theta * mx) marked.push_back(static_cast<int>(k));
  return marked;
}

std::vector<int> mark_maximum(const IndicatorField& ind, double theta) {
  const auto t = ind.total();
  return mark_maximum(std::span<const double>(t), theta);
}

void write_indicators_csv(std::ostream& os, const IndicatorField& ind) {
  os << "cell,eta_pde,eta_ic\n";
  os.precision(17);
  for (std::size_t c = 0; c < ind.eta_pde.size(); ++c)
    os << c << ',' << ind.eta_pde[c] << ',' << ind.eta_ic[c] << '\n';
}

}  // namespace bingham
