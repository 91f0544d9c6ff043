#include "bingham/constitutive.hpp"

#include <numbers>

namespace bingham {

void RegularisedLaw::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("RegularisedLaw: sigma must be >= 0");
  if (!(nu > 0.0)) throw std::invalid_argument("RegularisedLaw: nu must be > 0");
  if (m < 0) throw std::invalid_argument("RegularisedLaw: m must be >= 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("RegularisedLaw: kappa must be > 0");
}

double mu_n(const RegularisedLaw& law, double t) {
  const double inv_n = 1.0 / law.n();
  return law.yield() / std::sqrt(t + inv_n * inv_n) + 2.0 * law.nu;
}

SymTensor s_n(const RegularisedLaw& law, SymTensor d) { return mu_n(law, ddot(d, d)) * d; }

SymTensor s_star(const RegularisedLaw& law, SymTensor d) {
  const double norm = frobenius(d);
  if (norm == 0.0) return {};
  return (law.yield() / norm + 2.0 * law.nu) * d;
}

double graph_bound_eta(const RegularisedLaw& law, double c_graph) {
  if (!(c_graph > 0.0)) throw std::invalid_argument("graph_bound_eta: C must be > 0");
  return c_graph * std::exp2(-2.0 * law.m / 3.0);
}

KacanovConstants kacanov_constants(const RegularisedLaw& law) {
  law.validate();
  constexpr double sqrt3 = std::numbers::sqrt3;
  const double sn = law.yield() * law.n();
  const double nu = law.nu;
  const double upper = sqrt3 * sn + 2.0 * nu;
  const double bound = sn + 2.0 * nu;
  KacanovConstants k{};
  k.q_con = 1.0 - nu * nu * nu / (upper * bound * bound);
  k.aposteriori_factor = bound / nu;
  k.energy_lower = 0.5 * nu;
  k.energy_upper = 0.5 * upper;
  k.velocity_factor = std::sqrt(upper / nu);
  k.pressure_factor = (sqrt3 * sn / nu + 3.0) * bound;
  k.residual_factor = 2.0 * sqrt3 * sn * sn / nu + 5.0 * (sqrt3 + 1.0) * sn + 12.0 * nu;
  return k;
}

SmallDataError::SmallDataError(double f_dual_norm, double threshold)
    : std::domain_error("small-data condition violated: ||f||_* = " + std::to_string(f_dual_norm) +
                        " is not below nu^2/(2 sqrt2 C_B) = " + std::to_string(threshold)),
      f_(f_dual_norm),
      threshold_(threshold) {}

ZarantonelloConstants zarantonello_constants(const RegularisedLaw& law, double c_b,
                                             double f_dual_norm, std::optional<double> radius) {
  law.validate();
  if (!(c_b > 0.0)) throw std::invalid_argument("zarantonello_constants: C_B must be > 0");
  if (f_dual_norm < 0.0) throw std::invalid_argument("zarantonello_constants: ||f||_* < 0");
  constexpr double sqrt2 = std::numbers::sqrt2;
  const double nu = law.nu;
  const double threshold = nu * nu / (2.0 * sqrt2 * c_b);
  if (!(f_dual_norm < threshold)) throw SmallDataError(f_dual_norm, threshold);

  ZarantonelloConstants z{};
  z.c_b = c_b;
  z.f_dual_norm = f_dual_norm;
  const double root = std::sqrt(nu * nu - 2.0 * sqrt2 * c_b * f_dual_norm);
  z.radius_min = (nu - root) / (2.0 * sqrt2 * c_b);
  z.radius_max = (nu + root) / (2.0 * sqrt2 * c_b);
  z.radius = radius.value_or(z.radius_min);
  if (z.radius < z.radius_min || z.radius > z.radius_max)
    throw std::invalid_argument("zarantonello_constants: radius outside the self-map window");
  const double sn = law.yield() * law.n();
  z.nu_f = nu - sqrt2 * c_b * z.radius;
  z.l_f = std::numbers::sqrt3 * sn + 2.0 * nu + 2.0 * sqrt2 * c_b * z.radius;
  z.delta_max = 2.0 * z.nu_f / (z.l_f * z.l_f);
  z.delta_self_map = 2.0 / (4.0 * nu + sn);
  return z;
}

}  // namespace bingham
