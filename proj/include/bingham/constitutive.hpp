#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace bingham {

/// Symmetric 2x2 tensor.
struct SymTensor {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

inline SymTensor operator+(SymTensor a, SymTensor b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
inline SymTensor operator-(SymTensor a, SymTensor b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
inline SymTensor operator*(double s, SymTensor a) { return {s * a.xx, s * a.xy, s * a.yy}; }
/// Frobenius product A:B.
inline double ddot(SymTensor a, SymTensor b) { return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy; }
inline double frobenius(SymTensor a) { return std::sqrt(ddot(a, a)); }

/// Bercovier-Engelman regularised Bingham law with graph index n = 2^m.
///
/// `kappa` scales the yield stress entering the tensor law (effective yield
/// kappa * sigma).  kappa = 1 is the plain Frobenius-norm law; kappa = sqrt(2)
/// makes sigma the yield value of the shear component in simple shear.
struct RegularisedLaw {
  double sigma = 0.3;
  double nu = 1.0;
  int m = 0;
  double kappa = 1.0;

  [[nodiscard]] double n() const { return std::ldexp(1.0, m); }
  [[nodiscard]] double yield() const { return kappa * sigma; }
  void validate() const;
};

/// mu_n(t) = kappa sigma / sqrt(t + n^-2) + 2 nu, t >= 0.
double mu_n(const RegularisedLaw& law, double t);

/// S^n(D) = mu_n(|D|^2) D.
SymTensor s_n(const RegularisedLaw& law, SymTensor d);

/// Exact selection of the Bingham graph: 0 at D = 0, else sigma D/|D| + 2 nu D.
SymTensor s_star(const RegularisedLaw& law, SymTensor d);

/// Computable graph-approximation bound C / 2^{2m/3}.
double graph_bound_eta(const RegularisedLaw& law, double c_graph);

struct KacanovConstants {
  double q_con;               // energy contraction factor
  double aposteriori_factor;  // (sigma n + 2 nu) / nu
  double energy_lower;        // nu / 2
  double energy_upper;        // (sqrt3 sigma n + 2 nu) / 2
  double velocity_factor;     // sqrt((sqrt3 sigma n + 2 nu) / nu)
  double pressure_factor;     // (sqrt3 sigma n / nu + 3)(sigma n + 2 nu), divide by beta
  double residual_factor;     // 2 sqrt3 sigma^2 n^2 / nu + 5 (sqrt3 + 1) sigma n + 12 nu
};

KacanovConstants kacanov_constants(const RegularisedLaw& law);

class SmallDataError : public std::domain_error {
 public:
  SmallDataError(double f_dual_norm, double threshold);
  [[nodiscard]] double f_dual_norm() const { return f_; }
  [[nodiscard]] double threshold() const { return threshold_; }

 private:
  double f_;
  double threshold_;
};

struct ZarantonelloConstants {
  double c_b;
  double f_dual_norm;
  double radius_min;
  double radius_max;
  double radius;           // radius at which nu_F and L_F are evaluated
  double nu_f;             // nu - sqrt2 C_B R
  double l_f;              // sqrt3 sigma n + 2 nu + 2 sqrt2 C_B R
  double delta_max;        // 2 nu_F / L_F^2 (strict upper bound)
  double delta_self_map;   // 2 / (4 nu + sigma n)
};

/// Self-map window and damping bound for the Zarantonello iteration.  `radius`
/// defaults to the lower window endpoint.  Throws SmallDataError when
/// ||f||_* >= nu^2 / (2 sqrt2 C_B).
ZarantonelloConstants zarantonello_constants(const RegularisedLaw& law, double c_b,
                                             double f_dual_norm,
                                             std::optional<double> radius = std::nullopt);

}  // namespace bingham
