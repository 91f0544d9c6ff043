#pragma once

#include <array>

namespace bingham {

struct QuadPoint {
  double l1;  // barycentric coordinates 2 and 3; the first is 1 - l1 - l2
  double l2;
  double weight;  // reference triangle, weights sum to 1/2
};

namespace detail {

constexpr std::array<QuadPoint, 16> make_degree8_rule() {
  // Symmetric 16-point rule exact for total degree 8 (Dunavant's orbit
  // structure; values re-solved from the moment equations to full precision).
  constexpr double w0 = 0.14431560767778716825;
  constexpr double a[3] = {0.45929258829272315603, 0.17056930775176020662,
                           0.050547228317030975458};
  constexpr double wa[3] = {0.095091634267284624794, 0.10321737053471825028,
                            0.032458497623198080311};
  constexpr double b = 0.26311282963463811342;
  constexpr double c = 0.0083947774099576053372;
  constexpr double wb = 0.027230314174434994265;

  std::array<QuadPoint, 16> q{};
  int i = 0;
  q[i++] = {1.0 / 3.0, 1.0 / 3.0, 0.5 * w0};
  for (int k = 0; k < 3; ++k) {
    const double o = 1.0 - 2.0 * a[k];
    q[i++] = {a[k], a[k], 0.5 * wa[k]};
    q[i++] = {o, a[k], 0.5 * wa[k]};
    q[i++] = {a[k], o, 0.5 * wa[k]};
  }
  const double o = 1.0 - b - c;
  q[i++] = {b, c, 0.5 * wb};
  q[i++] = {c, b, 0.5 * wb};
  q[i++] = {o, b, 0.5 * wb};
  q[i++] = {b, o, 0.5 * wb};
  q[i++] = {o, c, 0.5 * wb};
  q[i++] = {c, o, 0.5 * wb};
  return q;
}

}  // namespace detail

/// The single volume rule used by every form and indicator.
inline constexpr std::array<QuadPoint, 16> kTriangleRule = detail::make_degree8_rule();

struct EdgePoint {
  double s;  // position along the edge in [0, 1]
  double weight;  // weights sum to 1
};

/// 3-point Gauss-Legendre on [0, 1]; exact for degree 5.
inline constexpr std::array<EdgePoint, 3> kEdgeRule = {{
    {0.5 - 0.38729833462074168852, 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.5 + 0.38729833462074168852, 5.0 / 18.0},
}};

}  // namespace bingham
