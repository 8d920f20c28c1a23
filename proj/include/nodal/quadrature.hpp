#ifndef NODAL_QUADRATURE_HPP
#define NODAL_QUADRATURE_HPP

#include "nodal/common.hpp"

#include <cmath>
#include <utility>

namespace nodal {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> gauss_legendre(int n) {
  Vector<Scalar> x(n), w(n);
  const Scalar pi = Scalar(3.141592653589793238462643383279502884L);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar z = std::cos(pi * (i + Scalar(0.75)) / (n + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        const Scalar p2 = p1;
        p1 = p0;
        p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      const Scalar dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < std::numeric_limits<Scalar>::epsilon()) {
        break;
      }
    }
    x(i) = -z;
    x(n - 1 - i) = z;
    w(i) = w(n - 1 - i) = 2 / ((1 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Composite Gauss-Legendre over [a, b] split into `panels` equal pieces.
template <typename Scalar, typename F>
Scalar integrate_panels(F &&f, Scalar a, Scalar b, int panels, int order = 16) {
  static thread_local int cached_order = -1;
  static thread_local std::pair<Vector<Scalar>, Vector<Scalar>> rule;
  if (cached_order != order) {
    rule = gauss_legendre<Scalar>(order);
    cached_order = order;
  }
  const Scalar h = (b - a) / panels;
  Scalar acc = 0;
  for (int k = 0; k < panels; ++k) {
    const Scalar mid = a + (k + Scalar(0.5)) * h;
    for (int j = 0; j < order; ++j) {
      acc += rule.second(j) * f(mid + h / 2 * rule.first(j));
    }
  }
  return acc * h / 2;
}

} // namespace nodal

#endif // NODAL_QUADRATURE_HPP
