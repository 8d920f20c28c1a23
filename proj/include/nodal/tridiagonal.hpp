#ifndef NODAL_TRIDIAGONAL_HPP
#define NODAL_TRIDIAGONAL_HPP

#include "nodal/common.hpp"

#include <cmath>

namespace nodal {

// Symmetric tridiagonal matrix: diag(i) and off(i) couples i and i+1.
template <typename Scalar>
struct SymTridiagonal {
  Vector<Scalar> diag;
  Vector<Scalar> off;

  Eigen::Index size() const { return diag.size(); }

  Vector<Scalar> operator*(const Vector<Scalar> &x) const {
    const Eigen::Index n = size();
    Vector<Scalar> y = diag.cwiseProduct(x);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      y(i) += off(i) * x(i + 1);
      y(i + 1) += off(i) * x(i);
    }
    return y;
  }
};

// Gaussian elimination with partial pivoting for a tridiagonal system
// (LAPACK gtsv scheme). Works for indefinite matrices such as Newton
// Jacobians of the Lane-Emden problem. Returns false on an exactly
// singular pivot.
template <typename Scalar>
bool solve_tridiagonal(Vector<Scalar> lower, Vector<Scalar> diag,
                       Vector<Scalar> upper, Vector<Scalar> &rhs) {
  using std::abs;
  const Eigen::Index n = diag.size();
  if (n == 0) {
    return true;
  }
  // second superdiagonal created by row swaps
  Vector<Scalar> upper2 = Vector<Scalar>::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (abs(diag(i)) >= abs(lower(i))) {
      if (diag(i) == Scalar(0)) {
        return false;
      }
      const Scalar f = lower(i) / diag(i);
      diag(i + 1) -= f * upper(i);
      rhs(i + 1) -= f * rhs(i);
      lower(i) = Scalar(0);
    } else {
      const Scalar f = diag(i) / lower(i);
      diag(i) = lower(i);
      const Scalar tmp = diag(i + 1);
      diag(i + 1) = upper(i) - f * tmp;
      if (i + 2 < n) {
        upper2(i) = upper(i + 1);
        upper(i + 1) = -f * upper2(i);
      }
      upper(i) = tmp;
      std::swap(rhs(i), rhs(i + 1));
      rhs(i + 1) -= f * rhs(i);
    }
  }
  if (diag(n - 1) == Scalar(0)) {
    return false;
  }
  rhs(n - 1) /= diag(n - 1);
  if (n > 1) {
    rhs(n - 2) = (rhs(n - 2) - upper(n - 2) * rhs(n - 1)) / diag(n - 2);
  }
  for (Eigen::Index i = n - 3; i >= 0; --i) {
    rhs(i) = (rhs(i) - upper(i) * rhs(i + 1) - upper2(i) * rhs(i + 2)) /
             diag(i);
  }
  return true;
}

template <typename Scalar>
bool solve_tridiagonal(const SymTridiagonal<Scalar> &a, Vector<Scalar> &rhs) {
  return solve_tridiagonal<Scalar>(a.off, a.diag, a.off, rhs);
}

} // namespace nodal

#endif // NODAL_TRIDIAGONAL_HPP
