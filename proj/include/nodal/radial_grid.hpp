#ifndef NODAL_RADIAL_GRID_HPP
#define NODAL_RADIAL_GRID_HPP

#include "nodal/common.hpp"

#include <functional>

namespace nodal {

/// Radial grid on a disk of radius r_end, stored in log-radius s = log r.
///
/// Node 0 represents the origin: r(0) == 0, and its value is taken constant
/// on the disk of radius exp(s_0). Functions are piecewise linear in s
/// between nodes (hat basis), and the last node sits on the boundary.
/// Masses are the lumped integrals int hat_i e^{2s} ds.
///
/// In these coordinates the 2D Dirichlet form reads
///   int |grad v|^2 dx = 2 pi int v_s^2 ds,   dx = 2 pi e^{2s} ds,
/// so the radial Laplacian becomes a plain 1D stiffness in s against the
/// weight e^{2s}.
class RadialGrid {
public:
  RadialGrid() = default;
  explicit RadialGrid(Eigen::VectorXd log_r);

  Eigen::Index size() const { return log_r_.size(); }
  const Eigen::VectorXd &log_r() const { return log_r_; }
  double log_r(Eigen::Index i) const { return log_r_(i); }
  double r(Eigen::Index i) const;
  Eigen::VectorXd radii() const;
  double r_end() const { return std::exp(log_r_(size() - 1)); }

  /// int hat_i e^{2s} ds, i.e. the node's share of area / (2 pi).
  Wide mass(Eigen::Index i) const { return mass_(i); }
  Wide log_mass(Eigen::Index i) const { return log_mass_(i); }
  const VectorXw &masses() const { return mass_; }

  /// log int hat_i e^{2s} e^{slope (s - s_i)} ds: lumped weight for an
  /// integrand that behaves like e^{slope s} near node i.
  Wide log_fitted_mass(Eigen::Index i, Wide slope) const;
  VectorXw log_fitted_masses(const VectorXw &slopes) const;

  /// Quadrature weight for int f dx (includes the 2 pi).
  Wide weight(Eigen::Index i) const { return 2 * kPiWide * mass_(i); }

  /// 1 / (s_{i+1} - s_i).
  double conductance(Eigen::Index i) const {
    return 1.0 / (log_r_(i + 1) - log_r_(i));
  }

  /// Same node layout translated in log-radius (radii multiplied by e^delta).
  RadialGrid shifted(double delta) const;

  template <typename Derived>
  Wide integrate(const Eigen::MatrixBase<Derived> &values) const {
    Wide acc = 0;
    for (Eigen::Index i = 0; i < size(); ++i) {
      acc += weight(i) * static_cast<Wide>(values(i));
    }
    return acc;
  }

private:
  Eigen::VectorXd log_r_;
  VectorXw mass_;
  VectorXw log_mass_;
};

/// Places n nodes on [s_begin, s_end] so that each interval carries the same
/// integral of the density. The density is sampled on `aux` (sorted, covering
/// the range) and treated as piecewise linear. Endpoints are always nodes.
Eigen::VectorXd equidistribute(double s_begin, double s_end, Eigen::Index n,
                               const Eigen::VectorXd &aux,
                               const Eigen::VectorXd &density);

/// Convenience overload sampling the density on a uniform auxiliary mesh.
Eigen::VectorXd equidistribute(double s_begin, double s_end, Eigen::Index n,
                               const std::function<double(double)> &density,
                               Eigen::Index aux_points = 20000);

} // namespace nodal

#endif // NODAL_RADIAL_GRID_HPP
