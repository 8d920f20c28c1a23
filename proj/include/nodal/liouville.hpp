#ifndef NODAL_LIOUVILLE_HPP
#define NODAL_LIOUVILLE_HPP

#include "nodal/common.hpp"
#include "nodal/lane_emden.hpp"

#include <cmath>
#include <utility>

namespace nodal {

/// Entire solution U(x) = log (1 + |x|^2/8)^{-2} of -Delta U = e^U on R^2,
/// U(0) = 0, total mass 8 pi. All evaluators take the radius |x|.
struct LiouvilleBubble {
  static double value(double r) { return -2.0 * std::log1p(r * r / 8.0); }
  /// dU/dr
  static double derivative(double r) { return -0.5 * r / (1.0 + r * r / 8.0); }
  static double weight(double r) {
    const double q = 1.0 + r * r / 8.0;
    return 1.0 / (q * q);
  }
  /// log e^U, accurate for large r.
  static double log_weight(double r) { return value(r); }
  /// Closed form of int_{B_R} e^U.
  static double mass_closed_form(double R) {
    return 8.0 * kPi * (1.0 - 1.0 / (1.0 + R * R / 8.0));
  }
};

/// Quadrature of e^U over B_R.
double bubble_mass(double R);

/// v_p^+(s) = p (u(mu s) - u(0)) / u(0) on scaled radii s in [0, s_max].
struct RescaledProfile {
  double p = 0;
  int K = 0;
  double s_max = 0;
  Eigen::VectorXd s;
  Eigen::VectorXd v;
  Eigen::VectorXd dv;
};

/// Samples the profile on the solution's nodes inside the window; the
/// derivative uses nonuniform centered differences of the stored values.
RescaledProfile rescale_profile(const StationarySolution &sol, double s_max);

struct ConvergenceMetric {
  double value_error;
  double derivative_error;
};

ConvergenceMetric convergence_metric(const RescaledProfile &profile,
                                     double r_cmp);

} // namespace nodal

#endif // NODAL_LIOUVILLE_HPP
