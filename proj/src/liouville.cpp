#include "nodal/liouville.hpp"

#include "nodal/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace nodal {

double bubble_mass(double R) {
  if (!(R > 0)) {
    throw NumericalError(ErrorKind::InvalidArgument, "bubble_mass needs R > 0");
  }
  auto integrand = [](long double r) {
    const long double q = 1.0L + r * r / 8.0L;
    return 2.0L * kPiWide * r / (q * q);
  };
  const long double inner = std::min<long double>(R, 4.0L);
  long double total = integrate_panels<long double>(integrand, 0.0L, inner, 8);
  if (R > 4.0) {
    // geometric panels for the r^-3 tail, integrated in log r
    auto in_log = [&](long double t) {
      const long double r = std::exp(t);
      return integrand(r) * r;
    };
    const long double a = std::log(4.0L);
    const long double b = std::log(static_cast<long double>(R));
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.25L)));
    total += integrate_panels<long double>(in_log, a, b, panels);
  }
  return static_cast<double>(total);
}

RescaledProfile rescale_profile(const StationarySolution &sol, double s_max) {
  if (!(s_max > 0) || std::log(s_max) + sol.log_mu_plus >= 0.0) {
    throw NumericalError(ErrorKind::WindowExceedsDomain,
                         "s_max * mu_p^+ must stay inside the unit disk");
  }
  const auto &g = sol.grid;
  const double log_window = std::log(s_max) + sol.log_mu_plus;
  Eigen::Index count = 1;
  while (count < g.size() && g.log_r(count) <= log_window) {
    ++count;
  }
  // one node beyond the window feeds the last centered difference
  const Eigen::Index stencil = std::min(count + 1, g.size());
  Eigen::VectorXd s(stencil), v(stencil);
  const double u0 = sol.u_max;
  for (Eigen::Index i = 0; i < stencil; ++i) {
    s(i) = i == 0 ? 0.0 : std::exp(g.log_r(i) - sol.log_mu_plus);
    v(i) = sol.p * (sol.u(i) - u0) / u0;
  }
  RescaledProfile out;
  out.p = sol.p;
  out.K = sol.K;
  out.s_max = s_max;
  out.s = s.head(count);
  out.v = v.head(count);
  out.dv.resize(count);
  out.dv(0) = 0.0;
  for (Eigen::Index i = 1; i < count; ++i) {
    if (i + 1 >= stencil) {
      out.dv(i) = (v(i) - v(i - 1)) / (s(i) - s(i - 1));
      continue;
    }
    const double hm = s(i) - s(i - 1);
    const double hp = s(i + 1) - s(i);
    out.dv(i) = (hm * hm * (v(i + 1) - v(i)) + hp * hp * (v(i) - v(i - 1))) /
                (hm * hp * (hm + hp));
  }
  return out;
}

ConvergenceMetric convergence_metric(const RescaledProfile &profile,
                                     double r_cmp) {
  if (r_cmp > profile.s_max) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "comparison radius exceeds the profile window");
  }
  ConvergenceMetric m{0.0, 0.0};
  for (Eigen::Index i = 0; i < profile.s.size() && profile.s(i) <= r_cmp; ++i) {
    const double r = profile.s(i);
    m.value_error =
        std::max(m.value_error, std::abs(profile.v(i) - LiouvilleBubble::value(r)));
    m.derivative_error = std::max(
        m.derivative_error,
        std::abs(profile.dv(i) - LiouvilleBubble::derivative(r)));
  }
  return m;
}

} // namespace nodal
