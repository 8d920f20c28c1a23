#include "nodal/spectrum.hpp"

#include "nodal/liouville.hpp"
#include "nodal/parallel.hpp"
#include "nodal/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nodal {

RadialSchrodinger::RadialSchrodinger(RadialGrid grid, VectorXw log_potential,
                                     VectorXw log_weights)
    : grid_(std::move(grid)) {
  const Eigen::Index n = grid_.size();
  const Eigen::Index nu = n - 1;
  if (log_potential.size() != n) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "potential must be sampled on every grid node");
  }
  if (log_weights.size() == 0) {
    log_weights = VectorXw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      log_weights(i) = grid_.log_mass(i);
    }
  } else if (log_weights.size() != n) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "potential weights must cover every grid node");
  }
  h_.diag.resize(nu);
  h_.off.resize(std::max<Eigen::Index>(nu - 1, 0));
  m_.resize(nu);
  c_.resize(nu);
  mv_.resize(nu);
  for (Eigen::Index i = 0; i < nu; ++i) {
    Wide d = grid_.conductance(i);
    if (i > 0) {
      d += grid_.conductance(i - 1);
    }
    const Wide lv = log_potential(i);
    const Wide mv = std::isinf(lv) && lv < 0
                        ? Wide(0)
                        : std::exp(log_weights(i) + lv);
    h_.diag(i) = d - mv;
    c_(i) = grid_.conductance(i);
    mv_(i) = mv;
    if (i + 1 < nu) {
      h_.off(i) = -static_cast<Wide>(grid_.conductance(i));
    }
    m_(i) = grid_.mass(i);
    if (!(std::isinf(lv) && lv < 0)) {
      max_potential_ = std::max(max_potential_, std::exp(lv));
    }
  }
}

// H x with the stiffness applied to differences, which keeps the rows of
// tiny cells near the origin free of cancellation
VectorXw RadialSchrodinger::apply(const VectorXw &x) const {
  const Eigen::Index nu = x.size();
  VectorXw out(nu);
  for (Eigen::Index i = 0; i < nu; ++i) {
    const Wide right = i + 1 < nu ? x(i) - x(i + 1) : x(i);
    Wide v = c_(i) * right - mv_(i) * x(i);
    if (i > 0) {
      v += c_(i - 1) * (x(i) - x(i - 1));
    }
    out(i) = v;
  }
  return out;
}

Wide RadialSchrodinger::rayleigh(const VectorXw &x) const {
  const Eigen::Index nu = x.size();
  Wide num = 0;
  for (Eigen::Index i = 0; i < nu; ++i) {
    const Wide d = i + 1 < nu ? x(i) - x(i + 1) : x(i);
    num += c_(i) * d * d - mv_(i) * x(i) * x(i);
  }
  return num / x.dot(m_.cwiseProduct(x));
}

Wide RadialSchrodinger::relative_residual(const VectorXw &x,
                                          Wide lambda) const {
  const VectorXw r = apply(x) - lambda * m_.cwiseProduct(x);
  const Wide rn = std::sqrt(r.cwiseProduct(r).cwiseQuotient(m_).sum());
  const Wide xn = std::sqrt(x.cwiseProduct(x).cwiseProduct(m_).sum());
  return rn / (std::max(std::abs(lambda), Wide(1)) * xn);
}

Wide EigenPair::l2_norm() const {
  Wide acc = 0;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    acc += grid.weight(i) * phi(i) * phi(i);
  }
  return std::sqrt(acc);
}

EigenPair ground_state(const RadialSchrodinger &op,
                       const InverseIterationOptions &options) {
  const Eigen::Index nu = op.unknowns();
  const auto &h = op.hamiltonian();
  const VectorXw &m = op.mass();
  Wide shift = -(op.max_potential() * Wide(1.01) + Wide(0.01));
  VectorXw shifted_diag = h.diag - shift * m;
  bool refined_shift = false;

  // localized start; a flat vector is dominated by the outer cells when the
  // grid extends far beyond the potential
  VectorXw x(nu);
  for (Eigen::Index i = 0; i < nu; ++i) {
    const Wide r = op.grid().r(i);
    x(i) = 1 / (1 + r * r);
  }
  Wide lambda = op.rayleigh(x);
  Wide residual = op.relative_residual(x, lambda);
  Wide best = residual;
  int it = 0;
  int stalled = 0;
  auto floored = [&] { return stalled >= 5 && residual <= options.floor_tol; };
  for (; it < options.max_iterations && (it < 3 || residual > options.tol);
       ++it) {
    if (!refined_shift && residual < Wide(1e-4)) {
      // the Rayleigh quotient is now far closer to lambda_1 than the gap, so
      // a shift just below it still selects the ground state
      shift = lambda - Wide(1e-2) * std::max(std::abs(lambda), Wide(1));
      shifted_diag = h.diag - shift * m;
      refined_shift = true;
    }
    VectorXw y = m.cwiseProduct(x);
    if (!solve_tridiagonal<Wide>(h.off, shifted_diag, h.off, y)) {
      throw NumericalError(ErrorKind::EigenSolveDiverged,
                           "singular shifted operator");
    }
    const Wide norm = std::sqrt(y.cwiseProduct(y).cwiseProduct(m).sum());
    if (!std::isfinite(static_cast<double>(std::log(norm)))) {
      throw NumericalError(ErrorKind::EigenSolveDiverged,
                           "inverse iteration produced a non-finite vector");
    }
    x = y / norm;
    lambda = op.rayleigh(x);
    residual = op.relative_residual(x, lambda);
    // the residual floors at roundoff of the stiffness rows near the origin
    if (residual < Wide(0.9) * best) {
      best = residual;
      stalled = 0;
    } else {
      ++stalled;
    }
    if (floored()) {
      break;
    }
  }
  if (residual > options.tol && !floored()) {
    throw NumericalError(ErrorKind::EigenSolveDiverged,
                         "inverse iteration did not reach tolerance");
  }
  if (x(0) < 0) {
    x = -x;
  }
  EigenPair pair;
  pair.grid = op.grid();
  pair.lambda = lambda;
  pair.residual = residual;
  pair.iterations = it;
  pair.phi = VectorXw::Zero(nu + 1);
  pair.phi.head(nu) = x;
  const Wide norm = pair.l2_norm();
  pair.phi /= norm;
  const Wide peak = pair.phi.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < pair.phi.size(); ++i) {
    if (pair.phi(i) < 0) {
      if (pair.phi(i) < -Wide(1e-12) * peak) {
        throw NumericalError(ErrorKind::NonNegativeGroundState,
                             "ground state changes sign; grid too coarse");
      }
      pair.phi(i) = 0;
    }
  }
  return pair;
}

namespace {

VectorXw newton_stationary(const RadialGrid &scaled, double p, VectorXw u,
                           const VectorXw &log_w, Wide *final_residual) {
  const Eigen::Index n = scaled.size();
  const Eigen::Index nu = n - 1;
  VectorXw stiff_diag(nu), stiff_off(std::max<Eigen::Index>(nu - 1, 0));
  for (Eigen::Index i = 0; i < nu; ++i) {
    stiff_diag(i) = scaled.conductance(i) + (i > 0 ? scaled.conductance(i - 1) : 0.0);
    if (i + 1 < nu) {
      stiff_off(i) = -static_cast<Wide>(scaled.conductance(i));
    }
  }
  const Wide wp = p;
  Wide residual = 0;
  for (int it = 0; it < 50; ++it) {
    VectorXw f(nu), jd(nu);
    Wide scale = 0;
    for (Eigen::Index i = 0; i < nu; ++i) {
      const Wide right = i + 1 < nu ? u(i) - u(i + 1) : u(i);
      Wide au = scaled.conductance(i) * right;
      if (i > 0) {
        au += scaled.conductance(i - 1) * (u(i) - u(i - 1));
      }
      const Wide a = std::abs(u(i));
      // w |u|^{p-1} on the scaled grid
      const Wide mv =
          a < Wide(1e-300) ? Wide(0)
                           : std::exp(log_w(i) + (wp - 1) * std::log(a));
      f(i) = au - mv * u(i) / wp;
      jd(i) = stiff_diag(i) - mv;
      scale = std::max(scale, std::abs(mv * u(i) / wp));
    }
    residual = f.cwiseAbs().maxCoeff() / scale;
    if (residual < Wide(1e-17)) {
      break;
    }
    VectorXw delta = -f;
    if (!solve_tridiagonal<Wide>(stiff_off, jd, stiff_off, delta)) {
      throw NumericalError(ErrorKind::StepFailure,
                           "singular Jacobian in discrete stationary solve");
    }
    u.head(nu) += delta;
  }
  if (final_residual) {
    *final_residual = residual;
  }
  u(n - 1) = 0;
  return u;
}

} // namespace

namespace {

// log int hat_i e^{2s} f(u(s)) / f(u_i) ds with f(u) = |u|^{p-1} u and u the
// interpolated ODE solution, on an unscaled grid. Returns NaN when u changes
// sign under the hat.
Wide log_load_weight(const StationarySolution &sol, const RadialGrid &g,
                     const Eigen::VectorXd &u_nodes, Eigen::Index i,
                     const std::pair<VectorXw, VectorXw> &rule) {
  const Eigen::Index n = g.size();
  const Wide si = g.log_r(i);
  const Wide lui = std::log(std::abs(static_cast<Wide>(u_nodes(i))));
  const bool positive = u_nodes(i) > 0;
  Wide acc = 0;
  auto side = [&](Wide a, Wide b, bool rising) {
    const Wide half = (b - a) / 2;
    for (Eigen::Index q = 0; q < rule.first.size(); ++q) {
      const Wide s = a + half * (rule.first(q) + 1);
      const double u = sol.value_at(std::exp(static_cast<double>(s)));
      if ((u > 0) != positive || u == 0.0) {
        return false;
      }
      const Wide hat = rising ? (s - a) / (b - a) : (b - s) / (b - a);
      const Wide e = 2 * (s - si) + sol.p * (std::log(std::abs(Wide(u))) - lui);
      acc += half * rule.second(q) * hat * std::exp(e);
    }
    return true;
  };
  if (i == 0) {
    acc += Wide(0.5);
  } else if (!side(g.log_r(i - 1), si, true)) {
    return std::numeric_limits<Wide>::quiet_NaN();
  }
  if (i + 1 < n && !side(si, g.log_r(i + 1), false)) {
    return std::numeric_limits<Wide>::quiet_NaN();
  }
  return 2 * si + std::log(acc);
}

} // namespace

VectorXw load_log_weights(const StationarySolution &sol, const RadialGrid &g) {
  const Eigen::Index n = g.size();
  const auto rule = gauss_legendre<Wide>(16);
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u(i) = sol.value_at(g.r(i));
  }
  u(n - 1) = 0.0;
  VectorXw log_w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Wide lw = u(i) == 0.0 ? std::numeric_limits<Wide>::quiet_NaN()
                          : log_load_weight(sol, g, u, i, rule);
    if (std::isnan(lw)) {
      // next to a sign change: fit the log-slope p u_s / u instead, with the
      // slope taken from the neighbouring samples
      Wide slope = 0;
      if (u(i) != 0.0 && i > 0 && i + 1 < n) {
        const Wide us = (static_cast<Wide>(u(i + 1)) - u(i - 1)) /
                        (static_cast<Wide>(g.log_r(i + 1)) - g.log_r(i - 1));
        slope = std::clamp(static_cast<Wide>(sol.p) * us / u(i),
                           Wide(-kMaxSlope), Wide(kMaxSlope));
      }
      lw = g.log_fitted_mass(i, slope);
    }
    log_w(i) = lw;
  }
  return log_w;
}

DiscreteStationary discrete_stationary(const StationarySolution &sol) {
  return discrete_stationary(sol, sol.grid);
}

DiscreteStationary discrete_stationary(const StationarySolution &sol,
                                       const RadialGrid &g) {
  const Eigen::Index n = g.size();
  VectorXw u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u(i) = static_cast<Wide>(sol.value_at(g.r(i))) / sol.u_max;
  }
  u(n - 1) = 0;
  VectorXw log_w = load_log_weights(sol, g);
  log_w.array() -= 2 * static_cast<Wide>(sol.log_mu_plus);
  DiscreteStationary out;
  out.grid = g.shifted(-sol.log_mu_plus);
  out.p = sol.p;
  out.log_weight = std::move(log_w);
  out.u = newton_stationary(out.grid, sol.p, std::move(u), out.log_weight,
                            &out.residual);
  return out;
}

DiscreteStationary discrete_stationary_on(const RadialGrid &scaled, double p,
                                          VectorXw initial,
                                          const VectorXw &slopes) {
  DiscreteStationary out;
  out.grid = scaled;
  out.p = p;
  out.log_weight = slopes.size() == 0 ? scaled.log_fitted_masses(
                                            VectorXw::Zero(scaled.size()))
                                      : scaled.log_fitted_masses(slopes);
  out.u = newton_stationary(scaled, p, std::move(initial), out.log_weight,
                            &out.residual);
  return out;
}

RadialSchrodinger linearization(const DiscreteStationary &ds) {
  VectorXw log_v(ds.u.size());
  for (Eigen::Index i = 0; i < ds.u.size(); ++i) {
    log_v(i) = log_abs_power<Wide>(ds.u(i), ds.p - 1);
  }
  return RadialSchrodinger(ds.grid, std::move(log_v), ds.log_weight);
}

EigenPair first_eigenpair_Lp(const StationarySolution &sol,
                             const InverseIterationOptions &options) {
  return first_eigenpair_Lp(sol, discrete_stationary(sol), options);
}

EigenPair first_eigenpair_Lp(const StationarySolution &sol,
                             const DiscreteStationary &ds,
                             const InverseIterationOptions &options) {
  EigenPair scaled_pair = ground_state(linearization(ds), options);
  const Wide log_mu = sol.log_mu_plus;
  EigenPair pair;
  pair.grid = sol.grid;
  pair.lambda = scaled_pair.lambda * std::exp(-2 * log_mu);
  pair.phi = scaled_pair.phi * std::exp(-log_mu);
  pair.residual = scaled_pair.residual;
  pair.iterations = scaled_pair.iterations;
  return pair;
}

Eigen::VectorXd limit_nodes(double r_trunc, Eigen::Index nodes) {
  const double s_begin = -14.0;
  const double s_end = std::log(r_trunc);
  const double length = s_end - s_begin;
  // bubble emphasis (sqrt of r^2 e^U) plus a term that makes the far field
  // roughly uniform in r
  const double far = 1.5 * length / r_trunc;
  return equidistribute(s_begin, s_end, nodes, [&](double s) {
    const double r = std::exp(s);
    return 1.0 + 2.0 * r / (1.0 + r * r / 8.0) + far * r;
  });
}

EigenPair limit_first_eigenpair(double r_trunc, Eigen::Index nodes,
                                const InverseIterationOptions &options) {
  if (!(r_trunc > 0) || nodes < 3) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "limit eigenpair needs r_trunc > 0 and >= 3 nodes");
  }
  return limit_first_eigenpair_on(limit_nodes(r_trunc, nodes), options);
}

EigenPair limit_first_eigenpair_on(Eigen::VectorXd log_r,
                                   const InverseIterationOptions &options) {
  if (log_r.size() < 3) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "limit eigenpair needs >= 3 nodes");
  }
  RadialGrid grid(std::move(log_r));
  VectorXw log_v(grid.size()), slope(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double r = grid.r(i);
    log_v(i) = LiouvilleBubble::log_weight(r);
    slope(i) = r * LiouvilleBubble::derivative(r);
  }
  VectorXw log_w = grid.log_fitted_masses(slope);
  return ground_state(
      RadialSchrodinger(std::move(grid), std::move(log_v), std::move(log_w)),
      options);
}

EigenPair dirichlet_disk_ground_state(Eigen::Index nodes) {
  const double s_begin = -12.0;
  const double length = -s_begin;
  Eigen::VectorXd log_r = equidistribute(s_begin, 0.0, nodes, [&](double s) {
    return 1.0 + 3.0 * length * std::exp(s);
  });
  RadialGrid grid(std::move(log_r));
  VectorXw log_v = VectorXw::Constant(
      grid.size(), -std::numeric_limits<Wide>::infinity());
  return ground_state(RadialSchrodinger(std::move(grid), std::move(log_v)));
}

RescaledEigenPair rescaled_eigen(const StationarySolution &sol,
                                 const EigenPair &pair) {
  RescaledEigenPair out;
  const Wide log_mu = sol.log_mu_plus;
  out.log_mu = sol.log_mu_plus;
  out.lambda_tilde =
      static_cast<double>(pair.lambda * std::exp(2 * log_mu));
  out.grid = sol.grid.shifted(-sol.log_mu_plus);
  const Eigen::Index n = sol.grid.size();
  out.phi_tilde.resize(n);
  out.potential.resize(n);
  Wide acc = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Wide phi = pair.phi(i) * std::exp(log_mu);
    out.phi_tilde(i) = static_cast<double>(phi);
    acc += out.grid.weight(i) * phi * phi;
    const double ratio = sol.u(i) / sol.u_max;
    const double a = std::abs(ratio);
    out.potential(i) =
        a < 1e-300 ? 0.0 : std::exp((sol.p - 1) * std::log(a));
  }
  out.l2_norm = static_cast<double>(std::sqrt(acc));
  return out;
}

Eigen::VectorXd sample_limit_eigenfunction(const EigenPair &limit,
                                           const RadialGrid &target) {
  const auto &lr = limit.grid.log_r();
  const Eigen::Index m = lr.size();
  Eigen::VectorXd out(target.size());
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    if (i == 0) {
      out(i) = static_cast<double>(limit.phi(0));
      continue;
    }
    const double s = target.log_r(i);
    if (s <= lr(1)) {
      // flat inside the innermost cell
      out(i) = static_cast<double>(limit.phi(0) + (limit.phi(1) - limit.phi(0)) *
                                                      std::max(0.0, (s - lr(0)) / (lr(1) - lr(0))));
      continue;
    }
    if (s >= lr(m - 1)) {
      out(i) = 0.0;
      continue;
    }
    const auto *it = std::upper_bound(lr.data(), lr.data() + m, s);
    const Eigen::Index j = (it - lr.data()) - 1;
    const double t = (s - lr(j)) / (lr(j + 1) - lr(j));
    out(i) = static_cast<double>((1 - t) * limit.phi(j) + t * limit.phi(j + 1));
  }
  return out;
}

EigenConvergenceRow eigen_convergence_row(const StationarySolution &sol,
                                          const EigenPair &pair,
                                          const EigenPair &limit) {
  const RescaledEigenPair rp = rescaled_eigen(sol, pair);
  const Eigen::VectorXd star = sample_limit_eigenfunction(limit, rp.grid);
  Wide diff = 0;
  Wide gap = 0;
  for (Eigen::Index i = 0; i < rp.grid.size(); ++i) {
    const Wide w = rp.grid.weight(i);
    const Wide d = rp.phi_tilde(i) - star(i);
    diff += w * d * d;
    const double eu = std::exp(LiouvilleBubble::log_weight(rp.grid.r(i)));
    gap += w * (eu - rp.potential(i)) * rp.phi_tilde(i) * rp.phi_tilde(i);
  }
  EigenConvergenceRow row;
  row.p = sol.p;
  row.lambda_tilde = rp.lambda_tilde;
  row.lambda_error = std::abs(rp.lambda_tilde - static_cast<double>(limit.lambda));
  row.phi_l2_error = static_cast<double>(std::sqrt(diff));
  row.gap_integral = static_cast<double>(gap);
  return row;
}

EigenConvergenceReport
eigen_convergence_report(const std::vector<StationarySolution> &sols,
                         const EigenPair &limit, int jobs) {
  if (sols.empty()) {
    throw NumericalError(ErrorKind::EmptySweep, "p_sweep is empty");
  }
  EigenConvergenceReport report;
  report.K = sols.front().K;
  report.lambda_star = static_cast<double>(limit.lambda);
  report.rows.resize(sols.size());
  parallel_for(sols.size(), jobs, [&](std::size_t k) {
    report.rows[k] =
        eigen_convergence_row(sols[k], first_eigenpair_Lp(sols[k]), limit);
  });
  report.lambda_error_decreasing = true;
  report.phi_error_decreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (!(report.rows[i].lambda_error < report.rows[i - 1].lambda_error)) {
      report.lambda_error_decreasing = false;
    }
    if (!(report.rows[i].phi_l2_error < report.rows[i - 1].phi_l2_error)) {
      report.phi_error_decreasing = false;
    }
  }
  return report;
}

EigenConvergenceReport
eigen_convergence_report(const std::vector<double> &p_sweep, int K,
                         const EigenPair &limit, const BuildOptions &build,
                         int jobs) {
  if (p_sweep.empty()) {
    throw NumericalError(ErrorKind::EmptySweep, "p_sweep is empty");
  }
  std::vector<StationarySolution> sols(p_sweep.size());
  parallel_for(p_sweep.size(), jobs,
               [&](std::size_t k) { sols[k] = build_stationary(p_sweep[k], K, build); });
  return eigen_convergence_report(sols, limit, jobs);
}

} // namespace nodal
