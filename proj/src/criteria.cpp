#include "nodal/criteria.hpp"

#include "nodal/liouville.hpp"
#include "nodal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nodal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Sample {
  double r;
  double u;
};

// Points of {r > R mu}: the boundary point of the region, nodes and extrema.
std::vector<Sample> region_samples(const StationarySolution &sol, double R) {
  const double log_start = std::log(R) + sol.log_mu_plus;
  if (log_start >= 0.0) {
    throw NumericalError(ErrorKind::EmptyRegion,
                         "R mu_p^+ >= 1: the region outside the ball is empty");
  }
  const double start = std::exp(log_start);
  std::vector<Sample> out;
  out.push_back({start, sol.value_at(start)});
  for (Eigen::Index i = 1; i < sol.grid.size(); ++i) {
    if (sol.grid.log_r(i) > log_start) {
      out.push_back({sol.grid.r(i), sol.u(i)});
    }
  }
  for (const auto &e : sol.extrema) {
    if (e.r > start) {
      out.push_back({e.r, e.u});
    }
  }
  return out;
}

// |u / u(0)|^{p-1} computed in logs; 0 at zeros of u
double relative_power(const StationarySolution &sol, double u) {
  const double a = std::abs(u);
  if (a < 1e-300) {
    return 0.0;
  }
  return std::exp((sol.p - 1) * (std::log(a) - std::log(sol.u_max)));
}

double first_nodal_radius(const StationarySolution &sol) {
  return sol.nodal_radii.empty() ? 1.0 : sol.nodal_radii.front();
}

bool strictly_decreasing(const std::vector<double> &v) {
  double last = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double x : v) {
    if (std::isnan(x)) {
      continue;
    }
    if (any && !(x < last)) {
      return false;
    }
    last = x;
    any = true;
  }
  return true;
}

// no growth trend: the second half of the sweep stays within 10% of the first
bool no_growth(const std::vector<double> &v) {
  if (v.size() < 2) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  }
  const std::size_t half = v.size() / 2;
  double head = 0, tail = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      return false;
    }
    (i < half ? head : tail) = std::max(i < half ? head : tail, v[i]);
  }
  return tail <= 1.1 * head;
}

} // namespace

double compute_S(const StationarySolution &sol, double R) {
  double best = 0;
  for (const auto &s : region_samples(sol, R)) {
    best = std::max(best, relative_power(sol, s.u));
  }
  return best;
}

double compute_M(const StationarySolution &sol, double R) {
  bool any = false;
  double best = 0;
  for (const auto &s : region_samples(sol, R)) {
    if (s.u > 0) {
      any = true;
      best = std::max(best, relative_power(sol, s.u));
    }
  }
  if (!any) {
    throw NumericalError(ErrorKind::EmptyRegion,
                         "no positive values outside the R mu_p^+ ball");
  }
  return best;
}

double compute_Mprime(const StationarySolution &sol, double R) {
  const double r1 = first_nodal_radius(sol);
  if (std::log(R) + sol.log_mu_plus >= std::log(r1)) {
    throw NumericalError(ErrorKind::EmptyRegion,
                         "R mu_p^+ >= r_{p,1}: the first annulus is empty");
  }
  double best = 0;
  for (const auto &s : region_samples(sol, R)) {
    if (s.r < r1 && s.u > 0) {
      best = std::max(best, relative_power(sol, s.u));
    }
  }
  return best;
}

double min_max_ratio(const StationarySolution &sol) {
  return relative_power(sol, sol.u_min);
}

double outer_sup(const StationarySolution &sol) {
  if (sol.nodal_radii.empty()) {
    return 0.0;
  }
  const double r1 = sol.nodal_radii.front();
  double best = 0;
  for (const auto &e : sol.extrema) {
    if (e.r > r1) {
      best = std::max(best, std::abs(e.u));
    }
  }
  for (Eigen::Index i = 1; i < sol.grid.size(); ++i) {
    if (sol.grid.r(i) > r1) {
      best = std::max(best, std::abs(sol.u(i)));
    }
  }
  return best / sol.u_max;
}

double check_P31(const StationarySolution &sol) {
  const auto &g = sol.grid;
  const Eigen::Index n = g.size();
  const double log_p = std::log(sol.p);
  auto log_value = [&](double s, double u) {
    const double a = std::abs(u);
    return a < 1e-300 ? -std::numeric_limits<double>::infinity()
                      : 2 * s + log_p + (sol.p - 1) * std::log(a);
  };
  auto at = [&](double s) { return log_value(s, sol.value_at(std::exp(s))); };
  std::vector<double> lv(n);
  lv[0] = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < n; ++i) {
    lv[i] = log_value(g.log_r(i), sol.u(i));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    best = std::max(best, lv[i]);
    if (!(lv[i] >= lv[i - 1] && lv[i] >= lv[i + 1])) {
      continue;
    }
    // golden section on the interpolant around a discrete local max
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = g.log_r(i - 1), b = g.log_r(i + 1);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = at(c), fd = at(d);
    for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = at(d);
      }
    }
    best = std::max({best, fc, fd});
  }
  for (const auto &e : sol.extrema) {
    best = std::max(best, log_value(std::log(e.r), e.u));
  }
  return std::exp(best);
}

ScalarCriterion scalar_criterion(const StationarySolution &sol,
                                 const DiscreteStationary &ds,
                                 const EigenPair &pair) {
  const Wide log_mu = sol.log_mu_plus;
  const Wide mu = std::exp(log_mu);
  const Wide p = sol.p;
  Wide i1 = 0, i2 = 0;
  for (Eigen::Index i = 0; i < ds.u.size(); ++i) {
    const Wide phi = pair.phi(i) * mu;
    const Wide u = ds.u(i);
    i1 += ds.grid.mass(i) * u * phi;
    const Wide a = std::abs(u);
    if (a >= Wide(1e-300)) {
      const Wide f = std::exp(ds.log_weight(i) + (p - 1) * std::log(a)) * u;
      i2 += f * phi;
    }
  }
  i1 *= 2 * kPiWide;
  i2 *= 2 * kPiWide;
  const Wide lambda_tilde = pair.lambda * std::exp(2 * log_mu);
  const Wide predicted = (p - 1) / (p * (-lambda_tilde)) * i2;
  ScalarCriterion out;
  out.integral = static_cast<Wide>(sol.u_max) * mu * i1;
  out.normalized = static_cast<double>(i2);
  out.identity_residual = static_cast<double>(std::abs(i1 - predicted) / std::abs(i1));
  return out;
}

double bubble_overlap(const EigenPair &limit) {
  const auto &g = limit.grid;
  VectorXw slope(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    slope(i) = r * LiouvilleBubble::derivative(r);
  }
  const VectorXw log_w = g.log_fitted_masses(slope);
  Wide acc = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    acc += std::exp(log_w(i) + LiouvilleBubble::log_weight(g.r(i))) * limit.phi(i);
  }
  return static_cast<double>(2 * kPiWide * acc);
}

ConditionReport condition_report(const std::vector<StationarySolution> &sols,
                                 const std::vector<double> &R_sweep,
                                 const EigenPair &limit, int jobs) {
  if (sols.empty()) {
    throw NumericalError(ErrorKind::EmptySweep, "p_sweep is empty");
  }
  if (R_sweep.empty()) {
    throw NumericalError(ErrorKind::EmptySweep, "R_sweep is empty");
  }
  const std::size_t np = sols.size();
  const std::size_t nr = R_sweep.size();
  ConditionReport rep;
  rep.K = sols.front().K;
  rep.R_sweep = R_sweep;
  rep.S_table.assign(np, std::vector<double>(nr, kNaN));
  rep.M_table = rep.S_table;
  rep.Mprime_table = rep.S_table;
  rep.p_sweep.resize(np);
  for (auto *v : {&rep.ratio, &rep.mu_ratio, &rep.outer_sup, &rep.P31_sup,
                  &rep.energy_gradient, &rep.energy_potential, &rep.criterion,
                  &rep.normalized_criterion, &rep.identity_residual,
                  &rep.lambda_tilde}) {
    v->assign(np, kNaN);
  }
  std::vector<double> decomposition(np, 0.0), chain(np, -std::numeric_limits<double>::infinity());

  parallel_for(np, jobs, [&](std::size_t k) {
    const StationarySolution &sol = sols[k];
    rep.p_sweep[k] = sol.p;
    rep.ratio[k] = min_max_ratio(sol);
    rep.mu_ratio[k] = sol.K > 1 ? std::exp(sol.log_mu_plus - sol.log_mu_minus) : 0.0;
    rep.outer_sup[k] = outer_sup(sol);
    rep.P31_sup[k] = check_P31(sol);
    const Energies e = energy_functionals(sol);
    rep.energy_gradient[k] = e.gradient;
    rep.energy_potential[k] = e.potential;
    for (std::size_t j = 0; j < nr; ++j) {
      const double R = R_sweep[j];
      if (std::log(R) + sol.log_mu_plus >= 0.0) {
        continue;
      }
      const double S = compute_S(sol, R);
      rep.S_table[k][j] = S;
      try {
        rep.M_table[k][j] = compute_M(sol, R);
      } catch (const NumericalError &) {
        rep.M_table[k][j] = 0.0;
      }
      try {
        rep.Mprime_table[k][j] = compute_Mprime(sol, R);
      } catch (const NumericalError &) {
      }
      // the negative part only counts once the minimum is inside the region
      const double neg = sol.r_min > R * sol.mu_plus() ? rep.ratio[k] : 0.0;
      decomposition[k] = std::max(
          decomposition[k], std::abs(S - std::max(rep.M_table[k][j], neg)));
      chain[k] = std::max(chain[k], S - rep.P31_sup[k] / (R * R));
    }
    const DiscreteStationary ds = discrete_stationary(sol);
    const EigenPair pair = first_eigenpair_Lp(sol, ds);
    const ScalarCriterion c = scalar_criterion(sol, ds, pair);
    rep.criterion[k] = static_cast<double>(c.integral);
    rep.normalized_criterion[k] = c.normalized;
    rep.identity_residual[k] = c.identity_residual;
    rep.lambda_tilde[k] =
        static_cast<double>(pair.lambda * std::exp(2 * static_cast<Wide>(sol.log_mu_plus)));
  });

  rep.limit_target = bubble_overlap(limit);
  rep.energy_bound = *std::max_element(rep.energy_gradient.begin(), rep.energy_gradient.end());
  rep.decomposition_defect = *std::max_element(decomposition.begin(), decomposition.end());
  rep.P31_chain_excess = *std::max_element(chain.begin(), chain.end());

  rep.energy_bounded = no_growth(rep.energy_gradient);
  rep.P31_bounded = no_growth(rep.P31_sup);
  rep.ratio_decreasing = strictly_decreasing(rep.ratio);
  rep.mu_ratio_decreasing = strictly_decreasing(rep.mu_ratio);
  rep.S_decreasing_in_p = true;
  rep.Mprime_decreasing_in_p = true;
  for (std::size_t j = 0; j < nr; ++j) {
    std::vector<double> s_col(np), m_col(np);
    for (std::size_t k = 0; k < np; ++k) {
      s_col[k] = rep.S_table[k][j];
      m_col[k] = rep.Mprime_table[k][j];
    }
    rep.S_decreasing_in_p = rep.S_decreasing_in_p && strictly_decreasing(s_col);
    rep.Mprime_decreasing_in_p =
        rep.Mprime_decreasing_in_p && strictly_decreasing(m_col);
  }
  rep.Mprime_decreasing_in_R = true;
  for (std::size_t k = 0; k < np; ++k) {
    rep.Mprime_decreasing_in_R =
        rep.Mprime_decreasing_in_R && strictly_decreasing(rep.Mprime_table[k]);
  }
  rep.Mprime_decreasing_jointly = true;
  for (std::size_t k = 0; k < np; ++k) {
    for (std::size_t j = 0; j < nr; ++j) {
      for (std::size_t k2 = k; k2 < np; ++k2) {
        for (std::size_t j2 = 0; j2 < nr; ++j2) {
          const double a = rep.Mprime_table[k][j];
          const double b = rep.Mprime_table[k2][j2];
          if (R_sweep[j2] > R_sweep[j] && !std::isnan(a) && !std::isnan(b) &&
              !(b < a)) {
            rep.Mprime_decreasing_jointly = false;
          }
        }
      }
    }
  }
  rep.S_tail_gap.assign(nr, kNaN);
  for (std::size_t j = 0; j < nr; ++j) {
    const double tail = LiouvilleBubble::weight(R_sweep[j]);
    rep.S_tail_gap[j] = std::abs(rep.S_table[np - 1][j] - tail) / tail;
  }
  // the largest p values: those >= 500, or the last one if none
  rep.outer_sup_below_half = true;
  bool checked = false;
  for (std::size_t k = 0; k < np; ++k) {
    if (rep.p_sweep[k] >= 500.0 || (k + 1 == np && !checked)) {
      checked = true;
      rep.outer_sup_below_half = rep.outer_sup_below_half && rep.outer_sup[k] < 0.5;
    }
  }
  rep.p_star = kNaN;
  for (std::size_t k = np; k-- > 0;) {
    if (!(rep.criterion[k] > 0)) {
      break;
    }
    rep.p_star = rep.p_sweep[k];
  }
  rep.criterion_positive = !std::isnan(rep.p_star);
  return rep;
}

ConditionReport condition_report(const std::vector<double> &p_sweep,
                                 const std::vector<double> &R_sweep, int K,
                                 const EigenPair &limit,
                                 const BuildOptions &build, int jobs) {
  if (p_sweep.empty()) {
    throw NumericalError(ErrorKind::EmptySweep, "p_sweep is empty");
  }
  if (R_sweep.empty()) {
    throw NumericalError(ErrorKind::EmptySweep, "R_sweep is empty");
  }
  std::vector<StationarySolution> sols(p_sweep.size());
  parallel_for(p_sweep.size(), jobs,
               [&](std::size_t k) { sols[k] = build_stationary(p_sweep[k], K, build); });
  return condition_report(sols, R_sweep, limit, jobs);
}

} // namespace nodal
