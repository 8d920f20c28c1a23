#include "nodal/heat_flow.hpp"

#include "nodal/parallel.hpp"
#include "nodal/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nodal {

namespace {

constexpr double kMaxDepth = 4000.0;

void require(bool ok, const char *field, const char *what) {
  if (!ok) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         std::string("heat options: ") + field + " " + what);
  }
}

// Scaled equation v_t = (v_ss) e^{-2s} + |v|^{p-1} v / p, discretized with
// the hat masses m, stiffness conductances c and load weights w:
//   m_i v_i' = -(A v)_i + w_i |v_i|^{p-1} v_i / p.
class Semidiscrete {
public:
  explicit Semidiscrete(const HeatProblem &hp)
      : p_(hp.p), grid_(hp.state.grid), log_w_(hp.state.log_weight),
        n_(grid_.size() - 1) {
    c_.resize(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      c_(i) = grid_.conductance(i);
    }
  }

  Eigen::Index unknowns() const { return n_; }
  Wide mass(Eigen::Index i) const { return grid_.mass(i); }

  // w_i |v_i|^{p-1}
  Wide load(Eigen::Index i, Wide v) const {
    const Wide a = std::abs(v);
    if (a < Wide(1e-4000L)) {
      return 0;
    }
    return std::exp(log_w_(i) + (static_cast<Wide>(p_) - 1) * std::log(a));
  }

  Wide stiffness(const VectorXw &v, Eigen::Index i) const {
    Wide au = c_(i) * (i + 1 < n_ ? v(i) - v(i + 1) : v(i));
    if (i > 0) {
      au += c_(i - 1) * (v(i) - v(i - 1));
    }
    return au;
  }

  VectorXw rate(const VectorXw &v) const {
    VectorXw f(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      f(i) = (-stiffness(v, i) + load(i, v(i)) * v(i) / p_) / mass(i);
    }
    return f;
  }

  // Linearly implicit Euler step: one Newton iteration of backward Euler
  // from v_n, i.e. (M/dt + A - W|v_n|^{p-1}) (v - v_n) = -A v_n + W f(v_n)/p.
  // Returns false on a singular or non-finite solve.
  bool step(const VectorXw &vn, Wide dt, VectorXw &v) const {
    VectorXw off(std::max<Eigen::Index>(n_ - 1, 0));
    for (Eigen::Index i = 0; i + 1 < n_; ++i) {
      off(i) = -c_(i);
    }
    VectorXw rhs(n_), jd(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const Wide mv = load(i, vn(i));
      rhs(i) = mv * vn(i) / p_ - stiffness(vn, i);
      jd(i) = mass(i) / dt + c_(i) + (i > 0 ? c_(i - 1) : Wide(0)) - mv;
    }
    if (!solve_tridiagonal<Wide>(off, jd, off, rhs)) {
      return false;
    }
    v = vn + rhs;
    return v.allFinite();
  }

  // int |grad v|^2 / 2 - int |v|^{p+1} / (p (p+1)) in scaled variables
  Wide energy(const VectorXw &v) const {
    Wide grad = 0, pot = 0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const Wide d = (i + 1 < n_ ? v(i + 1) : Wide(0)) - v(i);
      grad += c_(i) * d * d;
      pot += load(i, v(i)) * v(i) * v(i);
    }
    return kPiWide * grad - 2 * kPiWide * pot / (p_ * (p_ + 1));
  }

private:
  double p_;
  const RadialGrid &grid_;
  const VectorXw &log_w_;
  Eigen::Index n_;
  VectorXw c_;
};

Wide sup_abs(const VectorXw &v) { return v.cwiseAbs().maxCoeff(); }

} // namespace

void validate(const HeatOptions &o) {
  require(o.refine >= 1, "refine", "must be >= 1");
  require(o.deep_density > 0, "deep_density", "must be positive");
  require(o.depth_margin >= 0, "depth_margin", "must be non-negative");
  require(o.rtol > 0 && o.rtol < 1, "rtol", "must lie in (0, 1)");
  require(o.dt_initial > 0, "dt_initial", "must be positive");
  require(o.M_big > 0, "M_big", "must be positive");
  require(o.delta > 0 && o.delta < o.M_big, "delta", "must lie in (0, M_big)");
  require(o.dt_min_rel > 0, "dt_min_rel", "must be positive");
  require(o.stationary_tol > 0, "stationary_tol", "must be positive");
  require(o.fit_samples >= 3, "fit_samples", "must be >= 3");
  require(o.max_steps > 0, "max_steps", "must be positive");
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
  case Outcome::Global: return "Global";
  case Outcome::BlowUp: return "BlowUp";
  case Outcome::Undecided: return "Undecided";
  }
  return "Undecided";
}

std::string to_string(StopReason reason) {
  switch (reason) {
  case StopReason::Horizon: return "horizon";
  case StopReason::Threshold: return "threshold";
  case StopReason::Decay: return "decay";
  case StopReason::StepUnderflow: return "step_underflow";
  case StopReason::StepLimit: return "step_limit";
  }
  return "step_limit";
}

double HeatTrajectory::t(std::size_t j) const {
  return static_cast<double>(std::exp(static_cast<Wide>(log_time_scale)) *
                             t_scaled[j]);
}

HeatProblem prepare_heat(const StationarySolution &sol,
                         const HeatOptions &options) {
  validate(options);
  const auto &base = sol.grid.log_r();
  // a blow-up profile of height M has scale mu (M / u0)^{-(p-1)/2}
  const double levels = std::log(std::max(options.M_big / sol.u_max, 1.0));
  const double depth = std::min(0.5 * (sol.p - 1) * levels + options.depth_margin,
                                kMaxDepth);
  const double s_deep = sol.log_mu_plus - depth;
  const double h = 1.0 / (options.deep_density * options.refine);
  std::vector<double> nodes;
  if (s_deep < base(0)) {
    const auto count = static_cast<long>(std::ceil((base(0) - s_deep) / h));
    for (long k = 0; k < count; ++k) {
      nodes.push_back(base(0) - (count - k) * h);
    }
  }
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    nodes.push_back(base(i));
    if (i + 1 < base.size()) {
      for (int k = 1; k < options.refine; ++k) {
        nodes.push_back(base(i) + (base(i + 1) - base(i)) * k / options.refine);
      }
    }
  }
  Eigen::VectorXd log_r =
      Eigen::Map<Eigen::VectorXd>(nodes.data(), static_cast<Eigen::Index>(nodes.size()));
  HeatProblem hp;
  hp.p = sol.p;
  hp.K = sol.K;
  hp.u0 = sol.u_max;
  hp.log_mu = sol.log_mu_plus;
  hp.options = options;
  // plain hat masses for the load: weights fitted to the stationary shape
  // overweight nodes beside a sign change once the solution moves
  const RadialGrid scaled = RadialGrid(std::move(log_r)).shifted(-sol.log_mu_plus);
  VectorXw initial(scaled.size());
  for (Eigen::Index i = 0; i < scaled.size(); ++i) {
    const double r = i == 0 ? 0.0 : std::exp(scaled.log_r(i) + sol.log_mu_plus);
    initial(i) = static_cast<Wide>(sol.value_at(r)) / sol.u_max;
  }
  hp.state = discrete_stationary_on(scaled, sol.p, std::move(initial));
  return hp;
}

HeatTrajectory evolve(const StationarySolution &sol, double lambda,
                      double horizon, const HeatOptions &options) {
  return evolve(prepare_heat(sol, options), lambda, horizon);
}

HeatTrajectory evolve(const HeatProblem &hp, double lambda, double horizon) {
  if (!(horizon > 0)) {
    throw NumericalError(ErrorKind::InvalidArgument, "horizon must be positive");
  }
  const HeatOptions &o = hp.options;
  validate(o);
  const Semidiscrete sd(hp);
  const Eigen::Index n = sd.unknowns();
  const VectorXw u_h = hp.state.u.head(n);
  const Wide u_sup = sup_abs(u_h);

  HeatTrajectory tr;
  tr.p = hp.p;
  tr.K = hp.K;
  tr.lambda = lambda;
  tr.log_time_scale = 2 * hp.log_mu;
  tr.horizon_scaled = static_cast<Wide>(horizon) *
                      std::exp(-2 * static_cast<Wide>(hp.log_mu));
  tr.options = o;
  tr.nodes = static_cast<std::size_t>(hp.state.grid.size());
  tr.stationarity_residual = static_cast<double>(hp.state.residual);

  const double u0 = hp.u0;
  VectorXw v = static_cast<Wide>(lambda) * u_h;
  Wide t = 0;
  auto record = [&](Wide dt) {
    Eigen::Index at = 0;
    const double sup = u0 * static_cast<double>(v.cwiseAbs().maxCoeff(&at));
    tr.peak_log_r.push_back(at == 0 ? -std::numeric_limits<double>::infinity()
                                    : hp.state.grid.log_r(at) + hp.log_mu);
    tr.peak_sign.push_back(v(at) < 0 ? -1 : 1);
    tr.t_scaled.push_back(t);
    tr.dt_scaled.push_back(dt);
    tr.sup_norm.push_back(sup);
    tr.energy.push_back(static_cast<Wide>(u0) * u0 * sd.energy(v));
    const double dev = u0 * static_cast<double>(sup_abs(v - u_h));
    tr.max_stationary_deviation = std::max(tr.max_stationary_deviation, dev);
    tr.final_stationary_residual = static_cast<double>(sup_abs(v - u_h) / u_sup);
    return sup;
  };
  double sup = record(0);

  VectorXw rate = sd.rate(v);
  Wide dt = o.dt_initial;
  {
    const Wide r = sup_abs(rate);
    if (r > 0) {
      dt = std::min(dt, Wide(0.1L) * static_cast<Wide>(o.rtol) * sup_abs(v) / r);
    }
  }
  int consecutive_rejects = 0;
  // growth limit, relaxed again after Newton failures
  Wide growth_cap = 5;
  tr.stop = StopReason::StepLimit;
  VectorXw next(n);
  while (tr.accepted < o.max_steps) {
    if (sup >= o.M_big) {
      tr.stop = StopReason::Threshold;
      break;
    }
    if (sup <= o.delta) {
      tr.stop = StopReason::Decay;
      break;
    }
    if (t >= tr.horizon_scaled) {
      tr.stop = StopReason::Horizon;
      break;
    }
    const Wide remaining = tr.horizon_scaled - t;
    const Wide step = std::min(dt, remaining);
    if (!sd.step(v, step, next)) {
      ++tr.solve_failures;
      ++tr.rejected;
      dt = step / 4;
      growth_cap = 1;
      if (++consecutive_rejects > 60) {
        tr.stop = StopReason::StepUnderflow;
        break;
      }
      continue;
    }
    // first-order local error ~ dt/2 |v'(t+dt) - v'(t)|
    VectorXw next_rate = (next - v) / step;
    const Wide scale = static_cast<Wide>(o.rtol) * std::max(sup_abs(next), sup_abs(v));
    const Wide err = step / 2 * sup_abs(next_rate - rate) / scale;
    const Wide factor =
        err > 0 ? std::clamp(Wide(0.8L) / std::sqrt(err), Wide(0.2L), Wide(2))
                : Wide(2);
    if (err > 1) {
      ++tr.rejected;
      dt = step * factor;
      growth_cap = 1;
      if (++consecutive_rejects > 60) {
        tr.stop = StopReason::StepUnderflow;
        break;
      }
      continue;
    }
    consecutive_rejects = 0;
    ++tr.accepted;
    v.swap(next);
    rate.swap(next_rate);
    t = step < remaining ? t + step : tr.horizon_scaled;
    sup = record(step);
    dt = step * std::min(factor, growth_cap);
    growth_cap = std::min(growth_cap * Wide(1.2L), Wide(5));
  }
  for (Eigen::Index i = 0; i <= n; ++i) {
    tr.final_log_r.push_back(i == 0 ? -std::numeric_limits<double>::infinity()
                                    : hp.state.grid.log_r(i) + hp.log_mu);
    tr.final_v.push_back(i == n ? 0.0 : u0 * static_cast<double>(v(i)));
  }
  tr.classification = classify(tr);
  return tr;
}

Wide fit_blowup_time(const HeatTrajectory &tr, int samples) {
  const std::size_t m = tr.sup_norm.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(samples), m);
  if (k < 3) {
    return std::numeric_limits<Wide>::quiet_NaN();
  }
  const std::size_t j0 = m - k;
  // y = (sup / sup_j0)^{-(p-1)} = (T - t) / (T - t_j0) is linear in the local
  // clock tau = t - t_j0, accumulated from the steps so it stays resolved
  // after t itself stops changing in floating point
  const Wide q = static_cast<Wide>(tr.p) - 1;
  const Wide ls0 = std::log(static_cast<Wide>(tr.sup_norm[j0]));
  Wide tau = 0;
  Wide sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = j0; j < m; ++j) {
    if (j > j0) {
      tau += tr.dt_scaled[j];
    }
    const Wide y = std::exp(-q * (std::log(static_cast<Wide>(tr.sup_norm[j])) - ls0));
    sx += tau;
    sy += y;
    sxx += tau * tau;
    sxy += tau * y;
  }
  const Wide kk = static_cast<Wide>(k);
  const Wide den = kk * sxx - sx * sx;
  if (!(den > 0)) {
    return std::numeric_limits<Wide>::quiet_NaN();
  }
  const Wide b = (kk * sxy - sx * sy) / den;
  const Wide a = (sy - b * sx) / kk;
  if (!(b < 0) || !(a > 0)) {
    return std::numeric_limits<Wide>::quiet_NaN();
  }
  return tr.t_scaled[j0] + (-a / b);
}

HeatClassification classify(const HeatTrajectory &tr) {
  HeatClassification c;
  c.T_scaled = std::numeric_limits<Wide>::quiet_NaN();
  c.T_est = std::numeric_limits<double>::quiet_NaN();
  const auto &o = tr.options;
  if (tr.sup_norm.empty()) {
    c.note = "empty trajectory";
    return c;
  }
  const double peak = *std::max_element(tr.sup_norm.begin(), tr.sup_norm.end());
  const double last = tr.sup_norm.back();
  if (peak >= o.M_big) {
    const Wide dt = tr.dt_scaled.back();
    const Wide t = tr.t_scaled.back();
    if (!(dt < static_cast<Wide>(o.dt_min_rel) * t)) {
      c.note = "threshold crossed without shrinking steps";
      return c;
    }
    const Wide T = fit_blowup_time(tr, o.fit_samples);
    if (std::isnan(T)) {
      c.note = "growth does not fit the blow-up rate";
      return c;
    }
    c.outcome = Outcome::BlowUp;
    c.T_scaled = T;
    c.T_est = static_cast<double>(std::exp(static_cast<Wide>(tr.log_time_scale)) * T);
    return c;
  }
  if (tr.stop == StopReason::Decay || last <= o.delta) {
    c.outcome = Outcome::Global;
    c.note = "decay";
    return c;
  }
  if (tr.stop == StopReason::Horizon) {
    if (tr.final_stationary_residual <= o.stationary_tol) {
      c.outcome = Outcome::Global;
      c.note = "stationary";
    } else {
      c.note = "horizon reached, bounded, not settled";
    }
    return c;
  }
  if (tr.stop == StopReason::StepUnderflow) {
    const std::size_t m = tr.sup_norm.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(o.fit_samples), m);
    const bool growing = tr.sup_norm[m - 1] > 1.01 * tr.sup_norm[m - k];
    c.note = growing ? "step underflow during growth"
                     : to_string(ErrorKind::StepUnderflowWithoutGrowth);
    return c;
  }
  c.note = "step limit";
  return c;
}

WindowReport lambda_sweep(const StationarySolution &sol,
                          const std::vector<double> &lambda_grid,
                          double horizon, const HeatOptions &options,
                          int bisect_steps, int jobs) {
  if (lambda_grid.empty()) {
    throw NumericalError(ErrorKind::EmptySweep, "lambda grid is empty");
  }
  const HeatProblem hp = prepare_heat(sol, options);
  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end());
  std::vector<SweepEntry> entries(grid.size());
  auto run = [&](double lambda) {
    const HeatTrajectory tr = evolve(hp, lambda, horizon);
    SweepEntry e;
    e.lambda = lambda;
    e.outcome = tr.classification.outcome;
    e.T_est = tr.classification.T_est;
    e.T_scaled = tr.classification.T_scaled;
    return e;
  };
  parallel_for(grid.size(), jobs, [&](std::size_t i) { entries[i] = run(grid[i]); });

  const double nan = std::numeric_limits<double>::quiet_NaN();
  WindowReport rep;
  rep.p = sol.p;
  rep.K = sol.K;
  rep.horizon = horizon;
  rep.lower_edge_a = rep.lower_edge_b = rep.upper_edge_a = rep.upper_edge_b = nan;

  // bisect each adjacent Global/BlowUp pair that does not straddle 1
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
    const auto a = entries[i].outcome, b = entries[i + 1].outcome;
    const bool mixed = (a == Outcome::Global && b == Outcome::BlowUp) ||
                       (a == Outcome::BlowUp && b == Outcome::Global);
    if (mixed && (grid[i + 1] <= 1.0 || grid[i] >= 1.0)) {
      edges.emplace_back(i, i + 1);
    }
  }
  std::vector<SweepEntry> refined;
  std::vector<std::pair<double, double>> brackets(edges.size());
  parallel_for(edges.size(), jobs, [&](std::size_t k) {
    SweepEntry lo = entries[edges[k].first], hi = entries[edges[k].second];
    for (int step = 0; step < bisect_steps; ++step) {
      SweepEntry mid = run(0.5 * (lo.lambda + hi.lambda));
      mid.refined = true;
      if (mid.outcome == lo.outcome) {
        lo = mid;
      } else if (mid.outcome == hi.outcome) {
        hi = mid;
      } else {
        break;
      }
    }
    brackets[k] = {lo.lambda, hi.lambda};
  });
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double a = brackets[k].first, b = brackets[k].second;
    if (b <= 1.0) {
      rep.lower_edge_a = a;
      rep.lower_edge_b = b;
    } else {
      if (std::isnan(rep.upper_edge_a)) {
        rep.upper_edge_a = a;
        rep.upper_edge_b = b;
      }
    }
    for (double l : {a, b}) {
      const bool known = std::any_of(entries.begin(), entries.end(),
                                     [&](const SweepEntry &e) { return e.lambda == l; });
      const bool seen = std::any_of(refined.begin(), refined.end(),
                                    [&](const SweepEntry &e) { return e.lambda == l; });
      if (!known && !seen) {
        SweepEntry e = run(l);
        e.refined = true;
        refined.push_back(e);
      }
    }
  }

  rep.window_low = rep.window_high = nan;
  rep.small_lambda_global = nan;
  for (std::size_t i = grid.size(); i-- > 0;) {
    if (grid[i] >= 1.0) {
      continue;
    }
    if (entries[i].outcome != Outcome::BlowUp) {
      break;
    }
    rep.window_low = grid[i];
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 1.0) {
      continue;
    }
    if (entries[i].outcome != Outcome::BlowUp) {
      break;
    }
    rep.window_high = grid[i];
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1.0 && entries[i].outcome == Outcome::Global) {
      rep.small_lambda_global = grid[i];
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const auto &a = entries[i], &b = entries[j];
      if (a.lambda >= 1.0 && a.outcome == Outcome::BlowUp &&
          b.outcome == Outcome::BlowUp && b.T_scaled > a.T_scaled * Wide(1.05L)) {
        rep.monotonicity_flags.emplace_back(a.lambda, b.lambda);
      }
    }
  }
  rep.entries = entries;
  rep.entries.insert(rep.entries.end(), refined.begin(), refined.end());
  std::sort(rep.entries.begin(), rep.entries.end(),
            [](const SweepEntry &a, const SweepEntry &b) { return a.lambda < b.lambda; });
  return rep;
}

} // namespace nodal
