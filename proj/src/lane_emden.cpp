#include "nodal/lane_emden.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nodal {
namespace {

using State = RawShot::State;

State series_state(double p, double t) {
  // w = 1 - rho^2/4 + p rho^4/64, w_t = rho w_rho
  const double rho2 = std::exp(2 * t);
  State y;
  y << 1.0 - rho2 / 4 + p * rho2 * rho2 / 64, -rho2 / 2 + p * rho2 * rho2 / 16;
  return y;
}

RawShot::Integrator make_integrator(double p, double tol) {
  RawShot::Integrator integrator(
      [p](double t, const State &y) {
        State dy;
        dy << y(1), RawShot::forcing(p, t, y(0));
        return dy;
      },
      tol, tol * 1e-2);
  integrator.set_min_step(1e-12);
  integrator.set_max_step(2.0);
  return integrator;
}

// Root of component c of the solution inside an accepted step: bisection on
// exact sub-steps, then one Newton polish.
double refine_root(const RawShot::Integrator &integrator,
                   const RawShot::Integrator::Step &step, int c, double p) {
  auto value = [&](double t) {
    return integrator.single_step(step.t0, step.y0, t - step.t0);
  };
  double lo = step.t0;
  double hi = step.t1();
  double flo = step.y0(c);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = value(mid)(c);
    if ((fm < 0) == (flo < 0) && fm != 0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double t = 0.5 * (lo + hi);
  const State y = value(t);
  const double slope = c == 0 ? y(1) : RawShot::forcing(p, t, y(0));
  if (slope != 0) {
    const double next = t - y(c) / slope;
    if (next >= step.t0 && next <= step.t1()) {
      t = next;
    }
  }
  return t;
}

bool crosses(double a, double b) { return (a < 0) != (b < 0) || b == 0; }

} // namespace

double RawShot::forcing(double p, double t, double w) {
  const double a = std::abs(w);
  if (a < 1e-300) {
    return 0.0;
  }
  const double m = std::exp(2 * t + p * std::log(a));
  return w < 0 ? m : -m;
}

std::vector<double> RawShot::zeros() const {
  std::vector<double> out;
  out.reserve(log_zeros.size());
  for (double t : log_zeros) {
    out.push_back(std::exp(t));
  }
  return out;
}

RawShot::State RawShot::evaluate(double t) const {
  if (t <= log_rho_begin()) {
    return series_state(p, t);
  }
  auto it = std::upper_bound(
      steps.begin(), steps.end(), t,
      [](double v, const Integrator::Step &s) { return v < s.t0; });
  const Integrator::Step &step = *(it - 1);
  if (t == step.t0) {
    return step.y0;
  }
  const Integrator integrator = make_integrator(p, options.tol);
  return integrator.single_step(step.t0, step.y0, t - step.t0);
}

double RawShot::slope_at_zero(std::size_t i) const {
  const double t = log_zeros.at(i);
  // w'(rho) = w_t / rho
  return evaluate(t)(1) * std::exp(-t);
}

RawShot shoot_ivp(double p, int zeros_wanted, const ShootOptions &options) {
  if (!(p > 1) || zeros_wanted < 1 || !(options.tol > 0)) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "shoot_ivp requires p > 1, zeros_wanted >= 1, tol > 0");
  }
  RawShot shot;
  shot.p = p;
  shot.options = options;
  const RawShot::Integrator integrator = make_integrator(p, options.tol);

  double t = std::log(options.rho_series);
  State y = series_state(p, t);
  double h = 0.05;
  while (static_cast<int>(shot.log_zeros.size()) < zeros_wanted) {
    if (t > options.log_rho_max) {
      throw NumericalError(
          ErrorKind::MaxSpanExceeded,
          "zero " + std::to_string(shot.log_zeros.size() + 1) +
              " not reached before log(rho_max) = " +
              std::to_string(options.log_rho_max));
    }
    const auto step = integrator.advance(t, y, h);
    shot.steps.push_back(step);
    double zero = std::numeric_limits<double>::infinity();
    if (crosses(step.y0(0), step.y1(0))) {
      zero = refine_root(integrator, step, 0, p);
    }
    if (crosses(step.y0(1), step.y1(1)) && step.y0(1) != 0) {
      const double te = refine_root(integrator, step, 1, p);
      if (te < zero) {
        const State ye = integrator.single_step(step.t0, step.y0, te - step.t0);
        shot.extrema.emplace_back(te, ye(0));
      }
    }
    if (std::isfinite(zero)) {
      shot.log_zeros.push_back(zero);
    }
    t = step.t1();
    y = step.y1;
  }
  return shot;
}

double StationarySolution::value_at(double r) const {
  const Eigen::Index n = grid.size();
  if (r <= 0) {
    return u(0);
  }
  const double s = std::log(r);
  if (s >= grid.log_r(n - 1)) {
    return u(n - 1);
  }
  if (s <= grid.log_r(1)) {
    // u(r) = u0 - r^2 u0^p / 4 near the origin
    return u(0) - std::exp(2 * s + p * std::log(u(0))) / 4;
  }
  const auto &lr = grid.log_r();
  const auto *it = std::upper_bound(lr.data() + 1, lr.data() + n, s);
  const Eigen::Index i = (it - lr.data()) - 1;
  const double h = lr(i + 1) - lr(i);
  const double x = (s - lr(i)) / h;
  const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
  const double h10 = x * (1 - x) * (1 - x);
  const double h01 = x * x * (3 - 2 * x);
  const double h11 = x * x * (x - 1);
  return h00 * u(i) + h10 * h * u_s(i) + h01 * u(i + 1) + h11 * h * u_s(i + 1);
}

int StationarySolution::interior_sign_changes() const {
  int count = 0;
  for (Eigen::Index i = 0; i + 2 < u.size(); ++i) {
    if ((u(i) < 0) != (u(i + 1) < 0)) {
      ++count;
    }
  }
  return count;
}

Eigen::VectorXd stationary_nodes(const RawShot &shot, int K,
                                 Eigen::Index nodes, double inner_margin) {
  const double p = shot.p;
  const double t_k = shot.log_zeros.at(K - 1);
  const double log_mu = -0.5 * std::log(p) - t_k;
  const double s_begin = log_mu - inner_margin;
  const Eigen::Index m = 40000;
  const Eigen::VectorXd aux = Eigen::VectorXd::LinSpaced(m, s_begin, 0.0);
  Eigen::VectorXd root_w(m);
  // dense output is plenty for a monitor function
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double t = aux(j) + t_k;
    double w;
    if (t <= shot.log_rho_begin()) {
      w = 1.0;
    } else {
      while (k + 1 < shot.steps.size() && shot.steps[k].t1() < t) {
        ++k;
      }
      w = shot.steps[k].dense(std::min(t, shot.steps[k].t1()))(0);
    }
    const double a = std::abs(w);
    root_w(j) = a < 1e-300
                    ? 0.0
                    : std::exp(0.5 * (std::log(p) + 2 * t + (p - 1) * std::log(a)));
  }
  double feature = 0;
  for (Eigen::Index j = 1; j < m; ++j) {
    feature += 0.5 * (root_w(j) + root_w(j - 1)) * (aux(j) - aux(j - 1));
  }
  // plateau over the core of the positive bubble, where the ground state of
  // the linearization lives
  Eigen::VectorXd core(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double st = aux(j) - log_mu;
    core(j) = 1.0 / ((1.0 + std::exp(-(st + 6.0))) * (1.0 + std::exp(2.0 * (st - 5.0))));
  }
  double core_mass = 0;
  for (Eigen::Index j = 1; j < m; ++j) {
    core_mass += 0.5 * (core(j) + core(j - 1)) * (aux(j) - aux(j - 1));
  }
  const double length = -s_begin;
  // 1/8 uniform, 3/8 bubble monitor, 1/2 core plateau
  const double beta = feature > 0 ? 3.0 * length / feature : 0.0;
  const double kappa = 4.0 * length / core_mass;
  const Eigen::VectorXd density =
      (1.0 + beta * root_w.array() + kappa * core.array()).matrix();
  return equidistribute(s_begin, 0.0, nodes, aux, density);
}

StationarySolution build_stationary_on(const RawShot &shot, int K,
                                       const Eigen::VectorXd &log_r) {
  if (K < 1 || static_cast<int>(shot.log_zeros.size()) < K) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "shot does not carry K zeros");
  }
  const double p = shot.p;
  const double t_k = shot.log_zeros[K - 1];
  const double log_gamma = 2 * t_k / (p - 1);
  const double gamma = std::exp(log_gamma);

  StationarySolution sol;
  sol.p = p;
  sol.K = K;
  sol.tol = shot.options.tol;
  sol.grid = RadialGrid(log_r);
  const Eigen::Index n = log_r.size();
  sol.u.resize(n);
  sol.du.resize(n);
  sol.u(0) = gamma;
  sol.du(0) = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const State y = shot.evaluate(log_r(i) + t_k);
    sol.u(i) = gamma * y(0);
    sol.du(i) = gamma * y(1) * std::exp(-log_r(i));
  }
  for (int i = 0; i + 1 < K; ++i) {
    sol.nodal_radii.push_back(std::exp(shot.log_zeros[i] - t_k));
  }
  for (const auto &[t, w] : shot.extrema) {
    if (t < t_k) {
      sol.extrema.push_back({std::exp(t - t_k), gamma * w});
    }
  }
  sol.u_max = gamma;
  sol.u_min = 0.0;
  sol.r_min = 1.0;
  for (const auto &e : sol.extrema) {
    if (e.u < sol.u_min) {
      sol.u_min = e.u;
      sol.r_min = e.r;
    }
  }
  sol.log_mu_plus = -0.5 * (std::log(p) + (p - 1) * log_gamma);
  sol.log_mu_minus =
      sol.u_min < 0 ? -0.5 * (std::log(p) + (p - 1) * std::log(-sol.u_min))
                    : std::numeric_limits<double>::infinity();
  return sol;
}

StationarySolution build_stationary(double p, int K,
                                    const BuildOptions &options) {
  const RawShot shot = shoot_ivp(p, K, options.shoot);
  return build_stationary_on(
      shot, K, stationary_nodes(shot, K, options.nodes, options.inner_margin));
}

Energies energy_functionals(const StationarySolution &sol) {
  const double p = sol.p;
  const auto &g = sol.grid;
  const Eigen::Index n = g.size();
  Wide grad = 0;
  Wide pot = 0;
  // origin cell: u is flat there, only the potential term matters
  if (std::abs(sol.u(0)) > 0) {
    pot += std::exp(static_cast<Wide>(2 * g.log_r(1)) +
                    (p + 1) * std::log(static_cast<Wide>(std::abs(sol.u(0))))) /
           2;
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h = g.log_r(i + 1) - g.log_r(i);
    auto pieces = [&](Eigen::Index j, double &f1, double &d1, double &f2,
                      double &d2) {
      const double s = g.log_r(j);
      const double u = sol.u(j);
      const double us = sol.u_s(j);
      const double a = std::abs(u);
      // e^{2s}|u|^{p-1}
      const double wpot =
          a < 1e-300 ? 0.0 : std::exp(2 * s + (p - 1) * std::log(a));
      const double uss = -wpot * u;
      f1 = us * us;
      d1 = 2 * us * uss;
      f2 = wpot * a * a;
      d2 = 2 * f2 + (p + 1) * wpot * u * us;
    };
    double f1a, d1a, f2a, d2a, f1b, d1b, f2b, d2b;
    pieces(i, f1a, d1a, f2a, d2a);
    pieces(i + 1, f1b, d1b, f2b, d2b);
    // trapezoid with Euler-Maclaurin end correction
    grad += h / 2 * (f1a + f1b) + h * h / 12 * (d1a - d1b);
    pot += h / 2 * (f2a + f2b) + h * h / 12 * (d2a - d2b);
  }
  const Wide scale = 2 * kPiWide * p;
  return {static_cast<double>(scale * grad), static_cast<double>(scale * pot)};
}

double ode_residual(const StationarySolution &sol) {
  const double p = sol.p;
  const auto &g = sol.grid;
  const Eigen::Index n = g.size();
  using V2 = Eigen::Vector2d;
  auto rhs = [p](double s, const V2 &y) {
    return V2(y(1), RawShot::forcing(p, s, y(0)));
  };
  double worst = 0;
  const double scale = std::abs(sol.u(0));
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double s0 = g.log_r(i);
    const double h = g.log_r(i + 1) - s0;
    const int m = std::max(4, static_cast<int>(std::ceil(h / 2e-3)));
    const double dt = h / m;
    V2 y(sol.u(i), sol.u_s(i));
    double s = s0;
    for (int k = 0; k < m; ++k) {
      const V2 k1 = rhs(s, y);
      const V2 k2 = rhs(s + dt / 2, y + dt / 2 * k1);
      const V2 k3 = rhs(s + dt / 2, y + dt / 2 * k2);
      const V2 k4 = rhs(s + dt, y + dt * k3);
      y += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      s += dt;
    }
    const double defect = std::abs(y(0) - sol.u(i + 1)) / (h * h) +
                          std::abs(y(1) - sol.u_s(i + 1)) / h;
    worst = std::max(worst, defect / scale);
  }
  return worst;
}

} // namespace nodal
