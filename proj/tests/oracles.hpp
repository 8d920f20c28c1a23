// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's solvers.
#ifndef NODAL_TESTS_ORACLES_HPP
#define NODAL_TESTS_ORACLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline double j0_series(double x) {
  double term = 1, sum = 1;
  for (int k = 1; k < 80; ++k) {
    term *= -(x * x / 4) / (static_cast<double>(k) * k);
    sum += term;
  }
  return sum;
}

/// First positive zero of J0 by bisection on the power series.
inline double bessel_j01() {
  double a = 2.0, b = 3.0;
  while (b - a > 1e-15) {
    const double m = 0.5 * (a + b);
    if (j0_series(a) * j0_series(m) <= 0) {
      b = m;
    } else {
      a = m;
    }
  }
  return 0.5 * (a + b);
}

inline double bubble_mass(double R) {
  return 8 * M_PI * (1 - 1 / (1 + R * R / 8));
}

inline double bubble(double r) { return -2 * std::log1p(r * r / 8); }

/// Fixed-step classical RK4 for w_tt = -e^{2t} |w|^{p-1} w (t = log rho),
/// started from the series w = 1 - rho^2/4 + p rho^4/64.
class Shooter {
public:
  using State = std::array<long double, 2>;

  explicit Shooter(double p) : p_(p) {
    rho0_ = 1e-3 / std::sqrt(p);
    t0_ = std::log(rho0_);
  }

  double t0() const { return t0_; }

  /// log rho of the first `count` sign changes of w, with Richardson
  /// extrapolation over steps h and h/2.
  std::vector<double> zeros(int count, double h) const {
    const auto a = zeros_at(count, h);
    const auto b = zeros_at(count, h / 2);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      out[i] = (16 * b[i] - a[i]) / 15;
    }
    return out;
  }

  /// w at increasing log rho targets, Richardson over h and h/2.
  std::vector<double> values(const std::vector<double> &targets, double h) const {
    const auto a = values_at(targets, h);
    const auto b = values_at(targets, h / 2);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      out[i] = (16 * b[i] - a[i]) / 15;
    }
    return out;
  }

private:
  State start() const {
    const long double r2 = static_cast<long double>(rho0_) * rho0_;
    return {1 - r2 / 4 + p_ * r2 * r2 / 64, -r2 / 2 + p_ * r2 * r2 / 16};
  }

  State rhs(long double t, const State &y) const {
    const long double a = std::fabs(y[0]);
    const long double f = a == 0 ? 0 : std::exp(2 * t + p_ * std::log(a));
    return {y[1], y[0] < 0 ? f : -f};
  }

  State step(long double t, const State &y, long double h) const {
    auto add = [](const State &u, const State &k, long double c) {
      return State{u[0] + c * k[0], u[1] + c * k[1]};
    };
    const State k1 = rhs(t, y);
    const State k2 = rhs(t + h / 2, add(y, k1, h / 2));
    const State k3 = rhs(t + h / 2, add(y, k2, h / 2));
    const State k4 = rhs(t + h, add(y, k3, h));
    return {y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  }

  std::vector<double> zeros_at(int count, double h) const {
    std::vector<double> out;
    long double t = t0_;
    State y = start();
    while (static_cast<int>(out.size()) < count && t < 2000) {
      const State next = step(t, y, h);
      if ((y[0] > 0) != (next[0] > 0)) {
        // Newton on the sub-step length from the left endpoint
        long double tau = -y[0] / y[1];
        for (int it = 0; it < 50; ++it) {
          tau = std::clamp(tau, 0.0L, static_cast<long double>(h));
          const State z = step(t, y, tau);
          const long double d = z[0] / z[1];
          tau -= d;
          if (std::fabs(d) < 1e-18L) {
            break;
          }
        }
        out.push_back(static_cast<double>(t + tau));
      }
      y = next;
      t += h;
    }
    return out;
  }

  std::vector<double> values_at(const std::vector<double> &targets, double h) const {
    std::vector<double> out;
    out.reserve(targets.size());
    long double t = t0_;
    State y = start();
    for (double target : targets) {
      if (target <= t0_) {
        const long double r2 = std::exp(2.0L * target);
        out.push_back(static_cast<double>(1 - r2 / 4 + p_ * r2 * r2 / 64));
        continue;
      }
      while (t + h < target) {
        y = step(t, y, h);
        t += h;
      }
      const State z = step(t, y, target - t);
      out.push_back(static_cast<double>(z[0]));
    }
    return out;
  }

  long double p_;
  double rho0_;
  double t0_;
};

/// Radial profile u(r) = gamma w(rho_K r), gamma = rho_K^{2/(p-1)}, at the
/// given log-radii (sorted increasing; -inf stands for the origin).
struct StationaryOracle {
  double p;
  int K;
  std::vector<double> log_rho_zeros;
  double log_gamma;

  StationaryOracle(double p_, int K_, double h) : p(p_), K(K_) {
    log_rho_zeros = Shooter(p).zeros(K, h);
    log_gamma = 2 * log_rho_zeros.back() / (p - 1);
  }

  double u_max() const { return std::exp(log_gamma); }

  std::vector<double> nodal_radii() const {
    std::vector<double> out;
    for (int i = 0; i + 1 < K; ++i) {
      out.push_back(std::exp(log_rho_zeros[i] - log_rho_zeros.back()));
    }
    return out;
  }

  std::vector<double> u(const std::vector<double> &log_r, double h) const {
    std::vector<double> t(log_r.size());
    for (std::size_t i = 0; i < log_r.size(); ++i) {
      t[i] = std::isinf(log_r[i]) ? -1e300 : log_r[i] + log_rho_zeros.back();
    }
    const auto w = Shooter(p).values(t, h);
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      out[i] = u_max() * w[i];
    }
    return out;
  }
};

/// splitmix64; deterministic generator for property tests.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double a, double b) {
    return a + (b - a) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t s_;
};

} // namespace oracle

#endif // NODAL_TESTS_ORACLES_HPP
