#include "oracles.hpp"

#include "nodal/liouville.hpp"
#include "nodal/spectrum.hpp"

#include <doctest.h>

#include <cmath>

using namespace nodal;

namespace {

// Continuous Rayleigh quotient of -Delta - e^U for w(r) = (1 + b r^2) e^{-a r^2},
// composite Simpson in r on [0, R].
double rayleigh_star(double a, double b, double R) {
  const int n = 200000;
  const double h = R / n;
  double num = 0, den = 0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double e = std::exp(-a * r * r);
    const double w = (1 + b * r * r) * e;
    const double dw = (2 * b * r - 2 * a * r * (1 + b * r * r)) * e;
    const double c = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    num += c * r * (dw * dw - std::exp(oracle::bubble(r)) * w * w);
    den += c * r * w * w;
  }
  return num / den;
}

bool nonnegative(const VectorXw &phi) {
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (phi(i) < 0) {
      return false;
    }
  }
  return true;
}

} // namespace

TEST_CASE("zero-potential disk eigenvalue equals j01 squared") {
  const double j = oracle::bessel_j01();
  CHECK(j == doctest::Approx(2.404825557695773).epsilon(1e-14));
  const EigenPair pair = dirichlet_disk_ground_state(8000);
  CHECK(std::abs(static_cast<double>(pair.lambda) - j * j) < 1e-6);
  // J0 profile
  for (Eigen::Index i = 0; i < pair.grid.size(); i += 500) {
    const double r = pair.grid.r(i);
    CHECK(static_cast<double>(pair.phi(i) / pair.phi(0)) ==
          doctest::Approx(oracle::j0_series(j * r)).epsilon(1e-5));
  }
}

TEST_CASE("limit operator ground state") {
  const EigenPair lim = limit_first_eigenpair(200, 8000);
  CHECK(lim.lambda < 0);
  CHECK(lim.residual < 1e-8);
  CHECK(static_cast<double>(lim.l2_norm()) == doctest::Approx(1).epsilon(1e-10));
  CHECK(nonnegative(lim.phi));
  for (Eigen::Index i = 1; i < lim.phi.size(); ++i) {
    CHECK(lim.phi(i) <= lim.phi(i - 1) + 1e-10L);
  }
  const Eigen::VectorXd nodes = limit_nodes(200, 8000);
  Eigen::Index cut = 0;
  while (std::exp(nodes(cut + 1)) <= 100) {
    ++cut;
  }
  const EigenPair half = limit_first_eigenpair_on(nodes.head(cut + 1));
  CHECK(std::abs(static_cast<double>(lim.lambda - half.lambda)) < 1e-4);
  CHECK(lim.lambda <= half.lambda + 1e-10L * std::abs(half.lambda));

  SUBCASE("variational bound for random smooth trials") {
    oracle::Rng rng(3);
    for (int t = 0; t < 10; ++t) {
      const double a = std::exp(rng.uniform(std::log(0.01), std::log(3.0)));
      const double b = rng.uniform(0.0, 2.0);
      CAPTURE(a);
      CAPTURE(b);
      CHECK(rayleigh_star(a, b, 200) >= static_cast<double>(lim.lambda) - 1e-6);
    }
  }
}

TEST_CASE("linearized operator at p = 100") {
  const StationarySolution sol = build_stationary(100, 2);
  const EigenPair pair = first_eigenpair_Lp(sol);
  CHECK(pair.lambda < 0);
  CHECK(pair.residual < 1e-8);
  CHECK(nonnegative(pair.phi));
  CHECK(static_cast<double>(pair.l2_norm()) == doctest::Approx(1).epsilon(1e-10));

  const RescaledEigenPair re = rescaled_eigen(sol, pair);
  CHECK(re.l2_norm == doctest::Approx(1).epsilon(1e-8));
  CHECK(re.potential(0) == doctest::Approx(1));
  for (Eigen::Index i = 0; i < re.potential.size(); ++i) {
    CHECK(re.potential(i) >= 0);
    CHECK(re.potential(i) <= 1 + 1e-12);
  }

  BuildOptions fine;
  fine.nodes = 8000;
  const EigenPair doubled = first_eigenpair_Lp(build_stationary(100, 2, fine));
  const double rel = static_cast<double>(std::abs((doubled.lambda - pair.lambda) / pair.lambda));
  CHECK(rel < 1e-5);
}

TEST_CASE("potential approaches the bubble weight between p = 100 and 1000") {
  auto gap = [](double p) {
    const StationarySolution sol = build_stationary(p, 2);
    const RescaledEigenPair re = rescaled_eigen(sol, first_eigenpair_Lp(sol));
    double g = 0;
    for (Eigen::Index i = 0; i < re.grid.size(); ++i) {
      const double s = re.grid.r(i);
      if (s <= 10) {
        g = std::max(g, std::abs(re.potential(i) - std::exp(oracle::bubble(s))));
      }
    }
    return g;
  };
  CHECK(gap(1000) < gap(100));
}

TEST_CASE("rescaled eigenvalues converge to the limit") {
  const EigenPair lim = limit_first_eigenpair(200, 8000);
  const auto report = eigen_convergence_report({20, 100, 1000}, 2, lim);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.lambda_error_decreasing);
  CHECK(report.phi_error_decreasing);
  CHECK(report.rows.back().lambda_error < 0.05 * std::abs(report.lambda_star));
  CHECK(std::abs(report.rows.back().gap_integral) < 0.02);
  for (const auto &row : report.rows) {
    CHECK(row.lambda_tilde < 0);
  }
}
