#include "oracles.hpp"

#include "nodal/lane_emden.hpp"

#include <doctest.h>

#include <cmath>

using namespace nodal;

namespace {

std::vector<double> log_nodes(const StationarySolution &sol) {
  std::vector<double> lr(sol.grid.log_r().data(),
                         sol.grid.log_r().data() + sol.grid.size());
  lr[0] = -INFINITY;
  return lr;
}

} // namespace

TEST_CASE("stationary solution matches an independent RK4 shooter") {
  for (int K : {2, 3}) {
    for (double p : {20.0, 100.0}) {
      CAPTURE(p);
      CAPTURE(K);
      const StationarySolution sol = build_stationary(p, K);
      const oracle::StationaryOracle ref(p, K, 4e-3);
      const auto u = ref.u(log_nodes(sol), 4e-3);
      double err = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        err = std::max(err, std::abs(u[i] - sol.u(static_cast<Eigen::Index>(i))));
      }
      CHECK(err < 1e-7);
      CHECK(sol.u_max == doctest::Approx(ref.u_max()).epsilon(1e-9));
      const auto radii = ref.nodal_radii();
      REQUIRE(sol.nodal_radii.size() == radii.size());
      for (std::size_t i = 0; i < radii.size(); ++i) {
        CHECK(sol.nodal_radii[i] == doctest::Approx(radii[i]).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("basic invariants hold across random exponents") {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const double p = rng.uniform(5.0, 400.0);
    const int K = 1 + static_cast<int>(rng.next() % 3);
    CAPTURE(p);
    CAPTURE(K);
    const StationarySolution sol = build_stationary(p, K);
    CHECK(sol.nodal_radii.size() == static_cast<std::size_t>(K - 1));
    CHECK(sol.interior_sign_changes() == K - 1);
    CHECK(std::abs(sol.u(sol.u.size() - 1)) < 1e-10);
    CHECK(ode_residual(sol) < 1e-8);
    CHECK(sol.u(0) == doctest::Approx(sol.u_max));
    for (Eigen::Index i = 0; i < sol.u.size(); ++i) {
      CHECK(std::abs(sol.u(i)) <= sol.u_max * (1 + 1e-12));
    }
    for (std::size_t i = 1; i < sol.nodal_radii.size(); ++i) {
      CHECK(sol.nodal_radii[i] > sol.nodal_radii[i - 1]);
    }
    if (K >= 2) {
      CHECK(sol.log_mu_plus < sol.log_mu_minus);
    }
  }
}

TEST_CASE("concentration scales shrink with p") {
  double prev_plus = 0, prev_minus = 0;
  for (double p : {20.0, 50.0, 100.0, 200.0}) {
    const StationarySolution sol = build_stationary(p, 2);
    if (p > 20) {
      CHECK(sol.log_mu_plus < prev_plus);
      CHECK(sol.log_mu_minus < prev_minus);
    }
    prev_plus = sol.log_mu_plus;
    prev_minus = sol.log_mu_minus;
    CHECK(-sol.u_min >= 1.0);
  }
}

TEST_CASE("energy identity: gradient and potential energies agree") {
  const StationarySolution sol = build_stationary(100, 2);
  const Energies e = energy_functionals(sol);
  CHECK(e.gradient == doctest::Approx(e.potential).epsilon(1e-6));
}

TEST_CASE("invalid shooting requests raise") {
  CHECK_THROWS_AS(build_stationary(1.0, 2), NumericalError);
  CHECK_THROWS_AS(build_stationary(10.0, 0), NumericalError);
}
