#include "oracles.hpp"

#include "nodal/liouville.hpp"

#include <doctest.h>

#include <cmath>

using namespace nodal;

TEST_CASE("bubble mass quadrature matches the closed form at random radii") {
  oracle::Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const double R = std::exp(rng.uniform(std::log(0.01), std::log(500.0)));
    CAPTURE(R);
    CHECK(std::abs(bubble_mass(R) - oracle::bubble_mass(R)) <
          1e-9 * oracle::bubble_mass(R));
  }
  CHECK(std::abs(bubble_mass(1e3) - 8 * M_PI) < 1e-4 * 8 * M_PI);
  CHECK(std::abs(bubble_mass(1e-6) - M_PI * 1e-12) < 1e-6 * M_PI * 1e-12);
}

TEST_CASE("bubble is an entire solution with U(0) = 0") {
  CHECK(LiouvilleBubble::value(0) == 0);
  for (double r : {0.1, 1.0, 3.0, 10.0, 100.0}) {
    // -U'' - U'/r = e^U by centered differences
    const double h = 1e-4 * r;
    const double d2 = (oracle::bubble(r + h) - 2 * oracle::bubble(r) + oracle::bubble(r - h)) / (h * h);
    const double d1 = (oracle::bubble(r + h) - oracle::bubble(r - h)) / (2 * h);
    CHECK(-d2 - d1 / r == doctest::Approx(std::exp(oracle::bubble(r))).epsilon(1e-5));
    CHECK(LiouvilleBubble::derivative(r) == doctest::Approx(d1).epsilon(1e-7));
  }
}

TEST_CASE("rescaled profiles approach the bubble as p grows") {
  for (int K : {2, 3}) {
    double prev_v = INFINITY, prev_d = INFINITY;
    for (double p : {20.0, 50.0, 100.0, 200.0, 500.0, 1000.0}) {
      CAPTURE(p);
      const RescaledProfile prof = rescale_profile(build_stationary(p, K), 20);
      const ConvergenceMetric m = convergence_metric(prof, 10);
      CHECK(m.value_error < prev_v);
      CHECK(m.derivative_error < prev_d);
      prev_v = m.value_error;
      prev_d = m.derivative_error;
      CHECK(prof.v(0) == doctest::Approx(0).epsilon(1e-12));
      for (Eigen::Index i = 0; i < prof.v.size(); ++i) {
        CHECK(prof.v(i) <= 1e-12);
      }
    }
  }
}

TEST_CASE("window larger than the disk is rejected") {
  const StationarySolution sol = build_stationary(20, 2);
  CHECK_THROWS_AS(rescale_profile(sol, 1e30), NumericalError);
}
