#include "nodal/heat_flow.hpp"

#include <doctest.h>

#include <cmath>

using namespace nodal;

namespace {

HeatTrajectory synthetic(double p, double T, double c, int n) {
  HeatTrajectory tr;
  tr.p = p;
  tr.options.M_big = 1e8;
  tr.log_time_scale = 0;
  // geometric approach to T
  Wide t = 0;
  Wide prev = 0;
  for (int j = 0; j < n; ++j) {
    t = T * (1 - std::pow(0.7L, static_cast<Wide>(j)));
    tr.t_scaled.push_back(t);
    tr.dt_scaled.push_back(t - prev);
    prev = t;
    tr.sup_norm.push_back(static_cast<double>(
        c * std::pow(static_cast<Wide>(T) - t, -1.0L / (p - 1))));
    tr.energy.push_back(0);
  }
  tr.stop = StopReason::Threshold;
  return tr;
}

} // namespace

TEST_CASE("blow-up time fit recovers synthetic rates") {
  for (double p : {3.0, 20.0, 100.0}) {
    for (double T : {1e-3, 0.5, 40.0}) {
      CAPTURE(p);
      CAPTURE(T);
      const HeatTrajectory tr = synthetic(p, T, 2.0, 60);
      const double fitted = static_cast<double>(fit_blowup_time(tr, 30));
      CHECK(std::abs(fitted - T) < 0.01 * T);
    }
  }
}

TEST_CASE("fit rejects bounded series") {
  HeatTrajectory tr;
  tr.p = 10;
  for (int j = 0; j < 40; ++j) {
    tr.t_scaled.push_back(j);
    tr.dt_scaled.push_back(j ? 1 : 0);
    tr.sup_norm.push_back(1.0 / (1 + j));
  }
  CHECK(std::isnan(static_cast<double>(fit_blowup_time(tr, 30))));
}

TEST_CASE("heat option validation names the field") {
  HeatOptions o;
  o.rtol = -1;
  try {
    validate(o);
    FAIL("expected an exception");
  } catch (const NumericalError &e) {
    CHECK(std::string(e.what()).find("rtol") != std::string::npos);
  }
  HeatOptions ok;
  CHECK_NOTHROW(validate(ok));
}

TEST_CASE("heat flow outcomes at p = 20") {
  const StationarySolution sol = build_stationary(20, 2);
  const HeatProblem prob = prepare_heat(sol);

  SUBCASE("stationary data stays put") {
    const HeatTrajectory tr = evolve(prob, 1.0, 1.0);
    CHECK(tr.classification.outcome == Outcome::Global);
    CHECK(tr.max_stationary_deviation < 1e-3 * sol.u_max);
  }
  SUBCASE("small data decays") {
    const HeatTrajectory tr = evolve(prob, 0.05, 50);
    CHECK(tr.classification.outcome == Outcome::Global);
    CHECK(tr.stop == StopReason::Decay);
  }
  SUBCASE("large data blows up, faster for larger multiples") {
    const HeatTrajectory a = evolve(prob, 1.5, 50);
    const HeatTrajectory b = evolve(prob, 3.0, 50);
    REQUIRE(a.classification.outcome == Outcome::BlowUp);
    REQUIRE(b.classification.outcome == Outcome::BlowUp);
    CHECK(b.classification.T_scaled < a.classification.T_scaled);
    CHECK(a.peak_sign.back() == 1);
  }
  SUBCASE("energy is non-increasing along the flow") {
    const HeatTrajectory tr = evolve(prob, 0.5, 50);
    for (std::size_t j = 1; j < tr.energy.size(); ++j) {
      CHECK(tr.energy[j] <= tr.energy[j - 1] + 1e-9L * std::abs(tr.energy[j - 1]));
    }
  }
}
