// Acceptance checks. Prints one PASS/FAIL line per criterion; with numeric
// arguments only the listed criteria run. Exit status is nonzero if any
// selected criterion fails.
#include "oracles.hpp"

#include "nodal/criteria.hpp"
#include "nodal/heat_flow.hpp"
#include "nodal/liouville.hpp"
#include "nodal/spectrum.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace nodal;

namespace {

const std::vector<double> kPSweep{20, 50, 100, 200, 500, 1000};
const std::vector<double> kRSweep{5, 10, 20, 50};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

class Fixture {
public:
  const std::vector<StationarySolution> &sweep(int K) {
    auto &v = sols_[K];
    if (v.empty()) {
      for (double p : kPSweep) {
        v.push_back(build_stationary(p, K));
      }
    }
    return v;
  }
  const EigenPair &limit() {
    if (limit_.grid.size() == 0) {
      limit_ = limit_first_eigenpair(200, 8000);
    }
    return limit_;
  }

private:
  std::map<int, std::vector<StationarySolution>> sols_;
  EigenPair limit_;
};

void stationary_correctness(Fixture &f, Verdict &v) {
  double worst_res = 0, worst_bc = 0, worst_oracle = 0;
  for (int K : {2, 3}) {
    for (const auto &sol : f.sweep(K)) {
      const std::string cell = "p=" + g(sol.p) + " K=" + std::to_string(K);
      const double res = ode_residual(sol);
      const double bc = std::abs(sol.u(sol.u.size() - 1));
      worst_res = std::max(worst_res, res);
      worst_bc = std::max(worst_bc, bc);
      v.require(res < 1e-8, cell + " residual " + g(res));
      v.require(bc < 1e-10, cell + " boundary " + g(bc));
      v.require(sol.interior_sign_changes() == K - 1, cell + " sign changes");

      const oracle::StationaryOracle ref(sol.p, K, 4e-3);
      std::vector<double> lr(sol.grid.log_r().data(),
                             sol.grid.log_r().data() + sol.grid.size());
      lr[0] = -INFINITY;
      const auto u = ref.u(lr, 4e-3);
      double err = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        err = std::max(err, std::abs(u[i] - sol.u(static_cast<Eigen::Index>(i))));
      }
      worst_oracle = std::max(worst_oracle, err);
      v.require(err < 1e-7, cell + " oracle " + g(err));
    }
  }
  v.detail << "12 cells; max residual " << g(worst_res) << ", max |u(1)| " << g(worst_bc)
           << ", max deviation from RK4 oracle " << g(worst_oracle);
}

void bubble_mass_check(Fixture &, Verdict &v) {
  oracle::Rng rng(2024);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const double R = std::exp(rng.uniform(std::log(0.01), std::log(500.0)));
    const double exact = oracle::bubble_mass(R);
    worst = std::max(worst, std::abs(bubble_mass(R) - exact) / exact);
  }
  // relative: the exact mass of B_1000 is itself 2e-4 below 8 pi
  const double far = std::abs(bubble_mass(1e3) - 8 * M_PI) / (8 * M_PI);
  v.require(worst < 1e-9, "relative error " + g(worst));
  v.require(far < 1e-4, "R=1e3 relative gap " + g(far));
  v.detail << "20 radii max rel. error " << g(worst) << "; |m(1e3) - 8 pi| / 8 pi = " << g(far);
}

void profile_convergence(Fixture &f, Verdict &v) {
  for (int K : {2, 3}) {
    double pv = INFINITY, pd = INFINITY;
    for (const auto &sol : f.sweep(K)) {
      const ConvergenceMetric m = convergence_metric(rescale_profile(sol, 20), 10);
      v.require(m.value_error < pv, "value error not decreasing at p=" + g(sol.p));
      v.require(m.derivative_error < pd, "derivative error not decreasing at p=" + g(sol.p));
      pv = m.value_error;
      pd = m.derivative_error;
    }
    v.detail << "K=" << K << " final errors " << g(pv) << " / " << g(pd) << "; ";
  }
}

void spectral_signs(Fixture &f, Verdict &v) {
  double worst_lambda = -INFINITY;
  for (int K : {2, 3}) {
    for (const auto &sol : f.sweep(K)) {
      const EigenPair pair = first_eigenpair_Lp(sol);
      const RescaledEigenPair re = rescaled_eigen(sol, pair);
      worst_lambda = std::max(worst_lambda, re.lambda_tilde);
      v.require(pair.lambda < 0, "lambda >= 0 at p=" + g(sol.p));
      for (Eigen::Index i = 0; i < pair.phi.size(); ++i) {
        if (pair.phi(i) < 0) {
          v.require(false, "phi negative at p=" + g(sol.p));
          break;
        }
      }
    }
  }
  const EigenPair &lim = f.limit();
  v.require(lim.lambda < 0, "lambda* >= 0");
  Wide rise = 0;
  for (Eigen::Index i = 1; i < lim.phi.size(); ++i) {
    rise = std::max(rise, lim.phi(i) - lim.phi(i - 1));
  }
  v.require(rise <= 1e-10L, "phi* increases by " + g(static_cast<double>(rise)));
  v.detail << "12 cells, max rescaled lambda " << g(worst_lambda) << "; lambda* "
           << static_cast<double>(lim.lambda) << "; max phi* rise "
           << g(static_cast<double>(rise));
}

void pure_laplacian(Fixture &, Verdict &v) {
  const double j = oracle::bessel_j01();
  const EigenPair disk = dirichlet_disk_ground_state(8000);
  const double err = std::abs(static_cast<double>(disk.lambda) - j * j);
  v.require(err < 1e-6, "error " + g(err));
  v.detail << "lambda " << static_cast<double>(disk.lambda) << " vs j01^2 " << j * j
           << ", error " << g(err);
}

void eigen_convergence(Fixture &f, Verdict &v) {
  const EigenPair &lim = f.limit();
  const double ls = std::abs(static_cast<double>(lim.lambda));
  for (int K : {2, 3}) {
    const auto rep = eigen_convergence_report(f.sweep(K), lim);
    const auto &last = rep.rows.back();
    v.require(rep.lambda_error_decreasing, "K=" + std::to_string(K) + " lambda error not decreasing");
    v.require(rep.phi_error_decreasing, "K=" + std::to_string(K) + " phi error not decreasing");
    v.require(last.lambda_error < 0.05 * ls, "final lambda error " + g(last.lambda_error));
    v.require(last.phi_l2_error < 0.1, "final phi error " + g(last.phi_l2_error));
    v.require(std::abs(last.gap_integral) < 0.02, "gap " + g(last.gap_integral));
    v.detail << "K=" << K << " final |dlambda| " << g(last.lambda_error) << ", |dphi| "
             << g(last.phi_l2_error) << ", gap " << g(last.gap_integral) << "; ";
  }
}

void exact_identities(Fixture &f, Verdict &v) {
  double decomp = 0, ratio_err = 0, ident = 0, chain = -INFINITY;
  for (int K : {2, 3}) {
    for (const auto &sol : f.sweep(K)) {
      const double log_ratio = (sol.p - 1) * std::log(-sol.u_min / sol.u_max);
      const double log_mu2 = 2 * (sol.log_mu_plus - sol.log_mu_minus);
      ratio_err = std::max(ratio_err, std::abs(log_ratio - log_mu2) / std::abs(log_mu2));
      const double ratio = min_max_ratio(sol);
      const double P31 = check_P31(sol);
      for (double R : kRSweep) {
        const double S = compute_S(sol, R);
        decomp = std::max(decomp, std::abs(S - std::max(compute_M(sol, R), ratio)) / S);
        chain = std::max(chain, S - P31 / (R * R));
      }
      const DiscreteStationary ds = discrete_stationary(sol);
      const ScalarCriterion c = scalar_criterion(sol, ds, first_eigenpair_Lp(sol, ds));
      ident = std::max(ident, c.identity_residual);
    }
  }
  v.require(decomp <= 1e-14, "S decomposition " + g(decomp));
  v.require(ratio_err <= 1e-12, "ratio vs mu ratio " + g(ratio_err));
  v.require(ident < 1e-6, "eigen identity " + g(ident));
  v.require(chain <= 0, "S exceeds P31/R^2 by " + g(chain));
  v.detail << "S-max(M,ratio) " << g(decomp) << "; log ratio vs 2 log(mu+/mu-) " << g(ratio_err)
           << "; eigen identity " << g(ident) << "; max S - P31/R^2 " << g(chain);
}

void condition_trends(Fixture &f, Verdict &v) {
  const ConditionReport rep = condition_report(f.sweep(2), kRSweep, f.limit());
  v.require(rep.energy_bounded, "energies not bounded");
  v.require(rep.ratio_decreasing, "ratio not strictly decreasing");
  v.require(rep.Mprime_decreasing_in_R, "M' not decreasing in R");
  v.require(rep.Mprime_decreasing_jointly, "M' not decreasing jointly in (p, R)");
  for (std::size_t i = 0; i < rep.p_sweep.size(); ++i) {
    if (rep.p_sweep[i] >= 500) {
      v.require(rep.outer_sup[i] < 0.5, "outer sup " + g(rep.outer_sup[i]));
    }
  }
  v.detail << "energy bound " << g(rep.energy_bound) << "; ratio at p=1000 "
           << g(rep.ratio.back()) << "; M'(1000,50) " << g(rep.Mprime_table.back().back())
           << "; outer sup at p=1000 " << g(rep.outer_sup.back());
}

void criterion_sign(Fixture &f, Verdict &v) {
  const double target = bubble_overlap(f.limit());
  const auto &sols = f.sweep(2);
  std::vector<bool> positive;
  double last_norm = 0;
  for (const auto &sol : sols) {
    const DiscreteStationary ds = discrete_stationary(sol);
    const ScalarCriterion c = scalar_criterion(sol, ds, first_eigenpair_Lp(sol, ds));
    positive.push_back(c.integral > 0);
    last_norm = c.normalized;
  }
  double p_star = NAN;
  for (std::size_t k = sols.size(); k-- > 0 && positive[k];) {
    p_star = sols[k].p;
  }
  const double rel = std::abs(last_norm - target) / target;
  v.require(!std::isnan(p_star), "criterion not positive at the largest p");
  v.require(rel < 0.1, "normalized gap " + g(rel));
  v.detail << "p* = " << g(p_star) << "; normalized " << last_norm << " vs target " << target
           << " (rel. " << g(rel) << ")";
}

void dynamics(Fixture &, Verdict &v) {
  const StationarySolution sol = build_stationary(100, 2);
  const HeatProblem prob = prepare_heat(sol);

  const HeatTrajectory still = evolve(prob, 1.0, 1.0);
  const double dev = still.max_stationary_deviation / sol.u_max;
  v.require(dev < 1e-3, "lambda=1 deviation " + g(dev));

  const HeatTrajectory small = evolve(prob, 0.05, 50);
  v.require(small.classification.outcome == Outcome::Global &&
                small.stop == StopReason::Decay,
            "lambda=0.05 " + to_string(small.classification.outcome));

  const HeatTrajectory big = evolve(prob, 5.0, 50);
  v.require(big.classification.outcome == Outcome::BlowUp,
            "lambda=5 " + to_string(big.classification.outcome));

  const std::vector<double> grid{0.9, 0.95, 0.99, 1.01, 1.05, 1.1};
  const auto t0 = std::chrono::steady_clock::now();
  const WindowReport base = lambda_sweep(sol, grid, 50);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(seconds < 300, "sweep took " + g(seconds) + " s");

  HeatOptions doubled;
  doubled.refine = 2;
  const WindowReport fine = lambda_sweep(sol, grid, 50, doubled);
  int changed = 0;
  for (std::size_t i = 0; i < base.entries.size() && i < fine.entries.size(); ++i) {
    changed += base.entries[i].outcome != fine.entries[i].outcome;
  }
  v.require(changed == 0 && base.entries.size() == fine.entries.size(),
            std::to_string(changed) + " classifications change under grid doubling");

  for (const auto &e : base.entries) {
    if (std::abs(e.lambda - 0.95) < 1e-12 || std::abs(e.lambda - 1.05) < 1e-12) {
      v.require(e.outcome == Outcome::BlowUp,
                "lambda=" + g(e.lambda) + " " + to_string(e.outcome));
    }
  }
  v.detail << "lambda=1 deviation " << g(dev) << "; 0.05 " << to_string(small.classification.outcome)
           << "; 5 " << to_string(big.classification.outcome) << "; sweep";
  for (const auto &e : base.entries) {
    v.detail << " " << g(e.lambda) << ":" << to_string(e.outcome);
  }
  v.detail << "; sweep " << g(seconds) << " s";
}

struct Criterion {
  int id;
  const char *name;
  std::function<void(Fixture &, Verdict &)> run;
};

} // namespace

int main(int argc, char **argv) {
  const std::vector<Criterion> all{
      {1, "stationary correctness", stationary_correctness},
      {2, "bubble mass", bubble_mass_check},
      {3, "rescaled profile convergence", profile_convergence},
      {4, "spectral signs", spectral_signs},
      {5, "pure-Laplacian eigenvalue", pure_laplacian},
      {6, "rescaled eigenpair convergence", eigen_convergence},
      {7, "exact identities", exact_identities},
      {8, "condition trends", condition_trends},
      {9, "scalar criterion sign and limit", criterion_sign},
      {10, "heat flow dynamics", dynamics},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    selected.insert(std::atoi(argv[i]));
  }
  Fixture fixture;
  bool ok = true;
  for (const auto &c : all) {
    if (!selected.empty() && !selected.count(c.id)) {
      continue;
    }
    Verdict v;
    try {
      c.run(fixture, v);
    } catch (const std::exception &e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    ok = ok && v.pass;
    std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
