#ifndef NODAL_HEAT_FLOW_HPP
#define NODAL_HEAT_FLOW_HPP

#include "nodal/common.hpp"
#include "nodal/lane_emden.hpp"
#include "nodal/spectrum.hpp"

#include <string>
#include <vector>

namespace nodal {

struct HeatOptions {
  /// each stationary cell is split into `refine` cells
  int refine = 1;
  /// nodes per unit log-radius in the region below the stationary grid
  double deep_density = 8.0;
  /// extra e-folds below the deepest scale the threshold can reach
  double depth_margin = 10.0;
  /// local error tolerance, relative to the current sup-norm
  double rtol = 3e-3;
  /// first step, scaled time units (bubble time scale = 1)
  double dt_initial = 1e-6;
  double M_big = 1e8;
  double delta = 1e-6;
  /// blow-up needs the last accepted dt below dt_min_rel * t
  double dt_min_rel = 1e-3;
  /// sup |v - u| / sup |u| below this at the horizon counts as stationary
  double stationary_tol = 1e-3;
  int fit_samples = 30;
  long max_steps = 400000;
};

/// Throws InvalidArgument naming the offending field.
void validate(const HeatOptions &options);

enum class Outcome { Global, BlowUp, Undecided };
std::string to_string(Outcome outcome);

enum class StopReason { Horizon, Threshold, Decay, StepUnderflow, StepLimit };
std::string to_string(StopReason reason);

struct HeatClassification {
  Outcome outcome = Outcome::Undecided;
  /// blow-up time in scaled and physical units; NaN unless BlowUp
  Wide T_scaled = 0;
  double T_est = 0;
  std::string note;
};

/// Time series of one run. Times are kept in the bubble's scaled clock
/// t_scaled = t / (mu_p^+)^2; physical t = exp(log_time_scale) * t_scaled.
struct HeatTrajectory {
  double p = 0;
  int K = 0;
  double lambda = 0;
  double log_time_scale = 0;
  Wide horizon_scaled = 0;
  HeatOptions options;

  std::vector<Wide> t_scaled;
  /// step that produced each sample (0 for the first)
  std::vector<Wide> dt_scaled;
  std::vector<double> sup_norm;
  /// long double: at p ~ 100 the energy leaves double range near blow-up
  std::vector<Wide> energy;
  /// log-radius (physical) where |v| peaks, and the sign of v there
  std::vector<double> peak_log_r;
  std::vector<int> peak_sign;
  /// last state: physical log-radius (origin node first, -inf) and v
  std::vector<double> final_log_r;
  std::vector<double> final_v;

  StopReason stop = StopReason::StepLimit;
  /// max over samples of sup |v - u| (physical units)
  double max_stationary_deviation = 0;
  /// sup |v - u| / sup |u| at the last sample
  double final_stationary_residual = 0;
  double stationarity_residual = 0;
  long accepted = 0;
  long rejected = 0;
  long solve_failures = 0;
  std::size_t nodes = 0;
  HeatClassification classification;

  double t(std::size_t j) const;
};

/// Grid, weights and discrete stationary state for the parabolic solve.
struct HeatProblem {
  double p = 0;
  int K = 0;
  double u0 = 0;
  double log_mu = 0;
  HeatOptions options;
  DiscreteStationary state;
};

HeatProblem prepare_heat(const StationarySolution &sol,
                         const HeatOptions &options = {});

HeatTrajectory evolve(const HeatProblem &problem, double lambda, double horizon);
HeatTrajectory evolve(const StationarySolution &sol, double lambda,
                      double horizon, const HeatOptions &options = {});

HeatClassification classify(const HeatTrajectory &traj);

/// Least-squares fit of sup ~ c (T - t)^{-1/(p-1)} over the last `samples`
/// points with the exponent fixed; returns T in scaled time, NaN if the fit
/// has no positive remaining time.
Wide fit_blowup_time(const HeatTrajectory &traj, int samples);

struct SweepEntry {
  double lambda = 0;
  Outcome outcome = Outcome::Undecided;
  double T_est = 0;
  Wide T_scaled = 0;
  bool refined = false;
};

struct WindowReport {
  double p = 0;
  int K = 0;
  double horizon = 0;
  /// grid entries then bisection entries, sorted by lambda
  std::vector<SweepEntry> entries;
  /// contiguous BlowUp run around 1 on the grid; NaN if empty on a side
  double window_low = 0;
  double window_high = 0;
  /// bracket [a, b] of the Global/BlowUp boundary below / above 1; NaN if none
  double lower_edge_a = 0, lower_edge_b = 0;
  double upper_edge_a = 0, upper_edge_b = 0;
  /// largest lambda < 1 classified Global; NaN if none
  double small_lambda_global = 0;
  /// pairs (lambda, lambda') >= 1 where T_est(lambda') > 1.05 T_est(lambda)
  std::vector<std::pair<double, double>> monotonicity_flags;
};

WindowReport lambda_sweep(const StationarySolution &sol,
                          const std::vector<double> &lambda_grid,
                          double horizon, const HeatOptions &options = {},
                          int bisect_steps = 4, int jobs = 1);

} // namespace nodal

#endif // NODAL_HEAT_FLOW_HPP
