#ifndef NODAL_CRITERIA_HPP
#define NODAL_CRITERIA_HPP

#include "nodal/common.hpp"
#include "nodal/lane_emden.hpp"
#include "nodal/spectrum.hpp"

#include <vector>

namespace nodal {

/// sup of |u(r)/u(0)|^{p-1} over r > R mu_p^+. Candidates are the grid
/// nodes in the region, the interior extrema and the point r = R mu_p^+.
double compute_S(const StationarySolution &sol, double R);
/// Same sup restricted to {u > 0}.
double compute_M(const StationarySolution &sol, double R);
/// Same sup restricted to the first nodal annulus R mu_p^+ < r < r_{p,1}.
double compute_Mprime(const StationarySolution &sol, double R);

/// |u_min|^{p-1} / u(0)^{p-1}
double min_max_ratio(const StationarySolution &sol);
/// sup_{r > r_{p,1}} |u| / u(0); 0 for K = 1.
double outer_sup(const StationarySolution &sol);

/// sup_r r^2 p |u(r)|^{p-1}, local maxima refined on the interpolant.
double check_P31(const StationarySolution &sol);

struct ScalarCriterion {
  /// int u phi
  Wide integral = 0;
  /// (u(0)^p mu_p^+)^{-1} int |u|^{p-1} u phi
  double normalized = 0;
  /// |I1 - (p-1)/(-lambda) int |u|^{p-1} u phi| / |I1|
  double identity_residual = 0;
};

/// Evaluated on the discrete stationary state the eigenpair was built from.
ScalarCriterion scalar_criterion(const StationarySolution &sol,
                                 const DiscreteStationary &ds,
                                 const EigenPair &pair);

/// 2 pi int e^U phi_1^* r dr on the limit grid.
double bubble_overlap(const EigenPair &limit);

struct ConditionReport {
  int K = 0;
  std::vector<double> p_sweep;
  std::vector<double> R_sweep;
  /// [p][R]; NaN where the region is empty
  std::vector<std::vector<double>> S_table;
  std::vector<std::vector<double>> M_table;
  std::vector<std::vector<double>> Mprime_table;
  std::vector<double> ratio;
  std::vector<double> mu_ratio;
  std::vector<double> outer_sup;
  std::vector<double> P31_sup;
  std::vector<double> energy_gradient;
  std::vector<double> energy_potential;
  std::vector<double> criterion;
  std::vector<double> normalized_criterion;
  std::vector<double> identity_residual;
  std::vector<double> lambda_tilde;
  double limit_target = 0;
  double energy_bound = 0;
  /// smallest sweep p from which the criterion stays positive; NaN if none
  double p_star = 0;

  bool energy_bounded = false;
  bool ratio_decreasing = false;
  bool mu_ratio_decreasing = false;
  bool S_decreasing_in_p = false;
  bool Mprime_decreasing_in_p = false;
  bool Mprime_decreasing_in_R = false;
  /// M' smaller at (p', R') than at (p, R) whenever p' >= p and R' > R
  bool Mprime_decreasing_jointly = false;
  /// |S(p_max, R) - e^{U(R)}| / e^{U(R)} per R: the inner limit of (B)
  std::vector<double> S_tail_gap;
  bool outer_sup_below_half = false;
  bool P31_bounded = false;
  bool criterion_positive = false;
  /// max over cells of S - max(M, ratio), and of S - P31/R^2
  double decomposition_defect = 0;
  double P31_chain_excess = 0;
};

/// Solutions must share K and be sorted by p.
ConditionReport condition_report(const std::vector<StationarySolution> &sols,
                                 const std::vector<double> &R_sweep,
                                 const EigenPair &limit, int jobs = 1);

ConditionReport condition_report(const std::vector<double> &p_sweep,
                                 const std::vector<double> &R_sweep, int K,
                                 const EigenPair &limit,
                                 const BuildOptions &build = {}, int jobs = 1);

} // namespace nodal

#endif // NODAL_CRITERIA_HPP
