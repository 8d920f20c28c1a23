#ifndef NODAL_LANE_EMDEN_HPP
#define NODAL_LANE_EMDEN_HPP

#include "nodal/common.hpp"
#include "nodal/dopri5.hpp"
#include "nodal/radial_grid.hpp"

#include <utility>
#include <vector>

namespace nodal {

struct ShootOptions {
  double tol = 1e-12;
  /// Series expansion is used for rho below this radius.
  double rho_series = 1e-4;
  /// Integration aborts once log(rho) exceeds this value.
  double log_rho_max = 700.0;
};

/// Normalized shooting profile w(rho), w(0) = 1, w'(0) = 0, of
///   w'' + w'/rho + |w|^{p-1} w = 0,
/// integrated in t = log(rho) where it reads w_tt = -e^{2t} |w|^{p-1} w.
class RawShot {
public:
  using Integrator = DormandPrince<double, 2>;
  using State = Integrator::State;

  double p = 0;
  ShootOptions options;
  /// Accepted steps; samples are the step endpoints.
  std::vector<Integrator::Step> steps;
  /// log(rho_i) of the sign changes of w, increasing.
  std::vector<double> log_zeros;
  /// (log rho, w) at interior critical points of w, increasing in rho.
  std::vector<std::pair<double, double>> extrema;

  double log_rho_begin() const { return steps.front().t0; }
  double log_rho_end() const { return steps.back().t1(); }
  std::vector<double> zeros() const;

  /// (w, w_t) at t = log(rho); exact RK step from the enclosing accepted
  /// step start, series below rho_series.
  State evaluate(double t) const;
  /// w'(rho) at the requested zero index.
  double slope_at_zero(std::size_t i) const;

  // integrand pieces shared with the stationary solution
  static double forcing(double p, double t, double w);
};

/// Sampled radial solution u_{p,K} of -Delta u = |u|^{p-1} u on the unit
/// disk, u = 0 on the boundary, u(0) > 0 the global maximum.
struct StationarySolution {
  struct Extremum {
    double r;
    double u;
  };

  double p = 0;
  int K = 0;
  double tol = 0;
  RadialGrid grid;
  Eigen::VectorXd u;
  /// u'(r) at the nodes.
  Eigen::VectorXd du;
  std::vector<double> nodal_radii;
  /// interior critical points of u (r > 0), increasing in r
  std::vector<Extremum> extrema;
  double u_max = 0;
  double u_min = 0;
  double r_min = 0;
  double log_mu_plus = 0;
  double log_mu_minus = 0;

  double mu_plus() const { return std::exp(log_mu_plus); }
  double mu_minus() const { return std::exp(log_mu_minus); }
  /// r u'(r) = du/ds at node i.
  double u_s(Eigen::Index i) const { return grid.r(i) * du(i); }
  /// Cubic Hermite interpolation in log-radius.
  double value_at(double r) const;
  /// Sign changes of u over the stored nodes (excluding the boundary node).
  int interior_sign_changes() const;
};

RawShot shoot_ivp(double p, int zeros_wanted, const ShootOptions &options = {});

struct BuildOptions {
  ShootOptions shoot;
  Eigen::Index nodes = 4000;
  /// origin node placed this many e-folds below log(mu_plus)
  double inner_margin = 10.0;
};

StationarySolution build_stationary(double p, int K,
                                    const BuildOptions &options = {});

/// Builds the stationary solution on the given log-radius nodes (last node 0).
StationarySolution build_stationary_on(const RawShot &shot, int K,
                                       const Eigen::VectorXd &log_r);

/// Node layout used by build_stationary: equidistribution of
/// 1 + beta sqrt(r^2 p |u|^{p-1}) so that both bubbles are resolved.
Eigen::VectorXd stationary_nodes(const RawShot &shot, int K,
                                 Eigen::Index nodes, double inner_margin);

struct Energies {
  double gradient;  // p int |grad u|^2
  double potential; // p int |u|^{p+1}
};

Energies energy_functionals(const StationarySolution &sol);

/// Largest defect between consecutive stored samples and the ODE flow,
/// expressed as a second-derivative residual scaled by u(0).
double ode_residual(const StationarySolution &sol);

} // namespace nodal

#endif // NODAL_LANE_EMDEN_HPP
