#ifndef NODAL_SPECTRUM_HPP
#define NODAL_SPECTRUM_HPP

#include "nodal/common.hpp"
#include "nodal/lane_emden.hpp"
#include "nodal/radial_grid.hpp"
#include "nodal/tridiagonal.hpp"

#include <vector>

namespace nodal {

/// Finite-volume discretization of -Delta - V on a disk, radial functions,
/// Dirichlet on the outer node. Unknowns are nodes 0..n-2.
///
/// Generalized symmetric pencil  H x = lambda M x  with
///   H = A - diag(w_i V_i),  M = diag(m_i),
/// A the 1D stiffness in log-radius. The potential is passed as log(V_i)
/// so that w_i V_i can be formed without overflow.
class RadialSchrodinger {
public:
  /// log_weights, when given, replace the grid masses in the potential term
  /// (exponentially fitted lumping).
  RadialSchrodinger(RadialGrid grid, VectorXw log_potential,
                    VectorXw log_weights = {});

  const RadialGrid &grid() const { return grid_; }
  Eigen::Index unknowns() const { return grid_.size() - 1; }
  const SymTridiagonal<Wide> &hamiltonian() const { return h_; }
  const VectorXw &mass() const { return m_; }
  /// max_i V_i
  Wide max_potential() const { return max_potential_; }

  VectorXw apply(const VectorXw &x) const;
  /// x^T H x / x^T M x (x over the unknowns).
  Wide rayleigh(const VectorXw &x) const;
  /// ||H x - lambda M x||_{M^-1} / (max(|lambda|,1) ||x||_M).
  Wide relative_residual(const VectorXw &x, Wide lambda) const;

private:
  RadialGrid grid_;
  SymTridiagonal<Wide> h_;
  VectorXw m_;
  VectorXw c_;
  VectorXw mv_;
  Wide max_potential_ = 0;
};

struct InverseIterationOptions {
  Wide tol = 1e-12L;
  /// accepted once the eigenvalue has stopped moving
  Wide floor_tol = 1e-8L;
  int max_iterations = 20000;
};

/// Ground state of a radial Schrodinger pencil, phi on all grid nodes
/// (boundary value 0), normalized in L^2(2 pi r dr), phi(0) > 0.
struct EigenPair {
  Wide lambda = 0;
  RadialGrid grid;
  VectorXw phi;
  Wide residual = 0;
  int iterations = 0;

  Wide l2_norm() const;
};

/// Shifted inverse iteration. The shift sits below -max V, a lower bound
/// for the spectrum since the stiffness part is nonnegative.
EigenPair ground_state(const RadialSchrodinger &op,
                       const InverseIterationOptions &options = {});

/// Cap on the log-slope used for fitted load weights.
inline constexpr double kMaxSlope = 200.0;

/// Discrete stationary state in scaled, normalized variables: on the grid
/// in r / mu_p^+, u holds u_h / u(0) and solves
///   A u = diag(w) |u|^{p-1} u / p
/// with w the exponentially fitted load weights (log stored).
struct DiscreteStationary {
  double p = 0;
  RadialGrid grid;
  VectorXw u;
  VectorXw log_weight;
  Wide residual = 0;
};

/// Newton iteration started from the sampled ODE solution. Load weights
/// integrate the hat functions against f(u) of the interpolated solution,
/// so the discrete load is exact for it; nodes next to a sign change fall
/// back to the log-slope fit.
DiscreteStationary discrete_stationary(const StationarySolution &sol);
/// Same on another unscaled grid covering the disk (values below the
/// solution's grid come from the origin series).
DiscreteStationary discrete_stationary(const StationarySolution &sol,
                                       const RadialGrid &grid);

/// Log load weights of an unscaled grid for the nonlinearity of `sol`.
VectorXw load_log_weights(const StationarySolution &sol, const RadialGrid &grid);

/// Same solve on an arbitrary scaled grid; `initial` holds u / u(0) on every
/// node. Empty slopes give plain lumped masses.
DiscreteStationary discrete_stationary_on(const RadialGrid &scaled, double p,
                                          VectorXw initial,
                                          const VectorXw &slopes = {});

/// L_p in scaled variables: -Delta - |u_h|^{p-1} with the state's weights.
RadialSchrodinger linearization(const DiscreteStationary &ds);

/// First eigenpair of L_p = -Delta - p|u|^{p-1} on the unit disk, linearized
/// at the discrete stationary state. lambda and phi are in the original
/// (unscaled) variables.
EigenPair first_eigenpair_Lp(const StationarySolution &sol,
                             const InverseIterationOptions &options = {});
EigenPair first_eigenpair_Lp(const StationarySolution &sol,
                             const DiscreteStationary &ds,
                             const InverseIterationOptions &options = {});

/// Ground state of -Delta - e^U on the disk of radius r_trunc, Dirichlet.
EigenPair limit_first_eigenpair(double r_trunc, Eigen::Index nodes,
                                const InverseIterationOptions &options = {});

/// Same solve on explicit log-radius nodes; the last node carries the
/// Dirichlet condition. A prefix of a larger layout gives a nested
/// subspace, so its eigenvalue can only be higher.
EigenPair limit_first_eigenpair_on(Eigen::VectorXd log_r,
                                   const InverseIterationOptions &options = {});

/// Node layout used for the limit problem: logarithmic near the origin,
/// close to uniform in r far out.
Eigen::VectorXd limit_nodes(double r_trunc, Eigen::Index nodes);

/// Zero-potential disk (radius 1) ground state; lambda should be j_{0,1}^2.
EigenPair dirichlet_disk_ground_state(Eigen::Index nodes);

struct RescaledEigenPair {
  double lambda_tilde = 0;
  double log_mu = 0;
  /// grid in scaled radius s = r / mu_p^+
  RadialGrid grid;
  Eigen::VectorXd phi_tilde;
  /// V_p = |u(mu s)/u(0)|^{p-1}
  Eigen::VectorXd potential;
  double l2_norm = 0;
};

RescaledEigenPair rescaled_eigen(const StationarySolution &sol,
                                 const EigenPair &pair);

/// Evaluates phi_1^* at scaled radii by linear interpolation in log-radius;
/// zero outside the truncation radius.
Eigen::VectorXd sample_limit_eigenfunction(const EigenPair &limit,
                                           const RadialGrid &target);

struct EigenConvergenceRow {
  double p;
  double lambda_tilde;
  double lambda_error;
  double phi_l2_error;
  double gap_integral;
};

struct EigenConvergenceReport {
  int K = 0;
  double lambda_star = 0;
  std::vector<EigenConvergenceRow> rows;
  bool lambda_error_decreasing = false;
  bool phi_error_decreasing = false;
};

EigenConvergenceRow eigen_convergence_row(const StationarySolution &sol,
                                          const EigenPair &pair,
                                          const EigenPair &limit);

EigenConvergenceReport
eigen_convergence_report(const std::vector<double> &p_sweep, int K,
                         const EigenPair &limit,
                         const BuildOptions &build = {}, int jobs = 1);
/// Same on prebuilt solutions sharing K, sorted by p.
EigenConvergenceReport
eigen_convergence_report(const std::vector<StationarySolution> &sols,
                         const EigenPair &limit, int jobs = 1);

} // namespace nodal

#endif // NODAL_SPECTRUM_HPP
