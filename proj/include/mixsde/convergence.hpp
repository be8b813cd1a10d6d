#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixsde/euler.hpp"
#include "mixsde/fbm.hpp"
#include "mixsde/model.hpp"

namespace mixsde {

struct PathwiseError {
  /// max over fine nodes of |X^{delta,N} - X^{mu,N}|
  double sup = 0.0;
  /// ||X^{delta,N} - X^{mu,N}||_{2,alpha,[0,T]}
  double norm2 = 0.0;
  /// ||X^{delta,N} - X^{mu,N}||_{inf,alpha,[0,T]}
  double norm_inf = 0.0;
};

/// Distances between a coarse and a fine stopped solution, both evaluated
/// on the fine solver grid (the coarse one by continuous interpolation).
/// Throws CouplingError unless both come from the same noise realization,
/// share tau, and the fine grid refines the coarse one.
PathwiseError pathwise_error(const StoppedSolution& coarse, const StoppedSolution& fine,
                             double alpha);

/// A Monte Carlo strong-error experiment on nested dyadic grids.
struct ConvergenceSetup {
  double hurst = 0.7;
  double horizon = 1.0;
  double x0 = 1.0;
  /// Coarse step counts; each must divide fine_steps with a power-of-two ratio.
  std::vector<std::size_t> levels{16, 32, 64, 128, 256};
  std::size_t fine_steps = 4096;
  std::size_t paths = 10000;
  std::uint64_t seed = 0;
  SolverConfig config;
  Dependence dependence;
  FbmMethod method = FbmMethod::circulant;
  FunctionalKind functional = FunctionalKind::sum;
  /// Nodes of the grid tau_N is monitored on (must divide fine_steps).
  std::size_t monitor_nodes = 256;
  unsigned workers = 0;

  /// Throws DomainError on an inconsistent setup.
  void validate() const;
};

struct LevelStats {
  std::size_t steps = 0;
  double delta = 0.0;
  /// Means over retained paths of the squared errors, with MC standard errors.
  double err2_norm2 = 0.0;
  double err2_sup = 0.0;
  double se_norm2 = 0.0;
  double se_sup = 0.0;
  std::size_t retained = 0;
  /// Paths outside B^R (||X^delta||_{inf,alpha} + ||X^mu||_{inf,alpha} > R).
  std::size_t discarded = 0;
  /// Paths whose coarse or fine solve blew up.
  std::size_t aborted = 0;
  /// Mean and SE of ||X^{delta,N}||^2_{inf,alpha} over non-aborted paths.
  double moment_inf_alpha = 0.0;
  double moment_se = 0.0;
  /// max over paths of norm2 / (C_{alpha,0,T} norm_inf) for the error; <= 1.
  double max_comparison_ratio = 0.0;
  /// max over paths and off-node fine points s <= tau of
  /// |X_s - X_{t_s}| / (K^eta_s (s - t_s)^{1/2 - eta} (1 + |X_{t_s}|)).
  double max_increment_ratio = 0.0;
  /// True when every path was discarded or aborted.
  bool flagged = false;
};

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::size_t used = 0;
};

struct ErrorReport {
  ConvergenceSetup setup;
  std::string coefficients;
  double kappa = 0.5;
  std::vector<LevelStats> levels;
  double fine_delta = 0.0;
  /// Fraction of paths with tau_N < T, and mean tau_N.
  double stopped_fraction = 0.0;
  double mean_tau = 0.0;
  /// Fraction of non-aborted paths inside B^R, averaged over levels.
  double restricted_fraction = 0.0;
  std::size_t aborted_fine = 0;
  /// Squared errors at or below this are rounding noise: 1e-24 max(1, E sup|X^mu|^2).
  /// Such levels count as zero-error levels in the fit.
  double rounding_floor = 0.0;
  /// Fits of log err^2 on log delta, empty when degenerate.
  bool degenerate = false;
  std::string note;
  RateFit fit_norm2;
  RateFit fit_sup;

  /// kappa - alpha - epsilon
  double rate_floor() const noexcept;
  /// slope / 2 >= rate_floor for both functionals (false when degenerate).
  bool rate_ok() const noexcept;
  /// max/min over levels of moment_inf_alpha.
  double moment_ratio() const noexcept;
};

/// Runs the experiment: one noise pair per path on the fine grid, tau_N from
/// the GRR functionals on the monitor grid, the fine and every coarse Euler
/// solution on that noise, errors restricted to B^R.  Per-path results are
/// reduced in path order, so the report depends only on the setup.
ErrorReport mc_strong_error(const CoefficientSet& coeffs, const ConvergenceSetup& setup);

/// Least squares of log(err2) on log(delta) over the levels with err2 > 0.
/// Throws DomainError when fewer than 3 remain.
RateFit fit_rate(const std::vector<double>& delta, const std::vector<double>& err2);

enum class ErrorFunctional { norm2, sup };
RateFit fit_rate(const ErrorReport& report, ErrorFunctional which = ErrorFunctional::norm2);

}  // namespace mixsde
