#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "mixsde/fbm.hpp"
#include "mixsde/grid.hpp"
#include "mixsde/model.hpp"

namespace mixsde {

/// Euler approximation X^delta on a solver grid, driven by a noise pair that
/// lives on the same grid or on a dyadic refinement of it.
///
/// Besides node values it keeps the frozen coefficients a, b, c at every
/// left node, which is all the continuous interpolation
///   X_u = X_k + a_k (u - v_k) + b_k (W_u - W_k) + c_k (B_u - B_k)
/// needs between nodes.
struct EulerSolution {
  TimeGrid grid{1.0, 1};
  Eigen::VectorXd values;
  /// Coefficients at (v_k, X_k) for k < steps.
  Eigen::VectorXd a, b, c;
  std::shared_ptr<const NoisePair> noise;
  /// Noise cells per solver cell.
  std::size_t stride = 1;
  double x0 = 0.0;
  std::shared_ptr<const CoefficientSet> coeffs;
};

/// Largest |X| tolerated before a path is aborted.
inline constexpr double kStateLimit = 1e12;

/// Runs the recursion on `grid` (default: the noise grid).  The noise grid
/// must refine `grid`.  A non-finite state or |X| > kStateLimit throws
/// NumericalError carrying the index of the offending node.
EulerSolution euler_solve(std::shared_ptr<const CoefficientSet> coeffs,
                          std::shared_ptr<const NoisePair> noise, double x0);
EulerSolution euler_solve(std::shared_ptr<const CoefficientSet> coeffs,
                          std::shared_ptr<const NoisePair> noise, double x0,
                          const TimeGrid& grid);

/// Node values only, for callers that manage their own buffers: X at the
/// nodes of the grid obtained by taking every `stride`-th noise node.
/// Throws like euler_solve.
void euler_values(const CoefficientSet& coeffs, const TimeGrid& noise_grid,
                  const Eigen::VectorXd& w, const Eigen::VectorXd& bh, std::size_t stride,
                  double x0, Eigen::VectorXd& out);

/// X^delta_u by continuous interpolation.  u must be a node of the noise
/// grid; anything else throws DomainError (noise is never invented between
/// its samples).
double interpolate(const EulerSolution& sol, double u);

/// X^delta at every node of the noise grid.
Eigen::VectorXd interpolate_on_noise_grid(const EulerSolution& sol);

/// The same for bare arrays: coarse node values on every `stride`-th noise
/// node, continued through each cell with frozen coefficients.
void interpolate_on_noise_grid(const CoefficientSet& coeffs, const TimeGrid& noise_grid,
                               const Eigen::VectorXd& w, const Eigen::VectorXd& bh,
                               std::size_t stride, const Eigen::VectorXd& coarse,
                               Eigen::VectorXd& out);

enum class FunctionalKind { wiener, fbm, sum };

FunctionalKind parse_functional_kind(const std::string& name);

/// tau_N = inf{t : K^eta_t >= N} ^ T on the nodes of the monitor grid.
///
/// The functionals are evaluated cumulatively (they are nondecreasing in t)
/// on every `monitor_stride`-th noise node; the result is a noise node.
struct StoppingTime {
  double tau = 0.0;
  /// Index of tau on the noise grid.
  std::size_t index = 0;
  /// True if the threshold was reached (tau may still equal T).
  bool hit = false;
};

/// K^eta at every monitor node (every `monitor_stride`-th noise node).
Eigen::VectorXd functional_series(const NoisePair& noise, double eta, FunctionalKind kind,
                                  std::size_t monitor_stride = 1);

StoppingTime stopping_time(const NoisePair& noise, double eta, double threshold,
                           FunctionalKind kind, std::size_t monitor_stride = 1);

/// X^{delta,N}_t = X^delta_{t ^ tau}.
struct StoppedSolution {
  EulerSolution base;
  double tau = 0.0;
  /// Index of tau on the noise grid.
  std::size_t tau_index = 0;
  /// X^delta_tau (continuous interpolation when tau is off the solver grid).
  double frozen = 0.0;
  /// Stopped values at the solver nodes.
  Eigen::VectorXd values;

  /// Stopped path at every noise node.
  Eigen::VectorXd on_noise_grid() const;
};

/// tau must be a noise node in [0, T].
StoppedSolution stop(const EulerSolution& sol, double tau);

/// Parameters of a localized Euler experiment.
struct SolverConfig {
  double alpha = 0.35;
  double eta = 0.1;
  double threshold = 5.0;
  double epsilon = 0.05;
  double radius = 1e3;

  /// Throws DomainError unless 1 - H < alpha < kappa, 0 < eta < kappa - alpha,
  /// 0 < epsilon < kappa - alpha and threshold, radius > 0.
  void validate(double hurst, double beta) const;
};

}  // namespace mixsde
