#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/grid.hpp"
#include "mixsde/rng.hpp"

namespace mixsde {

/// Hurst index in (1/2, 1).  The value 1/2 is admitted only through
/// oracle(), which exists to cross-check generators against Brownian motion.
class HurstIndex {
 public:
  explicit HurstIndex(double value);
  static HurstIndex oracle(double value);

  double value() const noexcept { return value_; }

 private:
  struct Unchecked {};
  HurstIndex(double value, Unchecked) : value_(value) {}
  double value_;
};

/// E[B^H_s B^H_t] = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double s, double t, double hurst);

enum class FbmMethod { cholesky, circulant };
enum class ProcessKind { wiener, fbm };

FbmMethod parse_fbm_method(const std::string& name);
std::string to_string(FbmMethod method);

struct NoisePath {
  TimeGrid grid;
  Eigen::VectorXd values;
  ProcessKind kind = ProcessKind::fbm;
  /// Hurst index of the path; 1/2 for Wiener paths.
  double hurst = 0.5;
};

enum class DependenceMode { independent, volterra, joint_gaussian };

DependenceMode parse_dependence(const std::string& name);
std::string to_string(DependenceMode mode);

/// Dependence between W and B^H.
///
/// independent: disjoint RNG streams.
/// volterra: B^H is the Molchan-Golosov transform of the same Wiener path,
///   discretized at cell midpoints.
/// joint_gaussian: Cholesky factor of the joint covariance of the node
///   values, with E[W_s B^H_t] = cross(s, t).  When `cross` is empty the
///   family rho (s^{H+1/2} + t^{H+1/2} - |t - s|^{H+1/2}) / 2 is used; at
///   H = 1/2 it is the covariance of two Brownian motions with correlation rho.
struct Dependence {
  DependenceMode mode = DependenceMode::independent;
  double rho = 0.0;
  std::function<double(double, double)> cross;
};

/// Identifies the realization a NoisePair was drawn from.
struct NoiseProvenance {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  double hurst = 0.0;
  double horizon = 0.0;
  std::size_t steps = 0;
  FbmMethod method = FbmMethod::circulant;
  DependenceMode mode = DependenceMode::independent;
  double rho = 0.0;

  bool operator==(const NoiseProvenance&) const = default;
};

struct NoisePair {
  NoisePath w;
  NoisePath bh;
  NoiseProvenance provenance;

  const TimeGrid& grid() const noexcept { return w.grid; }
};

/// Exact sampler of fBm node values on a fixed grid.  The factorization is
/// computed once; sample() is const and safe to call concurrently.
class FbmGenerator {
 public:
  FbmGenerator(const TimeGrid& grid, HurstIndex hurst, FbmMethod method);

  const TimeGrid& grid() const noexcept { return grid_; }
  double hurst() const noexcept { return hurst_; }
  FbmMethod method() const noexcept { return method_; }

  /// Node values (values[0] = 0) from the normals of `normals`.
  Eigen::VectorXd sample(const NormalStream& normals) const;

  /// Smallest eigenvalue of the circulant embedding (circulant method only).
  double min_circulant_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  TimeGrid grid_;
  double hurst_;
  FbmMethod method_;
  Eigen::MatrixXd cholesky_;        // lower factor, node covariance
  Eigen::VectorXd sqrt_spectrum_;   // sqrt(lambda_k / 2n), increment circulant
  double min_eigenvalue_ = 0.0;
};

/// Brownian node values from the normals of `normals`.
Eigen::VectorXd sample_wiener(const TimeGrid& grid, const NormalStream& normals);

/// Discretized Molchan-Golosov kernel K_H(t_i, (j + 1/2) delta), j < i.
class VolterraKernel {
 public:
  VolterraKernel(const TimeGrid& grid, double hurst);

  static double kernel(double t, double s, double hurst);

  /// B_{t_i} = sum_{j < i} K(t_i, s_j) dW_j
  Eigen::VectorXd apply(const Eigen::VectorXd& wiener_values) const;

  /// Covariance of the discretized process at nodes i and k.
  double covariance(std::size_t i, std::size_t k) const;

 private:
  std::size_t steps_;
  double step_;
  std::vector<Eigen::VectorXd> rows_;  // rows_[i - 1] has i entries
};

/// Sampler of (W, B^H) pairs under a dependence spec; precomputes once.
class NoiseGenerator {
 public:
  static constexpr std::size_t kMaxJointSteps = 2048;

  NoiseGenerator(const TimeGrid& grid, HurstIndex hurst, Dependence dependence,
                 FbmMethod method = FbmMethod::circulant);

  const TimeGrid& grid() const noexcept { return grid_; }
  double hurst() const noexcept { return hurst_; }

  NoisePair sample(std::uint64_t seed, std::uint64_t path = 0) const;

 private:
  TimeGrid grid_;
  double hurst_;
  Dependence dependence_;
  FbmMethod method_;
  std::shared_ptr<const FbmGenerator> fbm_;
  std::shared_ptr<const VolterraKernel> volterra_;
  Eigen::MatrixXd joint_factor_;
};

NoisePath generate_fbm(const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed,
                       FbmMethod method = FbmMethod::circulant);
NoisePath generate_wiener(const TimeGrid& grid, std::uint64_t seed);
NoisePair generate_noise_pair(const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed,
                              const Dependence& dependence,
                              FbmMethod method = FbmMethod::circulant, std::uint64_t path = 0);

/// Garsia-Rodemich-Rumsey functional
///   ( int_0^t int_0^t |X_x - X_y|^{2/eta} / |x - y|^{2H/eta} dx dy )^{eta/2}
/// with H = 1/2 for Wiener paths and the GRR constant taken as 1.
struct HolderFunctional {
  double eta = 0.0;
  double value = 0.0;
  ProcessKind kind = ProcessKind::fbm;
  double horizon = 0.0;
};

HolderFunctional holder_functional(const NoisePath& path, double eta, double horizon);

/// The functional on [0, t_k] for every node k of a uniformly sampled path
/// (trapezoidal double sum, diagonal excluded).  Nondecreasing in k.
Eigen::VectorXd holder_functional_series(const Eigen::VectorXd& values, double spacing,
                                         double eta, double hurst);

/// Largest admissible eta for a path: 1/2 for Wiener, H for fBm.
double max_holder_eta(const NoisePath& path) noexcept;

}  // namespace mixsde
