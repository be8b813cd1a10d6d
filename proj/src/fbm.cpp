#include "mixsde/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <unsupported/Eigen/FFT>

#include "mixsde/errors.hpp"
#include "mixsde/quadrature.hpp"

namespace mixsde {
namespace {

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// Autocovariance of fBm increments over cells of width `step` at lag k.
double increment_autocovariance(std::size_t k, double step, double hurst) {
  const double two_h = 2.0 * hurst;
  const auto kk = static_cast<double>(k);
  const double lower = k == 0 ? 1.0 : std::pow(kk - 1.0, two_h);  // |k - 1|^{2H}
  const double value = std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) + lower;
  return 0.5 * std::pow(step, two_h) * value;
}

double smallest_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

HurstIndex::HurstIndex(double value) : value_(value) {
  if (!(value > 0.5 && value < 1.0)) {
    throw DomainError("Hurst index must lie in (1/2, 1), got " + std::to_string(value));
  }
}

HurstIndex HurstIndex::oracle(double value) {
  if (!(value >= 0.5 && value < 1.0)) {
    throw DomainError("oracle Hurst index must lie in [1/2, 1), got " + std::to_string(value));
  }
  return HurstIndex(value, Unchecked{});
}

double fbm_covariance(double s, double t, double hurst) {
  if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance: negative time");
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

FbmMethod parse_fbm_method(const std::string& name) {
  if (name == "cholesky") return FbmMethod::cholesky;
  if (name == "circulant" || name == "circulant-embedding") return FbmMethod::circulant;
  throw DomainError("unknown fBm method '" + name + "' (expected cholesky or circulant)");
}

std::string to_string(FbmMethod method) {
  return method == FbmMethod::cholesky ? "cholesky" : "circulant";
}

DependenceMode parse_dependence(const std::string& name) {
  if (name == "independent") return DependenceMode::independent;
  if (name == "volterra") return DependenceMode::volterra;
  if (name == "joint" || name == "joint-gaussian") return DependenceMode::joint_gaussian;
  throw DomainError("unknown dependence '" + name +
                    "' (expected independent, volterra or joint-gaussian)");
}

std::string to_string(DependenceMode mode) {
  switch (mode) {
    case DependenceMode::independent: return "independent";
    case DependenceMode::volterra: return "volterra";
    case DependenceMode::joint_gaussian: return "joint-gaussian";
  }
  return "independent";
}

// ---------------------------------------------------------------------------

FbmGenerator::FbmGenerator(const TimeGrid& grid, HurstIndex hurst, FbmMethod method)
    : grid_(grid), hurst_(hurst.value()), method_(method) {
  const std::size_t n = grid.steps();
  if (method == FbmMethod::cholesky) {
    if (n > 8192) throw ResourceError("FbmGenerator: Cholesky method limited to 8192 steps");
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        cov(i, j) = fbm_covariance(grid.node(static_cast<std::size_t>(i + 1)),
                                   grid.node(static_cast<std::size_t>(j + 1)), hurst_);
        cov(j, i) = cov(i, j);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      const double lambda = smallest_eigenvalue(cov);
      throw NotPositiveDefiniteError(
          "FbmGenerator: fBm covariance is not positive definite (smallest eigenvalue " +
              std::to_string(lambda) + ")",
          lambda);
    }
    cholesky_ = llt.matrixL();
    return;
  }

  // Circulant embedding of the (stationary) increment covariance.
  const std::size_t size = 2 * n;
  std::vector<std::complex<double>> row(size), spectrum;
  for (std::size_t k = 0; k <= n; ++k) row[k] = increment_autocovariance(k, grid.step(), hurst_);
  for (std::size_t k = n + 1; k < size; ++k) row[k] = row[size - k];
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, row);
  sqrt_spectrum_.resize(static_cast<Eigen::Index>(size));
  double max_eigenvalue = 0.0;
  min_eigenvalue_ = std::numeric_limits<double>::infinity();
  for (const auto& c : spectrum) {
    max_eigenvalue = std::max(max_eigenvalue, c.real());
    min_eigenvalue_ = std::min(min_eigenvalue_, c.real());
  }
  if (min_eigenvalue_ < -1e-10 * max_eigenvalue) {
    throw NumericalError("FbmGenerator: circulant embedding has a negative eigenvalue " +
                         std::to_string(min_eigenvalue_) +
                         "; the increment covariance is inconsistent");
  }
  for (std::size_t k = 0; k < size; ++k) {
    sqrt_spectrum_[static_cast<Eigen::Index>(k)] =
        std::sqrt(std::max(spectrum[k].real(), 0.0) / static_cast<double>(size));
  }
}

Eigen::VectorXd FbmGenerator::sample(const NormalStream& normals) const {
  const std::size_t n = grid_.steps();
  Eigen::VectorXd values(static_cast<Eigen::Index>(n + 1));
  values[0] = 0.0;
  if (method_ == FbmMethod::cholesky) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    normals.fill(z);
    values.tail(static_cast<Eigen::Index>(n)).noalias() = cholesky_.triangularView<Eigen::Lower>() * z;
    return values;
  }
  // Y = F diag(sqrt(lambda / 2n)) Z with complex Gaussian Z; Re(Y) has the
  // circulant covariance, so its first n entries are exact fBm increments.
  const auto size = static_cast<std::size_t>(sqrt_spectrum_.size());
  Eigen::VectorXd z(static_cast<Eigen::Index>(2 * size));
  normals.fill(z);
  std::vector<std::complex<double>> in(size), out;
  for (std::size_t k = 0; k < size; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    in[k] = sqrt_spectrum_[i] * std::complex<double>(z[i], z[i + static_cast<Eigen::Index>(size)]);
  }
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += out[k].real();
    values[static_cast<Eigen::Index>(k + 1)] = acc;
  }
  return values;
}

Eigen::VectorXd sample_wiener(const TimeGrid& grid, const NormalStream& normals) {
  const std::size_t n = grid.steps();
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  normals.fill(z);
  const double scale = std::sqrt(grid.step());
  Eigen::VectorXd values(static_cast<Eigen::Index>(n + 1));
  values[0] = 0.0;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
    acc += scale * z[k];
    values[k + 1] = acc;
  }
  return values;
}

// ---------------------------------------------------------------------------

namespace {

// phi(y) = e^{y (H - 1/2)} (e^y - 1)^{H - 1/2}; K(t, s) = c_H s^{H-1/2} G(log(t/s))
// with G(L) = phi(L) - (H - 1/2) int_0^L phi.
double mg_phi(double y, double d) { return std::exp(y * d) * std::pow(std::expm1(y), d); }

// int_0^L phi(y) dy through y = L w^{1/(H+1/2)}, which removes the y^{H-1/2}
// behaviour at the origin.
double mg_phi_integral_from_zero(double upper, double d, const GaussRule& rule) {
  if (d == 0.0) return upper;
  const double p = 1.0 / (d + 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double w = rule.nodes[i];
    const double y = upper * std::pow(w, p);
    // phi(y) dy = p L^{d+1} e^{y d} (expm1(y)/y)^d dw
    const double ratio = y > 0.0 ? std::expm1(y) / y : 1.0;
    sum += rule.weights[i] * std::exp(y * d) * std::pow(ratio, d);
  }
  return p * std::pow(upper, d + 1.0) * sum;
}

double mg_phi_integral(double lower, double upper, double d, const GaussRule& rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * mg_phi(lower + (upper - lower) * rule.nodes[i], d);
  }
  return (upper - lower) * sum;
}

double mg_constant(double hurst) {
  return std::sqrt(2.0 * hurst * std::tgamma(1.5 - hurst) /
                   (std::tgamma(hurst + 0.5) * std::tgamma(2.0 - 2.0 * hurst)));
}

}  // namespace

double VolterraKernel::kernel(double t, double s, double hurst) {
  if (!(s > 0.0) || !(t > s)) return 0.0;
  static const GaussRule singular_rule = gauss_legendre(32);
  const double d = hurst - 0.5;
  const double upper = std::log(t / s);
  const double g = mg_phi(upper, d) - d * mg_phi_integral_from_zero(upper, d, singular_rule);
  return mg_constant(hurst) * std::pow(s, d) * g;
}

VolterraKernel::VolterraKernel(const TimeGrid& grid, double hurst)
    : steps_(grid.steps()), step_(grid.step()) {
  if (steps_ > 8192) throw ResourceError("VolterraKernel: limited to 8192 steps");
  const double d = hurst - 0.5;
  const double c = mg_constant(hurst);
  const GaussRule singular_rule = gauss_legendre(32);
  const GaussRule smooth_rule = gauss_legendre(12);
  rows_.resize(steps_);
  for (std::size_t i = 1; i <= steps_; ++i) rows_[i - 1].resize(static_cast<Eigen::Index>(i));
  // Column by column: s_j fixed, accumulate int_0^{L_i} phi over increasing t_i.
  // Scale invariance K(lambda t, lambda s) = lambda^{H-1/2} K(t, s) lets us work in cell units.
  const double scale = c * std::pow(step_, d);
  for (std::size_t j = 0; j < steps_; ++j) {
    const double s = static_cast<double>(j) + 0.5;
    const double s_factor = scale * std::pow(s, d);
    double previous = 0.0;
    double integral = 0.0;
    for (std::size_t i = j + 1; i <= steps_; ++i) {
      const double upper = std::log(static_cast<double>(i) / s);
      integral += (i == j + 1) ? mg_phi_integral_from_zero(upper, d, singular_rule)
                               : mg_phi_integral(previous, upper, d, smooth_rule);
      previous = upper;
      rows_[i - 1][static_cast<Eigen::Index>(j)] = s_factor * (mg_phi(upper, d) - d * integral);
    }
  }
}

Eigen::VectorXd VolterraKernel::apply(const Eigen::VectorXd& wiener_values) const {
  const auto n = static_cast<Eigen::Index>(steps_);
  if (wiener_values.size() != n + 1) throw DomainError("VolterraKernel: size mismatch");
  const Eigen::VectorXd dw = wiener_values.tail(n) - wiener_values.head(n);
  Eigen::VectorXd out(n + 1);
  out[0] = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) out[i] = rows_[static_cast<std::size_t>(i - 1)].dot(dw.head(i));
  return out;
}

double VolterraKernel::covariance(std::size_t i, std::size_t k) const {
  if (i == 0 || k == 0) return 0.0;
  const auto m = static_cast<Eigen::Index>(std::min(i, k));
  return step_ * rows_[i - 1].head(m).dot(rows_[k - 1].head(m));
}

// ---------------------------------------------------------------------------

NoiseGenerator::NoiseGenerator(const TimeGrid& grid, HurstIndex hurst, Dependence dependence,
                               FbmMethod method)
    : grid_(grid), hurst_(hurst.value()), dependence_(std::move(dependence)), method_(method) {
  switch (dependence_.mode) {
    case DependenceMode::independent:
      fbm_ = std::make_shared<const FbmGenerator>(grid, hurst, method);
      break;
    case DependenceMode::volterra:
      volterra_ = std::make_shared<const VolterraKernel>(grid, hurst_);
      break;
    case DependenceMode::joint_gaussian: {
      const std::size_t n = grid.steps();
      if (n > kMaxJointSteps) {
        throw ResourceError("joint-gaussian dependence is limited to " +
                            std::to_string(kMaxJointSteps) + " steps");
      }
      auto cross = dependence_.cross;
      if (!cross) {
        const double rho = dependence_.rho;
        const double e = hurst_ + 0.5;
        cross = [rho, e](double s, double t) {
          return rho * 0.5 * (std::pow(s, e) + std::pow(t, e) - std::pow(std::abs(t - s), e));
        };
      }
      const auto m = static_cast<Eigen::Index>(n);
      Eigen::MatrixXd cov(2 * m, 2 * m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double ti = grid.node(static_cast<std::size_t>(i + 1));
        for (Eigen::Index j = 0; j < m; ++j) {
          const double tj = grid.node(static_cast<std::size_t>(j + 1));
          cov(i, j) = std::min(ti, tj);
          cov(m + i, m + j) = fbm_covariance(ti, tj, hurst_);
          cov(i, m + j) = cross(ti, tj);  // E[W_{t_i} B_{t_j}]
          cov(m + j, i) = cov(i, m + j);
        }
      }
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() != Eigen::Success) {
        const double lambda = smallest_eigenvalue(cov);
        throw NotPositiveDefiniteError(
            "joint covariance of (W, B^H) is not positive semidefinite: smallest eigenvalue " +
                std::to_string(lambda),
            lambda);
      }
      joint_factor_ = llt.matrixL();
      break;
    }
  }
}

NoisePair NoiseGenerator::sample(std::uint64_t seed, std::uint64_t path) const {
  NoisePair pair{NoisePath{grid_, {}, ProcessKind::wiener, 0.5},
                 NoisePath{grid_, {}, ProcessKind::fbm, hurst_},
                 NoiseProvenance{seed, path, hurst_, grid_.horizon(), grid_.steps(), method_,
                                 dependence_.mode, dependence_.rho}};
  const NormalStream wiener_normals(seed, wiener_stream(path));
  const NormalStream fbm_normals(seed, fbm_stream(path));
  switch (dependence_.mode) {
    case DependenceMode::independent:
      pair.w.values = sample_wiener(grid_, wiener_normals);
      pair.bh.values = fbm_->sample(fbm_normals);
      break;
    case DependenceMode::volterra:
      pair.w.values = sample_wiener(grid_, wiener_normals);
      pair.bh.values = volterra_->apply(pair.w.values);
      break;
    case DependenceMode::joint_gaussian: {
      const auto m = static_cast<Eigen::Index>(grid_.steps());
      Eigen::VectorXd z(2 * m);
      wiener_normals.fill(z);
      const Eigen::VectorXd x = joint_factor_.triangularView<Eigen::Lower>() * z;
      pair.w.values.resize(m + 1);
      pair.bh.values.resize(m + 1);
      pair.w.values[0] = 0.0;
      pair.bh.values[0] = 0.0;
      pair.w.values.tail(m) = x.head(m);
      pair.bh.values.tail(m) = x.tail(m);
      break;
    }
  }
  return pair;
}

NoisePath generate_fbm(const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed,
                       FbmMethod method) {
  const FbmGenerator generator(grid, hurst, method);
  return NoisePath{grid, generator.sample(NormalStream(seed, fbm_stream(0))), ProcessKind::fbm,
                   hurst.value()};
}

NoisePath generate_wiener(const TimeGrid& grid, std::uint64_t seed) {
  return NoisePath{grid, sample_wiener(grid, NormalStream(seed, wiener_stream(0))),
                   ProcessKind::wiener, 0.5};
}

NoisePair generate_noise_pair(const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed,
                              const Dependence& dependence, FbmMethod method, std::uint64_t path) {
  return NoiseGenerator(grid, hurst, dependence, method).sample(seed, path);
}

// ---------------------------------------------------------------------------

double max_holder_eta(const NoisePath& path) noexcept {
  return path.kind == ProcessKind::wiener ? 0.5 : path.hurst;
}

Eigen::VectorXd holder_functional_series(const Eigen::VectorXd& values, double spacing,
                                         double eta, double hurst) {
  const Eigen::Index n = values.size() - 1;
  const double p = 2.0 / eta;
  const double q = 2.0 * hurst / eta;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  // Log of the lag weight |x - y|^{-q} for lag d cells, stored reversed so
  // that lag k - j lines up with index j.
  Eigen::ArrayXd lag_term_rev(std::max<Eigen::Index>(n, 1));
  for (Eigen::Index d = 1; d <= n; ++d) {
    lag_term_rev[n - d] = -q * std::log(static_cast<double>(d) * spacing);
  }
  const double log_h = std::log(spacing);
  Eigen::VectorXd out(n + 1);
  out[0] = 0.0;
  double log_t = kNegInf;  // log T_{k-1}: all pairs in [0, t_{k-1}], full end weights
  Eigen::ArrayXd e;
  for (Eigen::Index k = 1; k <= n; ++k) {
    e = p * (values[k] - values.head(k).array()).abs().log() + lag_term_rev.segment(n - k, k);
    e[0] += std::log(0.5);  // trapezoid end weight of node 0
    const double emax = e.maxCoeff();
    double log_r = kNegInf;
    if (emax > kNegInf) log_r = emax + std::log((e - emax).exp().sum()) + log_h;
    const double log_s = log_add_exp(log_t, log_h + log_r);
    log_t = log_add_exp(log_t, std::log(2.0) + log_h + log_r);
    const double value = log_s == kNegInf ? 0.0 : std::exp(0.5 * eta * log_s);
    out[k] = std::max(value, out[k - 1]);
  }
  return out;
}

HolderFunctional holder_functional(const NoisePath& path, double eta, double horizon) {
  const double eta_max = max_holder_eta(path);
  if (!(eta > 0.0 && eta < eta_max)) {
    throw DomainError("holder_functional: eta must lie in (0, " + std::to_string(eta_max) + ")");
  }
  if (!(horizon > 0.0) || horizon > path.grid.horizon() * (1.0 + 1e-12)) {
    throw DomainError("holder_functional: horizon must lie in (0, T]");
  }
  const std::size_t k = path.grid.floor_index(horizon);
  if (k + 1 < 8) {
    throw DomainError("holder_functional: need at least 8 grid nodes in [0, t]");
  }
  const Eigen::VectorXd series = holder_functional_series(
      path.values.head(static_cast<Eigen::Index>(k + 1)), path.grid.step(), eta, path.hurst);
  return HolderFunctional{eta, series[static_cast<Eigen::Index>(k)], path.kind, horizon};
}

}  // namespace mixsde
