#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mixsde {

using CoefficientFn = std::function<double(double t, double x)>;

/// Coefficients of dX = a dt + b dW + c dB^H together with dc = d/dx c and
/// the constants the hypotheses are claimed with.  The functions must be
/// pure: the solver and the checker call them from several threads.
struct CoefficientSet {
  std::string name;
  CoefficientFn a;
  CoefficientFn b;
  CoefficientFn c;
  CoefficientFn dc;
  double K = 1.0;
  /// Time-Hoelder exponent, in (1 - H, 1).
  double beta = 0.9;
  /// Source text of a, b, c, dc when built from expressions (empty for presets).
  std::array<std::string, 4> expressions;
};

/// Names accepted by preset(): linear, additive, bounded-smooth, zero,
/// quadratic-c, linear-b.  The last two violate the hypotheses on purpose.
std::vector<std::string> preset_names();

CoefficientSet preset(const std::string& name);

/// Coefficients parsed from expressions in t and x (see Expression).
CoefficientSet from_expressions(const std::string& name, const std::string& a,
                                const std::string& b, const std::string& c,
                                const std::string& dc, double K, double beta);

/// kappa = min(1/2, beta), the rate-limiting exponent; beta in (0, 1).
double kappa(double beta);

/// Throws DomainError unless 1 - H < beta < 1.
void check_beta(double beta, double hurst);

/// Region and sample sizes for check_hypotheses.
///
/// States mix a uniform block on [-x_core, x_core] with log-uniform
/// magnitudes on [x_core, x_max]; separations |x - y| and |s - t| are
/// log-uniform on [min_separation, max_separation].
struct CheckDomain {
  double t_min = 0.0;
  double t_max = 1.0;
  double x_core = 10.0;
  double x_max = 1e6;
  double min_separation = 1e-6;
  double max_separation = 1.0;
  std::size_t time_samples = 128;
  std::size_t state_samples = 256;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

/// A sampled point; unused coordinates repeat t or x.
struct Witness {
  double t = 0.0;
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct HypothesisResult {
  char id = 'A';
  std::string name;
  bool pass = true;
  /// Worst sampled value of the left side divided by the hypothesis'
  /// scale (1 + |x|, |x - y|, |s - t|^beta or 1); pass iff <= K.
  double worst_ratio = 0.0;
  Witness witness;
  bool non_finite = false;
};

struct HypothesisReport {
  std::string coefficients;
  double K = 0.0;
  double beta = 0.0;
  std::size_t samples = 0;
  std::array<HypothesisResult, 5> results;

  bool all_pass() const noexcept;
  /// First failing hypothesis, or nullptr.
  const HypothesisResult* first_failure() const noexcept;
  /// Human-readable summary; a pass is sample-level evidence only.
  std::string summary() const;
};

/// Evaluates hypotheses (A)-(E) on time_samples x state_samples quasi-random
/// tuples (t, s, x, y) (randomly shifted Halton points keyed by the seed).
/// Deterministic in (coeffs, domain) and independent of the worker count.
HypothesisReport check_hypotheses(const CoefficientSet& coeffs, const CheckDomain& domain = {});

}  // namespace mixsde
