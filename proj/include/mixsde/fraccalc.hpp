#pragma once

// Riemann-Liouville (Marchaud form) fractional derivatives, the fractional
// Lebesgue-Stieltjes (Young) integral and the weighted Hoelder-type norms,
// all evaluated on piecewise-linear interpolants of uniformly sampled data.
//
// Every singular kernel is integrated in closed form against the hat
// functions of the sampling grid (product integration), so no kernel is ever
// evaluated at its singular point.  For piecewise-linear data the nodal
// values of the derivatives are exact up to rounding.

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "mixsde/errors.hpp"
#include "mixsde/grid.hpp"
#include "mixsde/quadrature.hpp"

namespace mixsde {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Samples of a function on the uniform nodes a + k h, k = 0..n, extended
/// between nodes by linear interpolation.
template <typename Scalar>
class SampledFunction {
 public:
  SampledFunction(Scalar lower, Scalar spacing, VectorX<Scalar> values)
      : lower_(lower), spacing_(spacing), values_(std::move(values)) {
    if (values_.size() < 2) throw DomainError("SampledFunction: need at least two samples");
    if (!(spacing_ > Scalar(0)) || !std::isfinite(static_cast<double>(spacing_))) {
      throw DomainError("SampledFunction: spacing must be positive");
    }
    if (!values_.allFinite()) throw DomainError("SampledFunction: non-finite sample");
  }

  static SampledFunction on_grid(const TimeGrid& grid, VectorX<Scalar> values) {
    if (values.size() != static_cast<Eigen::Index>(grid.size())) {
      throw DomainError("SampledFunction: value count does not match the grid");
    }
    return SampledFunction(Scalar(0), static_cast<Scalar>(grid.step()), std::move(values));
  }

  template <typename Fn>
  static SampledFunction tabulate(Scalar lower, Scalar upper, Eigen::Index steps, Fn&& fn) {
    const Scalar h = (upper - lower) / static_cast<Scalar>(steps);
    VectorX<Scalar> v(steps + 1);
    for (Eigen::Index k = 0; k <= steps; ++k) {
      v[k] = fn(k == steps ? upper : lower + static_cast<Scalar>(k) * h);
    }
    return SampledFunction(lower, h, std::move(v));
  }

  Scalar lower() const noexcept { return lower_; }
  Scalar upper() const noexcept { return lower_ + static_cast<Scalar>(steps()) * spacing_; }
  Scalar spacing() const noexcept { return spacing_; }
  Eigen::Index steps() const noexcept { return values_.size() - 1; }
  const VectorX<Scalar>& values() const noexcept { return values_; }
  Scalar node(Eigen::Index k) const noexcept { return lower_ + static_cast<Scalar>(k) * spacing_; }

  /// Cell index k and fractional offset theta in [0, 1) with
  /// x = a + (k + theta) h; offsets within 1e-12 of a node snap to it.
  std::pair<Eigen::Index, Scalar> locate(Scalar x) const noexcept {
    return locate_offset((x - lower_) / spacing_);
  }

  std::pair<Eigen::Index, Scalar> locate_offset(Scalar p) const noexcept {
    const Eigen::Index n = steps();
    if (p <= Scalar(0)) return {0, Scalar(0)};
    if (p >= static_cast<Scalar>(n)) return {n, Scalar(0)};
    auto k = static_cast<Eigen::Index>(std::floor(p));
    Scalar theta = p - static_cast<Scalar>(k);
    if (theta < Scalar(1e-12)) theta = Scalar(0);
    if (theta > Scalar(1) - Scalar(1e-12)) {
      ++k;
      theta = Scalar(0);
    }
    return {k, theta};
  }

  Scalar operator()(Scalar x) const {
    if (x < lower_ - Scalar(1e-12) * spacing_ || x > upper() + Scalar(1e-12) * spacing_) {
      throw DomainError("SampledFunction: evaluation point outside [a, b]");
    }
    const auto [k, theta] = locate(x);
    if (theta == Scalar(0)) return values_[k];
    return values_[k] + theta * (values_[k + 1] - values_[k]);
  }

  /// Restriction to the nodes first..last.
  SampledFunction segment(Eigen::Index first, Eigen::Index last) const {
    if (first < 0 || last > steps() || last - first < 1) {
      throw DomainError("SampledFunction: invalid segment");
    }
    return SampledFunction(node(first), spacing_, values_.segment(first, last - first + 1));
  }

 private:
  Scalar lower_;
  Scalar spacing_;
  VectorX<Scalar> values_;
};

/// Hat-function weights of the Marchaud kernel r^(-1-order) for evaluation
/// points x = a + (k + theta) h.
///
/// integral(v, k, F) returns int_a^x (F - v(u)) (x - u)^(-1-order) du for the
/// piecewise-linear interpolant v with F = v(x); the absolute variant
/// integrates |F - v(u)| with |.| applied at the nodes.
template <typename Scalar>
class MarchaudWeights {
 public:
  MarchaudWeights(Scalar order, Scalar spacing, Scalar theta, Eigen::Index steps)
      : theta_(theta), steps_(steps) {
    using std::pow;
    const Scalar p = -Scalar(1) - order;
    const Scalar scale = pow(spacing, -order);
    // far_[D]: weight of the far node of the cell at distance index D;
    // near_[D]: weight of its near node.
    VectorX<Scalar> near(steps + 2);
    far_.setZero(steps + 1);
    near.setZero();
    for (Eigen::Index d = 1; d <= steps; ++d) {
      const Scalar lo = static_cast<Scalar>(d - 1) + theta;
      const auto [m0, m1] = power_moments<Scalar>(lo, p);
      far_[d] = scale * m1;
      near[d] = (lo == Scalar(0)) ? Scalar(0) : scale * (m0 - m1);
    }
    comb_rev_.setZero(steps + 1);
    for (Eigen::Index d = 1; d < steps; ++d) comb_rev_[steps - d] = far_[d] + near[d + 1];
    near1_ = steps >= 1 ? near[1] : Scalar(0);
    partial_ = theta > Scalar(0) ? pow(theta * spacing, -order) / (Scalar(1) - order) : Scalar(0);
  }

  Scalar theta() const noexcept { return theta_; }

  template <bool Absolute = false>
  Scalar integral(const VectorX<Scalar>& v, Eigen::Index k, Scalar value_at_x) const {
    using std::abs;
    auto phi = [](Scalar d) { return Absolute ? abs(d) : d; };
    Scalar sum = 0;
    if (k >= 1) {
      sum += far_[k] * phi(value_at_x - v[0]) + near1_ * phi(value_at_x - v[k]);
      if (k >= 2) {
        const auto w = comb_rev_.segment(steps_ - k + 1, k - 1).array();
        const auto diff = value_at_x - v.segment(1, k - 1).array();
        if constexpr (Absolute) {
          sum += (w * diff.abs()).sum();
        } else {
          sum += (w * diff).sum();
        }
      }
    }
    if (partial_ != Scalar(0)) sum += partial_ * phi(value_at_x - v[k]);
    return sum;
  }

 private:
  Scalar theta_;
  Eigen::Index steps_;
  VectorX<Scalar> far_;
  VectorX<Scalar> comb_rev_;
  Scalar near1_ = 0;
  Scalar partial_ = 0;
};

namespace detail {

template <typename Scalar>
void require_order(Scalar alpha, const char* op) {
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) {
    throw DomainError(std::string(op) + ": fractional order must lie in (0, 1)");
  }
}

// Marchaud expression of order `order` at offset p (in cells) from the left
// end of `v`, without the Gamma normalisation:
//   F / dist^order + order * int (F - v(u)) (x - u)^(-1-order) du
/// Regularized incomplete beta map theta = I_t(p, q) for integers p, q >= 1
/// and its derivative t^(p-1) (1 - t)^(q-1) / B(p, q).
template <typename Scalar>
std::pair<Scalar, Scalar> beta_map(Scalar t, int p, int q) {
  const int m = p + q - 1;
  Scalar theta = 0;
  Scalar binom = 1;  // C(m, j), built up from j = 0
  for (int j = 0; j <= m; ++j) {
    if (j >= p) theta += binom * std::pow(t, Scalar(j)) * std::pow(Scalar(1) - t, Scalar(m - j));
    binom = binom * Scalar(m - j) / Scalar(j + 1);
  }
  // 1 / B(p, q) = m! / ((p - 1)! (q - 1)!)
  Scalar inv_beta = 1;
  for (int j = 1; j <= m; ++j) inv_beta *= Scalar(j);
  for (int j = 1; j < p; ++j) inv_beta /= Scalar(j);
  for (int j = 1; j < q; ++j) inv_beta /= Scalar(j);
  const Scalar jac =
      inv_beta * std::pow(t, Scalar(p - 1)) * std::pow(Scalar(1) - t, Scalar(q - 1));
  return {theta, jac};
}

template <typename Scalar>
Scalar marchaud_left(const VectorX<Scalar>& v, Scalar spacing, Scalar order, Eigen::Index k,
                     Scalar theta) {
  const Eigen::Index n = v.size() - 1;
  const MarchaudWeights<Scalar> w(order, spacing, theta, n);
  const Scalar value = theta == Scalar(0) ? v[k] : v[k] + theta * (v[k + 1] - v[k]);
  const Scalar dist = (static_cast<Scalar>(k) + theta) * spacing;
  return value * std::pow(dist, -order) + order * w.integral(v, k, value);
}

}  // namespace detail

/// Left-sided derivative (D^alpha_{a+} f)(x), a < x <= b.
template <typename Scalar>
Scalar left_derivative(const SampledFunction<Scalar>& f, Scalar alpha, Scalar x) {
  detail::require_order(alpha, "left_derivative");
  if (!(x > f.lower()) || x > f.upper() + Scalar(1e-12) * f.spacing()) {
    throw DomainError("left_derivative: evaluation point must satisfy a < x <= b");
  }
  const auto [k, theta] = f.locate(x);
  if (k == 0 && theta == Scalar(0)) {
    throw DomainError("left_derivative: evaluation point too close to a");
  }
  return detail::marchaud_left(f.values(), f.spacing(), alpha, k, theta) /
         std::tgamma(Scalar(1) - alpha);
}

/// Right-sided derivative (D^{1-alpha}_{b-} g)(x), a <= x < b, as a real
/// number: the phase factor of the complex convention is dropped and the
/// kernel is read as |u - x|^(alpha - 2).
template <typename Scalar>
Scalar right_derivative(const SampledFunction<Scalar>& g, Scalar alpha, Scalar x) {
  detail::require_order(alpha, "right_derivative");
  if (!(x < g.upper()) || x < g.lower() - Scalar(1e-12) * g.spacing()) {
    throw DomainError("right_derivative: evaluation point must satisfy a <= x < b");
  }
  const VectorX<Scalar> reversed = g.values().reverse();
  const auto [k, theta] = g.locate_offset((g.upper() - x) / g.spacing());
  if (k == 0 && theta == Scalar(0)) {
    throw DomainError("right_derivative: evaluation point too close to b");
  }
  const Scalar order = Scalar(1) - alpha;
  return detail::marchaud_left(reversed, g.spacing(), order, k, theta) / std::tgamma(alpha);
}

struct YoungOptions {
  /// Gauss points per grid cell for the outer integral.
  int points_per_cell = 8;
  /// Hoelder exponent of the integrator; values below 1 enable the
  /// admissible-window check.
  double integrator_holder = 1.0;
  std::function<void(const std::string&)> on_warning;
};

/// Fractional Lebesgue-Stieltjes integral int_a^b f dg.
///
/// Evaluated as int_a^b (D^alpha_{a+} f)(x) (D^{1-alpha}_{b-} g_{b-})(x) dx
/// with g_{b-} = g(b) - g.  The outer integral runs cell by cell through a
/// polynomial change of variables that flattens the algebraic endpoint
/// behaviour both derivatives have at every node.
template <typename Scalar>
Scalar young_integral(const SampledFunction<Scalar>& f, const SampledFunction<Scalar>& g,
                      Scalar alpha, const YoungOptions& options = {}) {
  using std::pow;
  detail::require_order(alpha, "young_integral");
  const Eigen::Index n = f.steps();
  if (g.steps() != n || std::abs(static_cast<double>(f.lower() - g.lower())) >
                            1e-12 * static_cast<double>(f.spacing()) ||
      std::abs(static_cast<double>(f.spacing() - g.spacing())) >
          1e-12 * static_cast<double>(f.spacing())) {
    throw DomainError("young_integral: f and g must be sampled on the same grid");
  }
  if (options.points_per_cell < 1) throw DomainError("young_integral: points_per_cell >= 1");
  if (options.integrator_holder < 1.0 && options.on_warning) {
    const double a = static_cast<double>(alpha);
    if (a > 0.5 || a <= 1.0 - options.integrator_holder) {
      options.on_warning("young_integral: alpha outside (1 - H, 1/2]; convergence of the "
                         "fractional integral is not guaranteed for this integrator");
    }
  }

  const Scalar h = f.spacing();
  const VectorX<Scalar>& fv = f.values();
  // g_{b-} on the reversed axis: hr[i] = g(b) - g(b - i h).
  const VectorX<Scalar> hr = (g.values()[n] - g.values().array()).matrix().reverse();
  const Scalar gamma_left = std::tgamma(Scalar(1) - alpha);
  const Scalar gamma_right = std::tgamma(alpha);
  const Scalar order_right = Scalar(1) - alpha;

  // Integrand at x = a + (k + theta) h, given kernel tables built for theta.
  auto integrand = [&](Eigen::Index k, Scalar theta, const MarchaudWeights<Scalar>& wl,
                       const MarchaudWeights<Scalar>& wr) {
    const Scalar fx = fv[k] + theta * (fv[k + 1] - fv[k]);
    const Scalar dl = (static_cast<Scalar>(k) + theta) * h;
    const Scalar left = (fx * pow(dl, -alpha) + alpha * wl.integral(fv, k, fx)) / gamma_left;
    const Eigen::Index kr = n - k - 1;
    const Scalar hx = hr[kr] + (Scalar(1) - theta) * (hr[kr + 1] - hr[kr]);
    const Scalar dr = (static_cast<Scalar>(kr) + Scalar(1) - theta) * h;
    const Scalar right =
        (hx * pow(dr, -order_right) + order_right * wr.integral(hr, kr, hx)) / gamma_right;
    return left * right;
  };

  const GaussRule rule = gauss_legendre(static_cast<std::size_t>(options.points_per_cell));
  VectorX<Scalar> cells = VectorX<Scalar>::Zero(n);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const Scalar t = static_cast<Scalar>(rule.nodes[q]);
    const Scalar w = static_cast<Scalar>(rule.weights[q]) * h;
    // Polynomial maps keep the integrand free of complex poles near the
    // cell, so Gauss converges fast once the endpoint powers are flattened.
    // Interior cells: I_t(4, 4), cubic contact at both nodes.
    const auto [theta, jac] = detail::beta_map<Scalar>(t, 4, 4);
    const MarchaudWeights<Scalar> wl(alpha, h, theta, n);
    const MarchaudWeights<Scalar> wr(order_right, h, Scalar(1) - theta, n);
    for (Eigen::Index k = 1; k < n; ++k) cells[k] += w * jac * integrand(k, theta, wl, wr);
  }
  // First cell: I_t(8, 4) also absorbs the x^(-alpha) growth of D^alpha f at
  // a; the steeper map gets a rule twice as long.
  const GaussRule first = gauss_legendre(2 * static_cast<std::size_t>(options.points_per_cell));
  for (std::size_t q = 0; q < first.nodes.size(); ++q) {
    const auto [theta, jac] = detail::beta_map<Scalar>(static_cast<Scalar>(first.nodes[q]), 8, 4);
    cells[0] += static_cast<Scalar>(first.weights[q]) * h * jac *
                integrand(0, theta, MarchaudWeights<Scalar>(alpha, h, theta, n),
                          MarchaudWeights<Scalar>(order_right, h, Scalar(1) - theta, n));
  }
  const Scalar value = cells.sum();
  if (!std::isfinite(static_cast<double>(value))) {
    throw NumericalError("young_integral: non-finite fractional derivative");
  }
  return value;
}

/// Node weights and singular-kernel tables for the two weighted norms on a
/// fixed grid; reuse one instance across many functions on that grid.
template <typename Scalar>
class AlphaNorms {
 public:
  AlphaNorms(Scalar alpha, Scalar lower, Scalar spacing, Eigen::Index steps)
      : alpha_(alpha), steps_(steps), kernel_(alpha, spacing, Scalar(0), steps) {
    using std::pow;
    detail::require_order(alpha, "AlphaNorms");
    if (lower < Scalar(0)) throw DomainError("AlphaNorms: the weight s^(-alpha) needs a >= 0");
    weights2_.setZero(steps + 1);
    if (alpha < Scalar(0.5)) {
      const Scalar left_scale = pow(spacing, Scalar(1) - alpha);
      const Scalar pr = -alpha - Scalar(0.5);
      const Scalar right_scale = pow(spacing, pr + Scalar(1));
      const Scalar offset = lower / spacing;
      for (Eigen::Index k = 0; k < steps; ++k) {
        const auto [m0, m1] = power_moments<Scalar>(offset + static_cast<Scalar>(k), -alpha);
        weights2_[k] += left_scale * (m0 - m1);
        weights2_[k + 1] += left_scale * m1;
        const auto [r0, r1] = power_moments<Scalar>(static_cast<Scalar>(steps - k - 1), pr);
        weights2_[k] += right_scale * r1;
        weights2_[k + 1] += right_scale * (r0 - r1);
      }
    }
  }

  AlphaNorms(Scalar alpha, const SampledFunction<Scalar>& f)
      : AlphaNorms(alpha, f.lower(), f.spacing(), f.steps()) {}

  Scalar alpha() const noexcept { return alpha_; }

  /// |f(s)| + int_a^s |f(s) - f(z)| (s - z)^(-1-alpha) dz at every node.
  VectorX<Scalar> brackets(const VectorX<Scalar>& v) const {
    check_size(v);
    VectorX<Scalar> out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      out[k] = std::abs(v[k]) + kernel_.template integral<true>(v, k, v[k]);
    }
    return out;
  }

  /// The increment integral alone, without |f(s)|.
  VectorX<Scalar> increment_integrals(const VectorX<Scalar>& v) const {
    check_size(v);
    VectorX<Scalar> out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) out[k] = kernel_.template integral<true>(v, k, v[k]);
    return out;
  }

  Scalar inf_norm(const VectorX<Scalar>& v) const { return brackets(v).maxCoeff(); }

  Scalar two_norm_from_brackets(const VectorX<Scalar>& brackets) const {
    if (!(alpha_ < Scalar(0.5))) {
      throw DomainError("norm_2_alpha: alpha must lie in (0, 1/2)");
    }
    return std::sqrt((weights2_.array() * brackets.array().square()).sum());
  }

  Scalar two_norm(const VectorX<Scalar>& v) const { return two_norm_from_brackets(brackets(v)); }

 private:
  void check_size(const VectorX<Scalar>& v) const {
    if (v.size() != steps_ + 1) throw DomainError("AlphaNorms: sample count mismatch");
  }

  Scalar alpha_;
  Eigen::Index steps_;
  MarchaudWeights<Scalar> kernel_;
  VectorX<Scalar> weights2_;
};

/// sup_s ( |f(s)| + int_a^s |f(s) - f(z)| (s - z)^(-1-alpha) dz ), sup over nodes.
template <typename Scalar>
Scalar norm_inf_alpha(const SampledFunction<Scalar>& f, Scalar alpha) {
  return AlphaNorms<Scalar>(alpha, f).inf_norm(f.values());
}

/// ( int_a^b bracket(s)^2 (s^(-alpha) + (b - s)^(-alpha-1/2)) ds )^(1/2) with
/// the squared bracket interpolated linearly between nodes.  Needs a >= 0.
template <typename Scalar>
Scalar norm_2_alpha(const SampledFunction<Scalar>& f, Scalar alpha) {
  if (!(alpha > Scalar(0) && alpha < Scalar(0.5))) {
    throw DomainError("norm_2_alpha: alpha must lie in (0, 1/2)");
  }
  return AlphaNorms<Scalar>(alpha, f).two_norm(f.values());
}

/// C_{alpha,a,b} = ( int_a^b (s^(-alpha) + (b - s)^(-alpha-1/2)) ds )^(1/2),
/// so that norm_2_alpha <= C norm_inf_alpha.
template <typename Scalar>
Scalar norm_comparison_constant(Scalar alpha, Scalar a, Scalar b) {
  using std::pow;
  if (!(alpha > Scalar(0) && alpha < Scalar(0.5)) || a < Scalar(0) || !(b > a)) {
    throw DomainError("norm_comparison_constant: need 0 < alpha < 1/2 and 0 <= a < b");
  }
  const Scalar left = (pow(b, Scalar(1) - alpha) - pow(a, Scalar(1) - alpha)) / (Scalar(1) - alpha);
  const Scalar right = pow(b - a, Scalar(0.5) - alpha) / (Scalar(0.5) - alpha);
  return std::sqrt(left + right);
}

/// K_B int_u^v ( |f(s)| (s - u)^(-alpha) + int_u^s |f(s) - f(z)| (s - z)^(-alpha-1) dz ) ds
/// over the sampled interval [u, v]; the leading constant C_alpha is taken as 1.
template <typename Scalar>
Scalar integral_bound(const SampledFunction<Scalar>& f, Scalar alpha, Scalar holder_constant) {
  using std::pow;
  detail::require_order(alpha, "integral_bound");
  if (holder_constant < Scalar(0)) throw DomainError("integral_bound: negative Hoelder constant");
  const Eigen::Index n = f.steps();
  const Scalar h = f.spacing();
  const VectorX<Scalar>& v = f.values();
  const Scalar scale = pow(h, Scalar(1) - alpha);
  Scalar first = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto [m0, m1] = power_moments<Scalar>(static_cast<Scalar>(k), -alpha);
    first += scale * ((m0 - m1) * std::abs(v[k]) + m1 * std::abs(v[k + 1]));
  }
  const MarchaudWeights<Scalar> kernel(alpha, h, Scalar(0), n);
  Scalar second = 0;
  for (Eigen::Index k = 0; k <= n; ++k) {
    const Scalar w = (k == 0 || k == n) ? h / Scalar(2) : h;
    second += w * kernel.template integral<true>(v, k, v[k]);
  }
  return holder_constant * (first + second);
}

}  // namespace mixsde
