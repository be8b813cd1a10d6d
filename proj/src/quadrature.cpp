#include "mixsde/quadrature.hpp"

#include <numbers>

namespace mixsde {

GaussRule gauss_legendre(std::size_t points) {
  GaussRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const auto n = static_cast<double>(points);
  for (std::size_t i = 0; i < points; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= points; ++k) {
        const auto kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[points - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[points - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss_legendre_16() {
  static const GaussRule rule = gauss_legendre(16);
  return rule;
}

}  // namespace mixsde
