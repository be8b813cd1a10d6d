#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace mixsde {

/// Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(std::size_t points);

/// Shared 16-point rule used by the moment tables.
const GaussRule& gauss_legendre_16();

/// Moments of the power weight rho^p over one unit cell [lo, lo + 1]:
///   first  = int rho^p d rho
///   second = int (rho - lo) rho^p d rho
/// lo >= 0.  Far cells (lo >= 16) use a 16-point Gauss rule, which avoids the
/// cancellation of the closed form; near cells use the closed form.  When
/// lo == 0 and p <= -1 the first moment is +inf.
template <typename Scalar>
std::pair<Scalar, Scalar> power_moments(Scalar lo, Scalar p) {
  using std::log;
  using std::pow;
  if (lo >= Scalar(16)) {
    const auto& rule = gauss_legendre_16();
    Scalar m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const Scalar x = static_cast<Scalar>(rule.nodes[i]);
      const Scalar w = static_cast<Scalar>(rule.weights[i]) * pow(lo + x, p);
      m0 += w;
      m1 += w * x;
    }
    return {m0, m1};
  }
  const Scalar hi = lo + Scalar(1);
  auto antiderivative = [](Scalar r, Scalar e) -> Scalar {
    // int r^(e-1) dr
    if (std::abs(e) < Scalar(1e-14)) return log(r);
    return pow(r, e) / e;
  };
  Scalar m0;
  Scalar m2;  // int rho^(p+1)
  if (lo == Scalar(0)) {
    m0 = (p + Scalar(1) > Scalar(0)) ? Scalar(1) / (p + Scalar(1))
                                     : std::numeric_limits<Scalar>::infinity();
    m2 = Scalar(1) / (p + Scalar(2));
    return {m0, m2};
  }
  m0 = antiderivative(hi, p + Scalar(1)) - antiderivative(lo, p + Scalar(1));
  m2 = antiderivative(hi, p + Scalar(2)) - antiderivative(lo, p + Scalar(2));
  return {m0, m2 - lo * m0};
}

}  // namespace mixsde
