#include "mixsde/euler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "mixsde/errors.hpp"

namespace mixsde {
namespace {

void check_state(double x, std::size_t k) {
  if (!std::isfinite(x)) {
    throw NumericalError("euler: non-finite state at step " + std::to_string(k), k);
  }
  if (std::abs(x) > kStateLimit) {
    throw NumericalError("euler: |X| exceeds 1e12 at step " + std::to_string(k), k);
  }
}

std::size_t noise_stride(const TimeGrid& noise_grid, const TimeGrid& grid) {
  if (!noise_grid.refines(grid)) {
    throw DomainError("euler: the noise grid (n = " + std::to_string(noise_grid.steps()) +
                      ") does not refine the solver grid (n = " + std::to_string(grid.steps()) +
                      ")");
  }
  return noise_grid.ratio(grid);
}

void require_sizes(const TimeGrid& noise_grid, const Eigen::VectorXd& w, const Eigen::VectorXd& bh,
                   std::size_t stride) {
  const auto size = static_cast<Eigen::Index>(noise_grid.size());
  if (w.size() != size || bh.size() != size) throw DomainError("euler: noise size mismatch");
  if (stride == 0 || noise_grid.steps() % stride != 0) {
    throw DomainError("euler: stride must divide the noise steps");
  }
}

// One pass of the recursion; optionally records the frozen coefficients.
void run(const CoefficientSet& coeffs, const TimeGrid& noise_grid, const Eigen::VectorXd& w,
         const Eigen::VectorXd& bh, std::size_t stride, double x0, Eigen::VectorXd& x,
         Eigen::VectorXd* a, Eigen::VectorXd* b, Eigen::VectorXd* c) {
  const std::size_t n = noise_grid.steps() / stride;
  const TimeGrid grid(noise_grid.horizon(), n);
  x.resize(static_cast<Eigen::Index>(n + 1));
  if (a) {
    a->resize(static_cast<Eigen::Index>(n));
    b->resize(static_cast<Eigen::Index>(n));
    c->resize(static_cast<Eigen::Index>(n));
  }
  check_state(x0, 0);
  x[0] = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.node(k);
    const double xk = x[static_cast<Eigen::Index>(k)];
    const double ak = coeffs.a(t, xk);
    const double bk = coeffs.b(t, xk);
    const double ck = coeffs.c(t, xk);
    const auto j0 = static_cast<Eigen::Index>(k * stride);
    const auto j1 = static_cast<Eigen::Index>((k + 1) * stride);
    const double next = xk + ak * (grid.node(k + 1) - t) + bk * (w[j1] - w[j0]) +
                        ck * (bh[j1] - bh[j0]);
    check_state(next, k + 1);
    x[static_cast<Eigen::Index>(k + 1)] = next;
    if (a) {
      (*a)[static_cast<Eigen::Index>(k)] = ak;
      (*b)[static_cast<Eigen::Index>(k)] = bk;
      (*c)[static_cast<Eigen::Index>(k)] = ck;
    }
  }
}

}  // namespace

void euler_values(const CoefficientSet& coeffs, const TimeGrid& noise_grid,
                  const Eigen::VectorXd& w, const Eigen::VectorXd& bh, std::size_t stride,
                  double x0, Eigen::VectorXd& out) {
  require_sizes(noise_grid, w, bh, stride);
  run(coeffs, noise_grid, w, bh, stride, x0, out, nullptr, nullptr, nullptr);
}

EulerSolution euler_solve(std::shared_ptr<const CoefficientSet> coeffs,
                          std::shared_ptr<const NoisePair> noise, double x0,
                          const TimeGrid& grid) {
  if (!coeffs || !noise) throw DomainError("euler_solve: null coefficients or noise");
  const TimeGrid& ng = noise->grid();
  const std::size_t stride = noise_stride(ng, grid);
  require_sizes(ng, noise->w.values, noise->bh.values, stride);
  EulerSolution sol;
  sol.grid = grid;
  sol.stride = stride;
  sol.x0 = x0;
  run(*coeffs, ng, noise->w.values, noise->bh.values, stride, x0, sol.values, &sol.a, &sol.b,
      &sol.c);
  sol.noise = std::move(noise);
  sol.coeffs = std::move(coeffs);
  return sol;
}

EulerSolution euler_solve(std::shared_ptr<const CoefficientSet> coeffs,
                          std::shared_ptr<const NoisePair> noise, double x0) {
  if (!noise) throw DomainError("euler_solve: null noise");
  const TimeGrid grid = noise->grid();
  return euler_solve(std::move(coeffs), std::move(noise), x0, grid);
}

namespace {

double interpolate_at(const EulerSolution& sol, std::size_t j) {
  const std::size_t k = j / sol.stride;
  const auto ki = static_cast<Eigen::Index>(k);
  if (j % sol.stride == 0) return sol.values[ki];
  const NoisePair& nz = *sol.noise;
  const auto j0 = static_cast<Eigen::Index>(k * sol.stride);
  const auto ji = static_cast<Eigen::Index>(j);
  return sol.values[ki] + sol.a[ki] * (nz.grid().node(j) - sol.grid.node(k)) +
         sol.b[ki] * (nz.w.values[ji] - nz.w.values[j0]) +
         sol.c[ki] * (nz.bh.values[ji] - nz.bh.values[j0]);
}

std::size_t resolve(const TimeGrid& noise_grid, double u) {
  if (!(u >= 0.0 && u <= noise_grid.horizon() * (1.0 + 1e-12))) {
    throw DomainError("interpolate: u must lie in [0, T]");
  }
  const std::size_t j = noise_grid.find_node(u);
  if (j == TimeGrid::npos) {
    throw DomainError("interpolate: u = " + std::to_string(u) +
                      " is not a node of the noise grid; noise is not interpolated");
  }
  return j;
}

}  // namespace

double interpolate(const EulerSolution& sol, double u) {
  return interpolate_at(sol, resolve(sol.noise->grid(), u));
}

Eigen::VectorXd interpolate_on_noise_grid(const EulerSolution& sol) {
  Eigen::VectorXd out;
  interpolate_on_noise_grid(*sol.coeffs, sol.noise->grid(), sol.noise->w.values,
                            sol.noise->bh.values, sol.stride, sol.values, out);
  return out;
}

void interpolate_on_noise_grid(const CoefficientSet& coeffs, const TimeGrid& noise_grid,
                               const Eigen::VectorXd& w, const Eigen::VectorXd& bh,
                               std::size_t stride, const Eigen::VectorXd& coarse,
                               Eigen::VectorXd& out) {
  require_sizes(noise_grid, w, bh, stride);
  const std::size_t n = noise_grid.steps() / stride;
  if (coarse.size() != static_cast<Eigen::Index>(n + 1)) {
    throw DomainError("interpolate_on_noise_grid: coarse size mismatch");
  }
  const TimeGrid grid(noise_grid.horizon(), n);
  out.resize(static_cast<Eigen::Index>(noise_grid.size()));
  for (std::size_t k = 0; k < n; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    const double t = grid.node(k);
    const double xk = coarse[ki];
    const double ak = coeffs.a(t, xk);
    const double bk = coeffs.b(t, xk);
    const double ck = coeffs.c(t, xk);
    const auto j0 = static_cast<Eigen::Index>(k * stride);
    out[j0] = xk;
    for (std::size_t r = 1; r < stride; ++r) {
      const auto j = j0 + static_cast<Eigen::Index>(r);
      out[j] = xk + ak * (noise_grid.node(static_cast<std::size_t>(j)) - t) +
               bk * (w[j] - w[j0]) + ck * (bh[j] - bh[j0]);
    }
  }
  out[static_cast<Eigen::Index>(noise_grid.steps())] = coarse[static_cast<Eigen::Index>(n)];
}

FunctionalKind parse_functional_kind(const std::string& name) {
  if (name == "wiener" || name == "W") return FunctionalKind::wiener;
  if (name == "fbm" || name == "B") return FunctionalKind::fbm;
  if (name == "sum") return FunctionalKind::sum;
  throw DomainError("unknown functional kind '" + name + "' (wiener, fbm, sum)");
}

Eigen::VectorXd functional_series(const NoisePair& noise, double eta, FunctionalKind kind,
                                  std::size_t monitor_stride) {
  const TimeGrid& g = noise.grid();
  if (monitor_stride == 0 || g.steps() % monitor_stride != 0) {
    throw DomainError("functional_series: monitor stride must divide the noise steps");
  }
  const bool use_w = kind != FunctionalKind::fbm;
  const bool use_b = kind != FunctionalKind::wiener;
  const double eta_max = std::min(use_w ? 0.5 : 1.0, use_b ? noise.bh.hurst : 1.0);
  if (!(eta > 0.0 && eta < eta_max)) {
    throw DomainError("functional_series: eta must lie in (0, " + std::to_string(eta_max) + ")");
  }
  const auto m = static_cast<Eigen::Index>(g.steps() / monitor_stride);
  const double spacing = g.horizon() / static_cast<double>(m);
  auto sub = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd s(m + 1);
    for (Eigen::Index i = 0; i <= m; ++i) s[i] = v[i * static_cast<Eigen::Index>(monitor_stride)];
    return s;
  };
  Eigen::VectorXd total = Eigen::VectorXd::Zero(m + 1);
  if (use_w) total += holder_functional_series(sub(noise.w.values), spacing, eta, 0.5);
  if (use_b) {
    total += holder_functional_series(sub(noise.bh.values), spacing, eta, noise.bh.hurst);
  }
  return total;
}

StoppingTime stopping_time(const NoisePair& noise, double eta, double threshold,
                           FunctionalKind kind, std::size_t monitor_stride) {
  if (!(threshold > 0.0)) throw DomainError("stopping_time: threshold must be positive");
  const TimeGrid& g = noise.grid();
  const Eigen::VectorXd total = functional_series(noise, eta, kind, monitor_stride);
  const Eigen::Index m = total.size() - 1;
  // Cumulative functionals are nondecreasing, so the first crossing is a
  // binary search.
  const double* first = total.data();
  const double* hit = std::lower_bound(first, first + m + 1, threshold);
  StoppingTime st;
  if (hit == first + m + 1) {
    st.index = g.steps();
    st.tau = g.horizon();
  } else {
    const auto i = static_cast<std::size_t>(hit - first);
    st.index = i * monitor_stride;
    st.tau = g.node(st.index);
    st.hit = true;
  }
  return st;
}

StoppedSolution stop(const EulerSolution& sol, double tau) {
  const TimeGrid& ng = sol.noise->grid();
  StoppedSolution s;
  s.tau_index = resolve(ng, tau);
  s.tau = ng.node(s.tau_index);
  s.frozen = interpolate_at(sol, s.tau_index);
  s.values = sol.values;
  for (Eigen::Index k = 0; k < s.values.size(); ++k) {
    if (static_cast<std::size_t>(k) * sol.stride > s.tau_index) s.values[k] = s.frozen;
  }
  s.base = sol;
  return s;
}

Eigen::VectorXd StoppedSolution::on_noise_grid() const {
  Eigen::VectorXd out = interpolate_on_noise_grid(base);
  out.tail(out.size() - static_cast<Eigen::Index>(tau_index)).setConstant(frozen);
  return out;
}

void SolverConfig::validate(double hurst, double beta) const {
  const double k = kappa(beta);
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  if (!(alpha > 1.0 - hurst && alpha < k)) {
    throw DomainError("alpha = " + num(alpha) + " must lie in (1 - H, kappa) = (" +
                      num(1.0 - hurst) + ", " + num(k) + ")");
  }
  if (!(eta > 0.0 && eta < k - alpha)) {
    throw DomainError("eta = " + num(eta) + " must lie in (0, kappa - alpha) = (0, " +
                      num(k - alpha) + ")");
  }
  if (!(epsilon > 0.0 && epsilon < k - alpha)) {
    throw DomainError("epsilon = " + num(epsilon) + " must lie in (0, kappa - alpha) = (0, " +
                      num(k - alpha) + ")");
  }
  if (!(threshold > 0.0)) throw DomainError("the localization threshold N must be positive");
  if (!(radius > 0.0)) throw DomainError("the restriction radius R must be positive");
}

}  // namespace mixsde
