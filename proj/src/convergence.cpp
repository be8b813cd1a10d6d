#include "mixsde/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "mixsde/errors.hpp"
#include "mixsde/fraccalc.hpp"
#include "mixsde/parallel.hpp"

namespace mixsde {
namespace {

bool is_power_of_two(std::size_t v) noexcept { return v != 0 && (v & (v - 1)) == 0; }

// Mean and standard error of the mean, both reduced pairwise in input order.
std::pair<double, double> mean_se(const std::vector<double>& v) {
  const std::size_t m = v.size();
  if (m == 0) return {0.0, 0.0};
  const double mean = pairwise_sum(v) / static_cast<double>(m);
  if (m < 2) return {mean, 0.0};
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(m - 1);
  return {mean, std::sqrt(var / static_cast<double>(m))};
}

enum class Fate : unsigned char { retained, discarded, aborted };

struct PathLevel {
  double err2_norm2 = 0.0;
  double err2_sup = 0.0;
  double moment = 0.0;
  double comparison = 0.0;
  double increment = 0.0;
  Fate fate = Fate::aborted;
};

struct PathInfo {
  double tau = 0.0;
  bool hit = false;
  bool fine_aborted = false;
  /// max |X^mu|^2 over the stopped fine path
  double fine_sup2 = 0.0;
};

// Relative size below which a pathwise error is indistinguishable from
// rounding in the two recursions (about 4500 ulp of the state).
constexpr double kRoundoff = 1e-12;

void freeze_after(Eigen::VectorXd& v, std::size_t index) {
  const auto i = static_cast<Eigen::Index>(index);
  v.tail(v.size() - i).setConstant(v[i]);
}

}  // namespace

PathwiseError pathwise_error(const StoppedSolution& coarse, const StoppedSolution& fine,
                             double alpha) {
  const auto& cn = coarse.base.noise;
  const auto& fn = fine.base.noise;
  if (!cn || !fn) throw CouplingError("pathwise_error: solution without noise");
  if (!(cn->provenance == fn->provenance) || !(cn->grid() == fn->grid())) {
    throw CouplingError("pathwise_error: the solutions are driven by different noise realizations");
  }
  if (!fine.base.grid.refines(coarse.base.grid)) {
    throw CouplingError("pathwise_error: the fine grid does not refine the coarse grid");
  }
  if (coarse.tau_index != fine.tau_index) {
    throw CouplingError("pathwise_error: the solutions are stopped at different times");
  }
  const Eigen::VectorXd c = coarse.on_noise_grid();
  const Eigen::VectorXd f = fine.on_noise_grid();
  const std::size_t stride = fine.base.stride;
  const auto n = static_cast<Eigen::Index>(fine.base.grid.steps());
  Eigen::VectorXd diff(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    const Eigen::Index j = i * static_cast<Eigen::Index>(stride);
    diff[i] = c[j] - f[j];
  }
  const AlphaNorms<double> norms(alpha, 0.0, fine.base.grid.step(), n);
  const Eigen::VectorXd br = norms.brackets(diff);
  PathwiseError e;
  e.sup = diff.cwiseAbs().maxCoeff();
  e.norm_inf = br.maxCoeff();
  e.norm2 = norms.two_norm_from_brackets(br);
  return e;
}

void ConvergenceSetup::validate() const {
  HurstIndex h(hurst);
  (void)h;
  if (!(horizon > 0.0)) throw DomainError("horizon T must be positive");
  if (levels.empty()) throw DomainError("at least one coarse level is required");
  if (paths == 0) throw DomainError("the path count M must be positive");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::size_t n = levels[i];
    if (n == 0 || n >= fine_steps || fine_steps % n != 0 || !is_power_of_two(fine_steps / n)) {
      throw DomainError("level n = " + std::to_string(n) +
                        " must be a dyadic refinement divisor of the fine level " +
                        std::to_string(fine_steps));
    }
    if (i > 0 && n <= levels[i - 1]) throw DomainError("levels must be strictly increasing");
  }
  if (monitor_nodes == 0 || fine_steps % monitor_nodes != 0) {
    throw DomainError("monitor_nodes must divide the fine step count");
  }
  if (monitor_nodes < 8) throw DomainError("monitor_nodes must be at least 8");
}

double ErrorReport::rate_floor() const noexcept {
  return kappa - setup.config.alpha - setup.config.epsilon;
}

bool ErrorReport::rate_ok() const noexcept {
  if (degenerate) return false;
  return fit_norm2.slope / 2.0 >= rate_floor() && fit_sup.slope / 2.0 >= rate_floor();
}

double ErrorReport::moment_ratio() const noexcept {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& l : levels) {
    if (l.flagged) continue;
    lo = std::min(lo, l.moment_inf_alpha);
    hi = std::max(hi, l.moment_inf_alpha);
  }
  if (!(lo > 0.0)) return lo == hi ? 1.0 : std::numeric_limits<double>::infinity();
  return hi / lo;
}

ErrorReport mc_strong_error(const CoefficientSet& coeffs, const ConvergenceSetup& setup) {
  setup.validate();
  setup.config.validate(setup.hurst, coeffs.beta);

  const TimeGrid fine_grid(setup.horizon, setup.fine_steps);
  const NoiseGenerator generator(fine_grid, HurstIndex(setup.hurst), setup.dependence,
                                 setup.method);
  const AlphaNorms<double> norms(setup.config.alpha, 0.0, fine_grid.step(),
                                 static_cast<Eigen::Index>(setup.fine_steps));
  const double comparison = norm_comparison_constant(setup.config.alpha, 0.0, setup.horizon);
  const std::size_t monitor_stride = setup.fine_steps / setup.monitor_nodes;
  const std::size_t L = setup.levels.size();
  const double eta = setup.config.eta;

  std::vector<PathInfo> info(setup.paths);
  std::vector<PathLevel> cells(setup.paths * L);

  parallel_for(setup.paths, setup.workers, [&](std::size_t p) {
    const NoisePair nz = generator.sample(setup.seed, p);
    const Eigen::VectorXd& w = nz.w.values;
    const Eigen::VectorXd& bh = nz.bh.values;
    const Eigen::VectorXd K = functional_series(nz, eta, setup.functional, monitor_stride);
    const StoppingTime st = stopping_time(nz, eta, setup.config.threshold, setup.functional,
                                          monitor_stride);
    info[p].tau = st.tau;
    info[p].hit = st.hit;

    Eigen::VectorXd xf;
    try {
      euler_values(coeffs, fine_grid, w, bh, 1, setup.x0, xf);
    } catch (const NumericalError&) {
      info[p].fine_aborted = true;
      return;
    }
    const double fine_norm = norms.inf_norm(xf);
    Eigen::VectorXd xf_stopped = xf;
    freeze_after(xf_stopped, st.index);
    info[p].fine_sup2 = xf_stopped.size() > 0 ? xf_stopped.cwiseAbs2().maxCoeff() : 0.0;

    Eigen::VectorXd xc, xi, diff;
    for (std::size_t l = 0; l < L; ++l) {
      PathLevel& out = cells[p * L + l];
      const std::size_t stride = setup.fine_steps / setup.levels[l];
      try {
        euler_values(coeffs, fine_grid, w, bh, stride, setup.x0, xc);
      } catch (const NumericalError&) {
        out.fate = Fate::aborted;
        continue;
      }
      interpolate_on_noise_grid(coeffs, fine_grid, w, bh, stride, xc, xi);

      // Increment ratio on off-node points up to tau.
      double inc = 0.0;
      for (std::size_t j = 1; j <= st.index; ++j) {
        if (j % stride == 0) continue;
        const std::size_t k = j / stride;
        const double ks = K[static_cast<Eigen::Index>((j + monitor_stride - 1) / monitor_stride)];
        if (!(ks > 0.0)) continue;
        const double lag = fine_grid.node(j) - fine_grid.node(k * stride);
        const double xk = xc[static_cast<Eigen::Index>(k)];
        const double r = std::abs(xi[static_cast<Eigen::Index>(j)] - xk) /
                         (ks * std::pow(lag, 0.5 - eta) * (1.0 + std::abs(xk)));
        inc = std::max(inc, r);
      }
      out.increment = inc;

      const Eigen::VectorXd br = norms.brackets(xi);
      const double coarse_norm = br.maxCoeff();
      double moment = coarse_norm;
      if (st.index < setup.fine_steps) {
        freeze_after(xi, st.index);
        moment = norms.inf_norm(xi);
      }
      out.moment = moment * moment;

      diff = xi - xf_stopped;
      const double sup = diff.cwiseAbs().maxCoeff();
      const Eigen::VectorXd bd = norms.brackets(diff);
      const double n2 = norms.two_norm_from_brackets(bd);
      const double ninf = bd.maxCoeff();
      out.err2_sup = sup * sup;
      out.err2_norm2 = n2 * n2;
      out.comparison = ninf > 0.0 ? n2 / (comparison * ninf) : 0.0;
      out.fate = coarse_norm + fine_norm <= setup.config.radius ? Fate::retained : Fate::discarded;
    }
  });

  ErrorReport report;
  report.setup = setup;
  report.coefficients = coeffs.name;
  report.kappa = kappa(coeffs.beta);
  report.fine_delta = fine_grid.step();

  std::vector<double> taus, scale;
  taus.reserve(setup.paths);
  std::size_t stopped = 0;
  for (const auto& i : info) {
    taus.push_back(i.tau);
    if (!i.fine_aborted) scale.push_back(i.fine_sup2);
    if (i.tau < setup.horizon) ++stopped;
    if (i.fine_aborted) ++report.aborted_fine;
  }
  report.stopped_fraction = static_cast<double>(stopped) / static_cast<double>(setup.paths);
  report.mean_tau = pairwise_sum(taus) / static_cast<double>(setup.paths);
  const double mean_sup2 =
      scale.empty() ? 0.0 : pairwise_sum(scale) / static_cast<double>(scale.size());
  report.rounding_floor = kRoundoff * kRoundoff * std::max(1.0, mean_sup2);

  double restricted_sum = 0.0;
  std::size_t restricted_levels = 0;
  for (std::size_t l = 0; l < L; ++l) {
    LevelStats s;
    s.steps = setup.levels[l];
    s.delta = setup.horizon / static_cast<double>(s.steps);
    std::vector<double> e2n, e2s, mom;
    for (std::size_t p = 0; p < setup.paths; ++p) {
      const PathLevel& c = cells[p * L + l];
      if (info[p].fine_aborted || c.fate == Fate::aborted) {
        ++s.aborted;
        continue;
      }
      mom.push_back(c.moment);
      s.max_increment_ratio = std::max(s.max_increment_ratio, c.increment);
      if (c.fate == Fate::discarded) {
        ++s.discarded;
        continue;
      }
      ++s.retained;
      e2n.push_back(c.err2_norm2);
      e2s.push_back(c.err2_sup);
      s.max_comparison_ratio = std::max(s.max_comparison_ratio, c.comparison);
    }
    std::tie(s.err2_norm2, s.se_norm2) = mean_se(e2n);
    std::tie(s.err2_sup, s.se_sup) = mean_se(e2s);
    std::tie(s.moment_inf_alpha, s.moment_se) = mean_se(mom);
    s.flagged = s.retained == 0;
    if (s.retained + s.discarded > 0) {
      restricted_sum +=
          static_cast<double>(s.retained) / static_cast<double>(s.retained + s.discarded);
      ++restricted_levels;
    }
    report.levels.push_back(s);
  }
  report.restricted_fraction =
      restricted_levels ? restricted_sum / static_cast<double>(restricted_levels) : 0.0;

  const double floor = report.rounding_floor;
  const bool all_zero = std::all_of(report.levels.begin(), report.levels.end(), [](const auto& s) {
    return s.err2_norm2 == 0.0 && s.err2_sup == 0.0;
  });
  const bool all_rounding =
      std::all_of(report.levels.begin(), report.levels.end(), [floor](const auto& s) {
        return s.err2_norm2 <= floor && s.err2_sup <= floor;
      });
  if (all_zero || all_rounding) {
    report.degenerate = true;
    report.note = all_zero ? "degenerate: every error is zero, rate fit skipped"
                           : "degenerate: every error is at rounding level, rate fit skipped";
    return report;
  }
  try {
    report.fit_norm2 = fit_rate(report, ErrorFunctional::norm2);
    report.fit_sup = fit_rate(report, ErrorFunctional::sup);
  } catch (const DomainError& e) {
    report.degenerate = true;
    report.note = std::string("degenerate: ") + e.what();
  }
  return report;
}

RateFit fit_rate(const std::vector<double>& delta, const std::vector<double>& err2) {
  if (delta.size() != err2.size()) throw DomainError("fit_rate: size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (err2[i] > 0.0 && delta[i] > 0.0 && std::isfinite(err2[i])) {
      x.push_back(std::log(delta[i]));
      y.push_back(std::log(err2[i]));
    }
  }
  const std::size_t m = x.size();
  if (m < 3) {
    throw DomainError("fit_rate: fewer than 3 levels with positive error (" + std::to_string(m) +
                      ")");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_rate: all levels share one delta");
  RateFit fit;
  fit.used = m;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += r * r;
  }
  fit.stderr_slope = m > 2 ? std::sqrt(ssr / static_cast<double>(m - 2) / sxx) : 0.0;
  return fit;
}

RateFit fit_rate(const ErrorReport& report, ErrorFunctional which) {
  std::vector<double> delta, err2;
  for (const auto& l : report.levels) {
    if (l.flagged) continue;
    const double e = which == ErrorFunctional::norm2 ? l.err2_norm2 : l.err2_sup;
    if (e <= report.rounding_floor) continue;
    delta.push_back(l.delta);
    err2.push_back(e);
  }
  return fit_rate(delta, err2);
}

}  // namespace mixsde
