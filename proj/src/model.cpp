#include "mixsde/model.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

#include "mixsde/errors.hpp"
#include "mixsde/expr.hpp"
#include "mixsde/parallel.hpp"
#include "mixsde/rng.hpp"

namespace mixsde {
namespace {

CoefficientSet make(std::string name, CoefficientFn a, CoefficientFn b, CoefficientFn c,
                    CoefficientFn dc, double K, double beta) {
  CoefficientSet s;
  s.name = std::move(name);
  s.a = std::move(a);
  s.b = std::move(b);
  s.c = std::move(c);
  s.dc = std::move(dc);
  s.K = K;
  s.beta = beta;
  return s;
}

// Radical inverse of k in the given base.
double halton(std::uint64_t k, unsigned base) noexcept {
  double f = 1.0, r = 0.0;
  while (k > 0) {
    f /= base;
    r += f * static_cast<double>(k % base);
    k /= base;
  }
  return r;
}

constexpr unsigned kBases[] = {2, 3, 5, 7, 11, 13, 17};
constexpr std::uint64_t kCheckerStream = 0x6879706f74686573ULL;

struct Sampler {
  const CheckDomain& d;
  double shift[7];

  explicit Sampler(const CheckDomain& domain) : d(domain) {
    const NormalStream u(domain.seed, kCheckerStream);
    for (int i = 0; i < 7; ++i) shift[i] = u.uniform(static_cast<std::uint64_t>(i));
  }

  double point(std::size_t k, int dim) const noexcept {
    const double v = halton(k + 1, kBases[dim]) + shift[dim];
    return v - std::floor(v);
  }

  double separation(double u) const noexcept {
    return d.min_separation * std::pow(d.max_separation / d.min_separation, u);
  }

  void time(std::size_t i, double& t, double& s) const noexcept {
    if (i == 0) {
      t = d.t_min;
    } else if (i == 1) {
      t = d.t_max;
    } else {
      t = d.t_min + (d.t_max - d.t_min) * point(i, 0);
    }
    const double dt = separation(point(i, 1));
    s = point(i, 2) < 0.5 ? t - dt : t + dt;
    if (s < d.t_min || s > d.t_max) s = (s < d.t_min) ? t + dt : t - dt;
    if (s < d.t_min) s = d.t_min;
    if (s > d.t_max) s = d.t_max;
  }

  void state(std::size_t j, double& x, double& y) const noexcept {
    constexpr std::size_t kAnchors = 5;
    if (j < kAnchors) {
      const double anchors[kAnchors] = {0.0, 1.0, -1.0, d.x_max, -d.x_max};
      x = anchors[j];
    } else {
      const double u = point(j, 3);
      const double sign = point(j, 4) < 0.5 ? -1.0 : 1.0;
      if (j % 2 == 0) {
        x = d.x_core * (2.0 * u - 1.0);
      } else {
        x = sign * d.x_core * std::pow(d.x_max / d.x_core, u);
      }
    }
    const double dx = separation(point(j, 5));
    y = point(j, 6) < 0.5 ? x - dx : x + dx;
  }
};

const char* const kNames[5] = {
    "linear growth of a and c",
    "Lipschitz continuity of a and b in x",
    "Hoelder continuity in time",
    "Lipschitz continuity of dc in x",
    "boundedness of b and dc",
};

void record(HypothesisResult& r, double ratio, const Witness& w) noexcept {
  if (!std::isfinite(ratio)) {
    if (!r.non_finite) {
      r.non_finite = true;
      r.worst_ratio = std::numeric_limits<double>::infinity();
      r.witness = w;
    }
    return;
  }
  if (!r.non_finite && ratio > r.worst_ratio) {
    r.worst_ratio = ratio;
    r.witness = w;
  }
}

void merge(HypothesisResult& into, const HypothesisResult& from) noexcept {
  if (from.non_finite) {
    if (!into.non_finite) into = from;
  } else if (!into.non_finite && from.worst_ratio > into.worst_ratio) {
    into.worst_ratio = from.worst_ratio;
    into.witness = from.witness;
  }
}

std::array<HypothesisResult, 5> blank_results() {
  std::array<HypothesisResult, 5> r;
  for (int h = 0; h < 5; ++h) {
    r[h].id = static_cast<char>('A' + h);
    r[h].name = kNames[h];
  }
  return r;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"linear", "additive", "bounded-smooth", "zero", "quadratic-c", "linear-b"};
}

CoefficientSet preset(const std::string& name) {
  if (name == "linear") {
    return make(
        name, [](double, double x) { return 0.1 * x; }, [](double, double) { return 0.2; },
        [](double, double x) { return 0.3 * x; }, [](double, double) { return 0.3; }, 1.0, 0.9);
  }
  if (name == "additive") {
    return make(
        name, [](double, double) { return 0.1; }, [](double, double) { return 0.2; },
        [](double, double) { return 0.3; }, [](double, double) { return 0.0; }, 1.0, 0.9);
  }
  if (name == "bounded-smooth") {
    // Time enters through 1-Lipschitz terms with small amplitude, which are
    // also 0.9-Hoelder with constant 1 on any horizon up to 1.
    return make(
        name,
        [](double t, double x) { return 0.2 * std::sin(x) + 0.1 * std::cos(t); },
        [](double t, double x) { return 0.3 + 0.1 * std::sin(t) * std::cos(x); },
        [](double t, double x) { return 0.4 * std::sin(x) + 0.1 * std::sin(t); },
        [](double, double x) { return 0.4 * std::cos(x); }, 1.0, 0.9);
  }
  if (name == "zero") {
    auto z = [](double, double) { return 0.0; };
    return make(name, z, z, z, z, 1.0, 0.9);
  }
  if (name == "quadratic-c") {
    return make(
        name, [](double, double) { return 0.0; }, [](double, double) { return 0.2; },
        [](double, double x) { return x * x; }, [](double, double x) { return 2.0 * x; }, 1.0,
        0.9);
  }
  if (name == "linear-b") {
    return make(
        name, [](double, double) { return 0.0; }, [](double, double x) { return x; },
        [](double, double x) { return 0.3 * x; }, [](double, double) { return 0.3; }, 1.0, 0.9);
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw DomainError("unknown coefficient preset '" + name + "' (known: " + known + ")");
}

CoefficientSet from_expressions(const std::string& name, const std::string& a,
                                const std::string& b, const std::string& c,
                                const std::string& dc, double K, double beta) {
  auto wrap = [](const std::string& text) -> CoefficientFn {
    auto e = std::make_shared<const Expression>(Expression::parse(text));
    return [e](double t, double x) { return (*e)(t, x); };
  };
  CoefficientSet s = make(name, wrap(a), wrap(b), wrap(c), wrap(dc), K, beta);
  s.expressions = {a, b, c, dc};
  return s;
}

double kappa(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("kappa: beta must lie in (0, 1)");
  return std::min(0.5, beta);
}

void check_beta(double beta, double hurst) {
  if (!(beta > 1.0 - hurst && beta < 1.0)) {
    throw DomainError("beta = " + fmt(beta) + " must lie in (1 - H, 1) = (" + fmt(1.0 - hurst) +
                      ", 1)");
  }
}

bool HypothesisReport::all_pass() const noexcept { return first_failure() == nullptr; }

const HypothesisResult* HypothesisReport::first_failure() const noexcept {
  for (const auto& r : results) {
    if (!r.pass) return &r;
  }
  return nullptr;
}

std::string HypothesisReport::summary() const {
  std::ostringstream out;
  out << "hypotheses for '" << coefficients << "' with K = " << fmt(K)
      << ", beta = " << fmt(beta) << " over " << samples << " sampled tuples\n";
  for (const auto& r : results) {
    out << "  (" << r.id << ") " << r.name << ": " << (r.pass ? "pass" : "FAIL");
    if (r.non_finite) {
      out << "  non-finite coefficient value";
    } else {
      out << "  worst ratio " << fmt(r.worst_ratio) << (r.pass ? " <= K" : " > K");
    }
    out << "  at t=" << fmt(r.witness.t) << " s=" << fmt(r.witness.s) << " x=" << fmt(r.witness.x)
        << " y=" << fmt(r.witness.y) << "\n";
  }
  out << "  a pass is evidence on the sample only, not a proof";
  return out.str();
}

HypothesisReport check_hypotheses(const CoefficientSet& coeffs, const CheckDomain& domain) {
  if (domain.time_samples < 100 || domain.state_samples < 100) {
    throw DomainError("check_hypotheses: need at least 100 samples per axis");
  }
  if (!(domain.t_max > domain.t_min) || !(domain.x_max > domain.x_core) ||
      !(domain.x_core > 0.0) || !(domain.min_separation > 0.0) ||
      !(domain.max_separation > domain.min_separation)) {
    throw DomainError("check_hypotheses: malformed sampling domain");
  }
  if (!coeffs.a || !coeffs.b || !coeffs.c || !coeffs.dc) {
    throw DomainError("check_hypotheses: coefficient set '" + coeffs.name + "' is incomplete");
  }
  const Sampler sampler(domain);
  const double K = coeffs.K;
  const double beta = coeffs.beta;

  std::vector<std::array<HypothesisResult, 5>> rows(domain.time_samples, blank_results());
  parallel_for(domain.time_samples, domain.workers, [&](std::size_t i) {
    auto& r = rows[i];
    double t, s;
    sampler.time(i, t, s);
    const double dt = std::abs(s - t);
    for (std::size_t j = 0; j < domain.state_samples; ++j) {
      double x, y;
      sampler.state(j, x, y);
      const Witness w{t, s, x, y};
      const double a = coeffs.a(t, x), b = coeffs.b(t, x);
      const double c = coeffs.c(t, x), dc = coeffs.dc(t, x);
      const double dx = std::abs(y - x);

      record(r[0], (std::abs(a) + std::abs(c)) / (1.0 + std::abs(x)), w);
      if (dx > 0.0) {
        record(r[1], (std::abs(a - coeffs.a(t, y)) + std::abs(b - coeffs.b(t, y))) / dx, w);
        record(r[3], std::abs(dc - coeffs.dc(t, y)) / dx, w);
      }
      if (dt > 0.0) {
        const double num = std::abs(a - coeffs.a(s, x)) + std::abs(b - coeffs.b(s, x)) +
                           std::abs(c - coeffs.c(s, x)) + std::abs(dc - coeffs.dc(s, x));
        record(r[2], num / std::pow(dt, beta), w);
      }
      record(r[4], std::abs(b) + std::abs(dc), w);
    }
  });

  HypothesisReport report;
  report.coefficients = coeffs.name;
  report.K = K;
  report.beta = beta;
  report.samples = domain.time_samples * domain.state_samples;
  report.results = blank_results();
  for (const auto& row : rows) {
    for (int h = 0; h < 5; ++h) merge(report.results[h], row[h]);
  }
  for (auto& r : report.results) r.pass = !r.non_finite && r.worst_ratio <= K;
  return report;
}

}  // namespace mixsde
