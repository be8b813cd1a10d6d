// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "mixsde/convergence.hpp"
#include "mixsde/euler.hpp"
#include "mixsde/fbm.hpp"
#include "mixsde/fraccalc.hpp"
#include "mixsde/model.hpp"
#include "smooth_pairs.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace mixsde;
using Fn = SampledFunction<double>;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Worst |empirical - exact| / SE over all node pairs of n-step paths.
double worst_z(const FbmGenerator& gen, int paths, std::uint64_t seed,
               const std::function<double(double, double)>& exact) {
  const auto n = static_cast<Eigen::Index>(gen.grid().steps());
  Eigen::MatrixXd rows(paths, n);
  for (int p = 0; p < paths; ++p) {
    rows.row(p) =
        gen.sample(NormalStream(seed, fbm_stream(static_cast<std::uint64_t>(p)))).tail(n).transpose();
  }
  const auto est = testing::covariance_estimate(rows, rows);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double want = exact(gen.grid().node(i + 1), gen.grid().node(j + 1));
      worst = std::max(worst, std::abs(est.cov(i, j) - want) / est.se(i, j));
    }
  }
  return worst;
}

Outcome fbm_law() {
  std::string detail;
  bool pass = true;
  for (double h : {0.6, 0.7, 0.9}) {
    const FbmGenerator gen(TimeGrid(1.0, 64), HurstIndex(h), FbmMethod::circulant);
    const double z = worst_z(gen, 20000, 1, [h](double s, double t) {
      return fbm_covariance(s, t, h);
    });
    pass = pass && z <= 5.0;
    detail += "H=" + fmt("%.1f", h) + " worst " + fmt("%.2f", z) + " SE; ";
  }
  return {pass, detail + "bound 5 SE over 64x64 entries, M=20000"};
}

Outcome brownian_degeneracy() {
  const FbmGenerator gen(TimeGrid(1.0, 64), HurstIndex::oracle(0.5), FbmMethod::circulant);
  const double z = worst_z(gen, 20000, 2, [](double s, double t) { return std::min(s, t); });
  return {z <= 5.0, "worst " + fmt("%.2f", z) + " SE against min(s,t), M=20000"};
}

Outcome derivative_oracle() {
  double worst = 0.0;
  for (double gamma : {0.6, 0.9, 1.0}) {
    const Fn left = Fn::tabulate(0.0, 1.0, 4096, [&](double u) { return std::pow(u, gamma); });
    const Fn right =
        Fn::tabulate(0.0, 1.0, 4096, [&](double u) { return std::pow(std::max(1.0 - u, 0.0), gamma); });
    for (double alpha : {0.3, 0.4}) {
      for (double x : {0.125, 0.5, 0.75, 1.0}) {
        const double want = std::tgamma(gamma + 1) / std::tgamma(gamma + 1 - alpha) *
                            std::pow(x, gamma - alpha);
        worst = std::max(worst, testing::rel_err(left_derivative(left, alpha, x), want));
      }
      for (double x : {0.0, 0.25, 0.5, 0.875}) {
        const double want = std::tgamma(gamma + 1) / std::tgamma(gamma + alpha) *
                            std::pow(1.0 - x, gamma - 1 + alpha);
        worst = std::max(worst, testing::rel_err(right_derivative(right, alpha, x), want));
      }
    }
  }
  return {worst <= 1e-4, "worst relative error " + fmt("%.2e", worst) + " (bound 1e-4)"};
}

Outcome young_oracle() {
  const auto pairs = testing::smooth_pairs();
  double worst = 0.0;
  for (const auto& p : pairs) {
    const double want = testing::riemann_stieltjes_reference(p);
    const double got =
        young_integral(Fn::tabulate(p.a, p.b, 4096, p.f), Fn::tabulate(p.a, p.b, 4096, p.g), 0.3);
    worst = std::max(worst, testing::rel_err(got, want));
  }
  const TimeGrid grid(1.0, 4096);
  const FbmGenerator gen(grid, HurstIndex(0.7), FbmMethod::circulant);
  std::vector<double> errs;
  for (std::uint64_t p = 0; p < 100; ++p) {
    const Fn b = Fn::on_grid(grid, gen.sample(NormalStream(4, fbm_stream(p))));
    const double end = b.values()[4096];
    errs.push_back(testing::rel_err(young_integral(b, b, 0.35), 0.5 * end * end));
  }
  const double med = median(errs);
  return {pairs.size() >= 20 && worst <= 1e-4 && med <= 1e-2,
          std::to_string(pairs.size()) + " smooth pairs, worst " + fmt("%.2e", worst) +
              " (bound 1e-4); B dB median " + fmt("%.2e", med) + " over 100 paths (bound 1e-2)"};
}

Outcome exact_solution() {
  const double lambda = 0.5;
  auto zero = [](double, double) { return 0.0; };
  const auto coeffs = testing::coefficients(zero, zero, [=](double, double x) { return lambda * x; },
                                            [=](double, double) { return lambda; });
  const NoiseGenerator gen(TimeGrid(1.0, 4096), HurstIndex(0.7), Dependence{});
  std::vector<double> e8, e10, e12;
  for (std::uint64_t p = 0; p < 100; ++p) {
    const auto nz = std::make_shared<const NoisePair>(gen.sample(5, p));
    const double exact = std::exp(lambda * nz->bh.values[4096]);
    auto err = [&](std::size_t n) {
      const auto sol = euler_solve(coeffs, nz, 1.0, TimeGrid(1.0, n));
      return std::abs(sol.values[static_cast<Eigen::Index>(n)] - exact) / exact;
    };
    e8.push_back(err(256));
    e10.push_back(err(1024));
    e12.push_back(err(4096));
  }
  const double m8 = median(e8), m10 = median(e10), m12 = median(e12);
  return {m12 <= 0.05 && m10 < m8 && m12 < m10,
          "median relative error n=2^8 " + fmt("%.3e", m8) + ", 2^10 " + fmt("%.3e", m10) +
              ", 2^12 " + fmt("%.3e", m12) + " (bound 5e-2, strictly decreasing)"};
}

Outcome rate_floor(const ErrorReport& r) {
  bool monotone = true;
  for (std::size_t i = 1; i < r.levels.size(); ++i) {
    const auto& a = r.levels[i - 1];
    const auto& b = r.levels[i];
    monotone = monotone &&
               b.err2_norm2 <= a.err2_norm2 + 2.0 * std::hypot(a.se_norm2, b.se_norm2) &&
               b.err2_sup <= a.err2_sup + 2.0 * std::hypot(a.se_sup, b.se_sup);
  }
  const double r2 = r.fit_norm2.slope / 2.0, rs = r.fit_sup.slope / 2.0;
  return {!r.degenerate && r.rate_ok() && monotone,
          "rate norm2 " + fmt("%.3f", r2) + ", sup " + fmt("%.3f", rs) + " (floor " +
              fmt("%.2f", r.rate_floor()) + "), monotone within 2 SE: " +
              (monotone ? "yes" : "no") + ", M=" + std::to_string(r.setup.paths) +
              ", stopped " + fmt("%.4f", r.stopped_fraction)};
}

Outcome moment_monitor(const ErrorReport& r) {
  const double ratio = r.moment_ratio();
  return {ratio <= 2.0, "max/min of E||X||^2_{inf,alpha} over " + std::to_string(r.levels.size()) +
                            " levels = " + fmt("%.4f", ratio) + " (bound 2)"};
}

Outcome hypothesis_gate() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"linear", "additive", "bounded-smooth"}) {
    const bool ok = check_hypotheses(preset(name)).all_pass();
    pass = pass && ok;
    detail += std::string(name) + (ok ? " pass; " : " FAIL; ");
  }
  auto expect_failure = [&](const CoefficientSet& s, char id) {
    const auto r = check_hypotheses(s);
    const HypothesisResult* f = r.first_failure();
    const bool named = f != nullptr && f->id == id;
    pass = pass && named;
    detail += s.name + " fails (" + (f ? std::string(1, f->id) : std::string("none")) + "); ";
  };
  expect_failure(from_expressions("c=x^2", "0", "0.2", "x^2", "2*x", 1.0, 0.9), 'A');
  expect_failure(from_expressions("b=x", "0", "x", "0.3*x", "0.3", 1.0, 0.9), 'E');
  return {pass, detail + "expected (A) and (E)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome manifest_replay() {
  const fs::path root = fs::temp_directory_path() / "mixsde_acceptance_replay";
  fs::remove_all(root);
  struct Case {
    std::string name;
    std::string manifest;
  };
  const std::vector<Case> cases{
      {"linear", R"j({"paths": 1000, "seed": 3, "coefficients": {"preset": "linear"}})j"},
      {"smooth-volterra",
       R"j({"paths": 400, "seed": 9, "fine_steps": 2048, "levels": [16, 32, 64, 128],
           "dependence": {"mode": "volterra"}, "coefficients": {"preset": "bounded-smooth"}})j"},
      {"expressions",
       R"j({"paths": 400, "seed": 1, "fine_steps": 1024, "levels": [8, 16, 32, 64],
           "monitor_nodes": 128, "coefficients": {"a": "-0.5*x", "b": "0.3", "c": "0.2*sin(x)",
           "dc": "0.2*cos(x)", "name": "mean-reverting"}})j"},
  };
  std::string detail;
  bool pass = true;
  for (const auto& c : cases) {
    const fs::path dir = root / c.name;
    fs::create_directories(dir);
    std::ofstream(dir / "input.json") << c.manifest;
    std::ostringstream out, err;
    const int first = cli::run({"converge", "--manifest", (dir / "input.json").string(),
                                "--out-dir", dir.string(), "--prefix", "run", "--workers", "1"},
                               out, err);
    std::vector<std::pair<fs::path, std::string>> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().filename() != "input.json") files.emplace_back(e.path(), slurp(e.path()));
    }
    const int second = cli::run({"converge", "--manifest", (dir / "run_manifest.json").string(),
                                 "--workers", "3"},
                                out, err);
    bool same = first == 0 && second == 0 && files.size() == 5;
    for (const auto& [path, bytes] : files) same = same && slurp(path) == bytes;
    pass = pass && same;
    detail += c.name + (same ? " identical; " : " DIFFERS (exit " + std::to_string(first) + "/" +
                                                    std::to_string(second) + "); ");
  }
  return {pass, detail + "5 files each, workers 1 vs 3"};
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failures = 0;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& body) {
    const auto start = clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("criterion %d [%s] %s: %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "fBm law", fbm_law);
  report(2, "H = 1/2 degeneracy", brownian_degeneracy);
  report(3, "fractional derivative oracle", derivative_oracle);
  report(4, "Young integral oracle", young_oracle);
  report(5, "exact solution of the linear fBm equation", exact_solution);

  ErrorReport linear;
  bool have_linear = false;
  report(6, "strong rate floor", [&] {
    ConvergenceSetup setup;  // H 0.7, alpha 0.35, eps 0.05, levels 2^4..2^8, fine 2^12, M 10^4
    linear = mc_strong_error(preset("linear"), setup);
    have_linear = true;
    return rate_floor(linear);
  });
  report(7, "moment stability across levels", [&] {
    return have_linear ? moment_monitor(linear) : Outcome{false, "criterion 6 did not run"};
  });
  report(8, "hypothesis gate", hypothesis_gate);
  report(9, "manifest replay", manifest_replay);

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
