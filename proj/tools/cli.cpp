#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixsde/csv.hpp"
#include "mixsde/errors.hpp"
#include "mixsde/euler.hpp"
#include "mixsde/expr.hpp"
#include "mixsde/fbm.hpp"
#include "mixsde/fraccalc.hpp"
#include "mixsde/report_io.hpp"

namespace mixsde::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Raised for a usage problem detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return format_double(v); }

std::string functional_name(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::wiener: return "wiener";
    case FunctionalKind::fbm: return "fbm";
    case FunctionalKind::sum: return "sum";
  }
  return "sum";
}

/// Flag > manifest > environment > current directory.
std::string output_dir(const std::string& flag, const std::string& manifest) {
  std::string dir = flag;
  if (dir.empty()) dir = manifest;
  if (dir.empty()) {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) dir = env;
  }
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

std::string join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

// ---------------------------------------------------------------------------
// Shared option groups

struct NoiseOptions {
  double hurst = 0.7;
  std::size_t steps = 256;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::string method = "circulant";
  std::string dependence = "independent";
  double rho = 0.0;

  void add(CLI::App& app, std::size_t default_steps) {
    steps = default_steps;
    app.add_option("--h,--hurst", hurst, "Hurst index H, in (1/2, 1)")->capture_default_str();
    app.add_option("--n,--steps", steps, "number of grid steps n >= 1")->capture_default_str();
    app.add_option("--t,--horizon", horizon, "horizon T > 0")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed, any 64-bit unsigned integer")
        ->capture_default_str();
    app.add_option("--method", method, "fBm sampler: circulant | cholesky (n <= 8192)")
        ->capture_default_str();
    app.add_option("--dependence", dependence,
                   "W/B^H dependence: independent | volterra | joint-gaussian (n <= 2048)")
        ->capture_default_str();
    app.add_option("--rho", rho, "correlation parameter of joint-gaussian mode, in [-1, 1]")
        ->capture_default_str();
  }

  Dependence dependence_spec() const {
    Dependence d;
    d.mode = parse_dependence(dependence);
    d.rho = rho;
    if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("--rho must lie in [-1, 1]");
    return d;
  }

  TimeGrid grid() const {
    if (steps == 0) throw DomainError("--n must be at least 1");
    if (!(horizon > 0.0)) throw DomainError("--t must be positive");
    return TimeGrid(horizon, steps);
  }
};

struct CoefficientOptions {
  std::string preset = "linear";
  std::string a, b, c, dc, name;
  CLI::Option* preset_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  double K = 1.0;
  double beta = 0.9;

  void add(CLI::App& app) {
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : " | ") + n;
    preset_opt = app.add_option("--preset", preset, "coefficient preset: " + names)
                     ->capture_default_str();
    app.add_option("--a", a, "drift a(t, x) as an expression in t and x");
    app.add_option("--b", b, "Wiener coefficient b(t, x)");
    app.add_option("--c", c, "fBm coefficient c(t, x)");
    app.add_option("--dc", dc, "d/dx c(t, x), supplied by the user");
    app.add_option("--name", name, "label for expression coefficients");
    k_opt = app.add_option("--K", K, "hypothesis constant K > 0 (overrides the preset's)");
    beta_opt = app.add_option("--beta", beta,
                              "time-Hoelder exponent beta, in (1 - H, 1) (overrides the preset's)");
  }

  bool expressions_given() const { return !(a.empty() && b.empty() && c.empty() && dc.empty()); }

  void check_complete() const {
    if (expressions_given() && (a.empty() || b.empty() || c.empty() || dc.empty())) {
      throw UsageError("--a, --b, --c and --dc must be given together");
    }
    if (expressions_given() && preset_opt->count() > 0) {
      throw UsageError("give either --preset or --a/--b/--c/--dc, not both");
    }
  }

  CoefficientSet build() const {
    check_complete();
    CoefficientSet s = expressions_given()
                           ? from_expressions(name.empty() ? "expressions" : name, a, b, c, dc,
                                              K, beta)
                           : mixsde::preset(preset);
    if (k_opt->count() > 0) s.K = K;
    if (beta_opt->count() > 0) s.beta = beta;
    if (!(s.K > 0.0)) throw DomainError("--K must be positive");
    return s;
  }
};

// ---------------------------------------------------------------------------
// fbm

struct FbmCommand {
  NoiseOptions noise;
  bool pair = false;
  std::size_t paths = 1;
  double eta = 0.25;
  std::string output;
  std::string out_dir;

  void add(CLI::App& app) {
    noise.add(app, 256);
    app.add_flag("--pair", pair, "write (W, B^H) pairs with columns t,w,bh");
    app.add_option("--paths", paths, "number of paths, >= 1 (path p uses RNG stream p)")
        ->capture_default_str();
    app.add_option("--eta", eta, "eta of the reported Hoelder functional, in (0, min(H, 1/2))")
        ->capture_default_str();
    app.add_option("--output", output, "output CSV (single path only)");
    app.add_option("--out-dir", out_dir, "output directory (default $MIXSDE_OUTPUT_DIR or .)");
  }

  int run(std::ostream& out) const {
    const HurstIndex h(noise.hurst);
    const TimeGrid grid = noise.grid();
    if (paths == 0) throw DomainError("--paths must be at least 1");
    if (!output.empty() && paths > 1) throw UsageError("--output needs --paths 1");
    const double eta_max = std::min(h.value(), pair ? 0.5 : 1.0);
    if (!(eta > 0.0 && eta < eta_max)) {
      throw DomainError("--eta must lie in (0, " + num(eta_max) + ")");
    }
    const FbmMethod method = parse_fbm_method(noise.method);
    const std::string dir = output.empty() ? output_dir(out_dir, "") : "";
    auto target = [&](std::size_t p) {
      if (!output.empty()) return output;
      std::string file = std::string(pair ? "pair" : "fbm") + "_seed" + std::to_string(noise.seed);
      if (paths > 1) file += "_path" + std::to_string(p);
      return join(dir, file + ".csv");
    };
    if (pair) {
      const NoiseGenerator gen(grid, h, noise.dependence_spec(), method);
      for (std::size_t p = 0; p < paths; ++p) {
        const NoisePair nz = gen.sample(noise.seed, p);
        const std::string file = target(p);
        write_pair_csv(file, nz);
        out << file << ": W in [" << num(nz.w.values.minCoeff()) << ", "
            << num(nz.w.values.maxCoeff()) << "], B^H in [" << num(nz.bh.values.minCoeff())
            << ", " << num(nz.bh.values.maxCoeff()) << "]";
        if (grid.steps() >= 7) {
          out << ", K^W = " << num(holder_functional(nz.w, eta, grid.horizon()).value)
              << ", K^B = " << num(holder_functional(nz.bh, eta, grid.horizon()).value);
        }
        out << "\n";
      }
      return Exit::ok;
    }
    const FbmGenerator gen(grid, h, method);
    for (std::size_t p = 0; p < paths; ++p) {
      const NoisePath path{grid, gen.sample(NormalStream(noise.seed, fbm_stream(p))),
                           ProcessKind::fbm, h.value()};
      const std::string file = target(p);
      write_path_csv(file, path);
      out << file << ": min " << num(path.values.minCoeff()) << ", max "
          << num(path.values.maxCoeff());
      if (grid.steps() >= 7) {
        out << ", K^B(eta=" << num(eta)
            << ") = " << num(holder_functional(path, eta, grid.horizon()).value);
      }
      out << "\n";
    }
    return Exit::ok;
  }
};

// ---------------------------------------------------------------------------
// integrate

SampledFunction<double> load_sampled(const std::string& file, const std::string& column) {
  const CsvTable table = read_csv(file);
  if (table.header.size() < 2) throw DomainError("'" + file + "' needs a t column and a value column");
  const Eigen::VectorXd& t = table.column(table.header[0] == "t" ? "t" : table.header[0]);
  std::string col = column;
  if (col.empty()) {
    for (const auto& h : table.header) {
      if (h != table.header[0]) {
        col = h;
        break;
      }
    }
  }
  const Eigen::VectorXd& v = table.column(col);
  const Eigen::Index n = t.size() - 1;
  if (n < 1) throw DomainError("'" + file + "' needs at least two rows");
  const double h = (t[n] - t[0]) / static_cast<double>(n);
  if (!(h > 0.0)) throw DomainError("'" + file + "': t must increase");
  const double tol = 1e-9 * std::max({1.0, std::abs(t[0]), std::abs(t[n])});
  for (Eigen::Index k = 0; k <= n; ++k) {
    if (std::abs(t[k] - (t[0] + static_cast<double>(k) * h)) > tol) {
      throw DomainError("'" + file + "': t is not uniformly spaced (row " + std::to_string(k + 2) +
                        ")");
    }
    if (!std::isfinite(v[k])) throw DomainError("'" + file + "': non-finite value");
  }
  return SampledFunction<double>(t[0], h, v);
}

struct IntegrateCommand {
  std::string f = "one";
  std::string g;
  std::string f_column, g_column;
  double alpha = 0.35;
  int points = 8;
  double holder = 1.0;

  void add(CLI::App& app) {
    app.add_option("--f", f,
                   "integrand: 'one', a CSV file (t,value) on the grid of g, or an expression "
                   "in t (x is an alias of t)")
        ->capture_default_str();
    app.add_option("--g", g, "integrator CSV with a uniform t column")->required();
    app.add_option("--f-column", f_column, "value column of the f CSV (default: second)");
    app.add_option("--g-column", g_column, "value column of the g CSV (default: second)");
    app.add_option("--alpha", alpha,
                   "fractional order alpha in (0, 1); for an fBm integrator use (1 - H, 1/2)")
        ->capture_default_str();
    app.add_option("--points", points, "Gauss points per cell, >= 1")->capture_default_str();
    app.add_option("--holder", holder,
                   "Hoelder exponent of g in (0, 1], only used to warn about alpha")
        ->capture_default_str();
  }

  int run(std::ostream& out, std::ostream& err) const {
    const SampledFunction<double> gs = load_sampled(g, g_column);
    SampledFunction<double> fs = gs;
    if (f == "one") {
      fs = SampledFunction<double>(gs.lower(), gs.spacing(),
                                   Eigen::VectorXd::Ones(gs.values().size()));
    } else if (fs::exists(f)) {
      fs = load_sampled(f, f_column);
    } else {
      const Expression e = Expression::parse(f);
      Eigen::VectorXd v(gs.values().size());
      for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = e(gs.node(k), gs.node(k));
      fs = SampledFunction<double>(gs.lower(), gs.spacing(), v);
    }
    YoungOptions opt;
    opt.points_per_cell = points;
    opt.integrator_holder = holder;
    opt.on_warning = [&err](const std::string& w) { err << "warning: " << w << "\n"; };
    out << num(young_integral(fs, gs, alpha, opt)) << "\n";
    return Exit::ok;
  }
};

// ---------------------------------------------------------------------------
// solve

struct SolveCommand {
  NoiseOptions noise;
  CoefficientOptions coeffs;
  double x0 = 1.0;
  std::string output;
  std::string out_dir;

  void add(CLI::App& app) {
    noise.add(app, 4096);
    coeffs.add(app);
    app.add_option("--x0", x0, "initial value X_0 (finite)")->capture_default_str();
    app.add_option("--output", output, "output CSV (t,x)");
    app.add_option("--out-dir", out_dir, "output directory (default $MIXSDE_OUTPUT_DIR or .)");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const HurstIndex h(noise.hurst);
    const TimeGrid grid = noise.grid();
    auto cs = std::make_shared<const CoefficientSet>(coeffs.build());
    if (!std::isfinite(x0)) throw DomainError("--x0 must be finite");
    const NoiseGenerator gen(grid, h, noise.dependence_spec(), parse_fbm_method(noise.method));
    auto nz = std::make_shared<const NoisePair>(gen.sample(noise.seed, 0));
    EulerSolution sol;
    try {
      sol = euler_solve(cs, nz, x0);
    } catch (const NumericalError& e) {
      err << "error: " << e.what() << " (path aborted)\n";
      return Exit::numerical;
    }
    const std::string file =
        output.empty() ? join(output_dir(out_dir, ""),
                              "solve_" + cs->name + "_seed" + std::to_string(noise.seed) + ".csv")
                       : output;
    write_solution_csv(file, grid, sol.values);
    out << file << ": X_T = " << num(sol.values[sol.values.size() - 1]) << "\n";
    return Exit::ok;
  }
};

// ---------------------------------------------------------------------------
// check

struct CheckCommand {
  CoefficientOptions coeffs;
  CheckDomain domain;
  std::string json;

  void add(CLI::App& app) {
    coeffs.add(app);
    app.add_option("--t-min", domain.t_min, "left end of the time range")->capture_default_str();
    app.add_option("--t-max", domain.t_max, "right end of the time range, > t-min")
        ->capture_default_str();
    app.add_option("--x-max", domain.x_max, "largest sampled |x|, > 10")->capture_default_str();
    app.add_option("--time-samples", domain.time_samples, "time samples, >= 100")
        ->capture_default_str();
    app.add_option("--state-samples", domain.state_samples, "state samples, >= 100")
        ->capture_default_str();
    app.add_option("--seed", domain.seed, "seed of the sample rotation")->capture_default_str();
    app.add_option("--workers", domain.workers, "worker threads, 0 = all cores")
        ->capture_default_str();
    app.add_option("--json", json, "also write the report as JSON to this file");
  }

  int run(std::ostream& out) const {
    const CoefficientSet cs = coeffs.build();
    const HypothesisReport r = check_hypotheses(cs, domain);
    out << r.summary() << "\n";
    if (!json.empty()) write_text(json, hypothesis_json(r));
    return r.all_pass() ? Exit::ok : Exit::refused;
  }
};

// ---------------------------------------------------------------------------
// converge

struct ConvergeCommand {
  std::string manifest;
  bool force = false;
  unsigned workers = 0;
  std::string out_dir, prefix;
  CoefficientOptions coeffs;
  // Setup overrides, applied only when given.
  double hurst = 0, horizon = 0, x0 = 0, alpha = 0, eta = 0, threshold = 0, epsilon = 0,
         radius = 0, rho = 0;
  std::uint64_t seed = 0;
  std::size_t paths = 0, fine = 0, monitor = 0;
  std::vector<std::size_t> levels;
  std::string method, dependence, functional;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentManifest&)>>> overrides;

  template <typename T>
  void opt(CLI::App& app, const std::string& flag, T& target, const std::string& help,
           std::function<void(ExperimentManifest&)> apply) {
    overrides.emplace_back(app.add_option(flag, target, help), std::move(apply));
  }

  void add(CLI::App& app) {
    app.add_option("--manifest", manifest, "experiment manifest (JSON); flags override it");
    app.add_flag("--force", force, "run even if the coefficients fail the hypothesis check");
    app.add_option("--workers", workers, "worker threads, 0 = all cores (results do not depend on it)")
        ->capture_default_str();
    opt(app, "--out-dir", out_dir, "output directory (default: manifest, $MIXSDE_OUTPUT_DIR, .)",
        [this](auto& m) { m.output_dir = out_dir; });
    opt(app, "--prefix", prefix, "file name prefix of the outputs",
        [this](auto& m) { m.prefix = prefix; });
    coeffs.add(app);
    opt(app, "--h,--hurst", hurst, "Hurst index H, in (1/2, 1)",
        [this](auto& m) { m.setup.hurst = hurst; });
    opt(app, "--t,--horizon", horizon, "horizon T > 0", [this](auto& m) { m.setup.horizon = horizon; });
    opt(app, "--x0", x0, "initial value", [this](auto& m) { m.setup.x0 = x0; });
    opt(app, "--seed", seed, "RNG seed", [this](auto& m) { m.setup.seed = seed; });
    opt(app, "--paths,-M", paths, "Monte Carlo paths M >= 1", [this](auto& m) { m.setup.paths = paths; });
    opt(app, "--fine", fine, "fine step count n 2^m (reference level)",
        [this](auto& m) { m.setup.fine_steps = fine; });
    overrides.emplace_back(
        app.add_option("--levels", levels,
                       "coarse step counts, increasing, each fine / 2^k (comma separated)")
            ->delimiter(','),
        [this](auto& m) { m.setup.levels = levels; });
    opt(app, "--alpha", alpha, "alpha in (1 - H, kappa), kappa = min(1/2, beta)",
        [this](auto& m) { m.setup.config.alpha = alpha; });
    opt(app, "--eta", eta, "eta in (0, kappa - alpha)", [this](auto& m) { m.setup.config.eta = eta; });
    opt(app, "--threshold,-N", threshold, "localization threshold N > 0",
        [this](auto& m) { m.setup.config.threshold = threshold; });
    opt(app, "--epsilon", epsilon, "rate slack epsilon in (0, kappa - alpha)",
        [this](auto& m) { m.setup.config.epsilon = epsilon; });
    opt(app, "--radius,-R", radius, "restriction radius R > 0",
        [this](auto& m) { m.setup.config.radius = radius; });
    opt(app, "--method", method, "fBm sampler: circulant | cholesky",
        [this](auto& m) { m.setup.method = parse_fbm_method(method); });
    opt(app, "--dependence", dependence, "independent | volterra | joint-gaussian",
        [this](auto& m) { m.setup.dependence.mode = parse_dependence(dependence); });
    opt(app, "--rho", rho, "joint-gaussian correlation parameter in [-1, 1]",
        [this](auto& m) { m.setup.dependence.rho = rho; });
    opt(app, "--functional", functional, "GRR functional for tau_N: sum | wiener | fbm",
        [this](auto& m) { m.setup.functional = parse_functional_kind(functional); });
    opt(app, "--monitor-nodes", monitor, "nodes of the tau_N monitor grid (divides --fine, >= 8)",
        [this](auto& m) { m.setup.monitor_nodes = monitor; });
  }

  int run(std::ostream& out, std::ostream& err) const {
    ExperimentManifest m = manifest.empty() ? ExperimentManifest{} : load_manifest(manifest);
    for (const auto& [option, apply] : overrides) {
      if (option->count() > 0) apply(m);
    }
    coeffs.check_complete();
    if (coeffs.expressions_given()) {
      m.expressions = {coeffs.a, coeffs.b, coeffs.c, coeffs.dc};
      if (!coeffs.name.empty()) m.name = coeffs.name;
    } else if (coeffs.preset_opt->count() > 0) {
      m.expressions = {};
      m.preset = coeffs.preset;
    }
    if (coeffs.k_opt->count() > 0) m.K = coeffs.K;
    if (coeffs.beta_opt->count() > 0) m.beta = coeffs.beta;
    if (!(m.setup.dependence.rho >= -1.0 && m.setup.dependence.rho <= 1.0)) {
      throw DomainError("rho must lie in [-1, 1]");
    }

    const HurstIndex h(m.setup.hurst);
    const CoefficientSet cs = m.coefficients();
    check_beta(cs.beta, h.value());
    m.setup.validate();
    m.setup.config.validate(h.value(), cs.beta);
    m.setup.workers = workers;

    const std::string dir = output_dir("", m.output_dir);
    const std::string base = join(dir, m.prefix);

    CheckDomain domain;
    domain.t_min = 0.0;
    domain.t_max = m.setup.horizon;
    domain.workers = workers;
    const HypothesisReport hyp = check_hypotheses(cs, domain);
    write_text(base + "_hypotheses.json", hypothesis_json(hyp));
    if (!hyp.all_pass()) {
      const HypothesisResult& f = *hyp.first_failure();
      std::ostringstream msg;
      msg << "hypothesis (" << f.id << ") " << f.name << " fails for '" << cs.name << "': "
          << (f.non_finite ? std::string("non-finite value") : "ratio " + num(f.worst_ratio) +
                                                                   " > K = " + num(cs.K))
          << " at t=" << num(f.witness.t) << " s=" << num(f.witness.s)
          << " x=" << num(f.witness.x) << " y=" << num(f.witness.y);
      if (!force) {
        err << "refused: " << msg.str() << " (use --force to run anyway)\n";
        return Exit::refused;
      }
      err << "warning: " << msg.str() << "; continuing because of --force\n";
    }

    write_text(base + "_manifest.json", manifest_json(m));
    const ErrorReport report = mc_strong_error(cs, m.setup);
    write_text(base + ".json", report_json(report));
    write_text(base + ".csv", report_csv(report));
    write_text(base + "_loglog.csv", report_loglog_csv(report));

    out << "level_n  err2_norm2  err2_sup  retained  discarded  aborted\n";
    for (const auto& l : report.levels) {
      out << l.steps << "  " << num(l.err2_norm2) << "  " << num(l.err2_sup) << "  "
          << l.retained << "  " << l.discarded << "  " << l.aborted << "\n";
    }
    out << "stopped fraction " << num(report.stopped_fraction) << ", moment ratio "
        << num(report.moment_ratio()) << "\n";
    if (report.degenerate) {
      out << report.note << "\n";
      return Exit::ok;
    }
    out << "rate (slope/2): norm2 " << num(report.fit_norm2.slope / 2.0) << " +- "
        << num(report.fit_norm2.stderr_slope / 2.0) << ", sup "
        << num(report.fit_sup.slope / 2.0) << " +- " << num(report.fit_sup.stderr_slope / 2.0)
        << "; floor kappa - alpha - epsilon = " << num(report.rate_floor()) << "\n";
    out << "outputs: " << base << ".{json,csv}, " << base << "_loglog.csv, " << base
        << "_manifest.json\n";
    if (!report.rate_ok()) {
      err << "fitted rate below the floor\n";
      return Exit::numerical;
    }
    return Exit::ok;
  }
};

// ---------------------------------------------------------------------------
// manifest JSON

const std::set<std::string> kManifestKeys = {
    "seed",     "hurst",        "horizon",    "x0",      "coefficients", "config",
    "levels",   "fine_steps",   "paths",      "dependence", "method",    "functional",
    "monitor_nodes", "output",  "version"};

template <typename T>
void take(const ordered_json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void reject_unknown(const ordered_json& j, const std::set<std::string>& keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw DomainError("manifest: unknown key '" + k + "' in " + where);
  }
}

}  // namespace

CoefficientSet ExperimentManifest::coefficients() const {
  if (uses_expressions()) {
    return from_expressions(name.empty() ? "expressions" : name, expressions[0], expressions[1],
                            expressions[2], expressions[3], K, beta);
  }
  CoefficientSet s = mixsde::preset(preset);
  s.K = K;
  s.beta = beta;
  return s;
}

ExperimentManifest load_manifest(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DomainError("cannot open manifest '" + file + "'");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("manifest '" + file + "': " + e.what());
  }
  if (!j.is_object()) throw DomainError("manifest '" + file + "' must be a JSON object");
  reject_unknown(j, kManifestKeys, "the manifest");
  ExperimentManifest m;
  try {
    ConvergenceSetup& s = m.setup;
    take(j, "seed", s.seed);
    take(j, "hurst", s.hurst);
    take(j, "horizon", s.horizon);
    take(j, "x0", s.x0);
    take(j, "levels", s.levels);
    take(j, "fine_steps", s.fine_steps);
    take(j, "paths", s.paths);
    take(j, "monitor_nodes", s.monitor_nodes);
    if (j.contains("method")) s.method = parse_fbm_method(j.at("method").get<std::string>());
    if (j.contains("functional")) {
      s.functional = parse_functional_kind(j.at("functional").get<std::string>());
    }
    if (j.contains("dependence")) {
      const auto& d = j.at("dependence");
      reject_unknown(d, {"mode", "rho"}, "dependence");
      if (d.contains("mode")) s.dependence.mode = parse_dependence(d.at("mode").get<std::string>());
      take(d, "rho", s.dependence.rho);
    }
    if (j.contains("config")) {
      const auto& c = j.at("config");
      reject_unknown(c, {"alpha", "eta", "threshold", "epsilon", "radius"}, "config");
      take(c, "alpha", s.config.alpha);
      take(c, "eta", s.config.eta);
      take(c, "threshold", s.config.threshold);
      take(c, "epsilon", s.config.epsilon);
      take(c, "radius", s.config.radius);
    }
    if (j.contains("coefficients")) {
      const auto& c = j.at("coefficients");
      reject_unknown(c, {"preset", "a", "b", "c", "dc", "name", "K", "beta"}, "coefficients");
      take(c, "preset", m.preset);
      take(c, "name", m.name);
      take(c, "K", m.K);
      take(c, "beta", m.beta);
      const char* keys[4] = {"a", "b", "c", "dc"};
      int given = 0;
      for (int i = 0; i < 4; ++i) {
        if (c.contains(keys[i])) {
          m.expressions[static_cast<std::size_t>(i)] = c.at(keys[i]).get<std::string>();
          ++given;
        }
      }
      if (given != 0 && given != 4) {
        throw DomainError("manifest: coefficients need all of a, b, c, dc or none");
      }
      if (given == 4 && c.contains("preset")) {
        throw DomainError("manifest: coefficients give both a preset and expressions");
      }
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      reject_unknown(o, {"dir", "prefix"}, "output");
      take(o, "dir", m.output_dir);
      take(o, "prefix", m.prefix);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("manifest '" + file + "': " + e.what());
  }
  return m;
}

std::string manifest_json(const ExperimentManifest& m) {
  const ConvergenceSetup& s = m.setup;
  ordered_json coeffs;
  if (m.uses_expressions()) {
    coeffs = {{"name", m.name.empty() ? "expressions" : m.name},
              {"a", m.expressions[0]},
              {"b", m.expressions[1]},
              {"c", m.expressions[2]},
              {"dc", m.expressions[3]}};
  } else {
    coeffs = {{"preset", m.preset}};
  }
  coeffs["K"] = m.K;
  coeffs["beta"] = m.beta;
  ordered_json j{
      {"seed", s.seed},
      {"hurst", s.hurst},
      {"horizon", s.horizon},
      {"x0", s.x0},
      {"coefficients", coeffs},
      {"config",
       {{"alpha", s.config.alpha},
        {"eta", s.config.eta},
        {"threshold", s.config.threshold},
        {"epsilon", s.config.epsilon},
        {"radius", s.config.radius}}},
      {"levels", s.levels},
      {"fine_steps", s.fine_steps},
      {"paths", s.paths},
      {"dependence", {{"mode", to_string(s.dependence.mode)}, {"rho", s.dependence.rho}}},
      {"method", to_string(s.method)},
      {"functional", functional_name(s.functional)},
      {"monitor_nodes", s.monitor_nodes},
      {"output", {{"dir", m.output_dir}, {"prefix", m.prefix}}},
      {"version", m.version},
  };
  return j.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation of mixed SDEs driven by a Wiener process and a fractional Brownian "
               "motion with H > 1/2",
               "mixsde"};
  app.set_version_flag("--version", std::string(MIXSDE_VERSION));
  // --h is the Hurst index, so help is only reachable as --help.
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  FbmCommand fbm;
  IntegrateCommand integrate;
  SolveCommand solve;
  CheckCommand check;
  ConvergeCommand converge;
  auto* fbm_app = app.add_subcommand("fbm", "sample fBm paths or (W, B^H) pairs to CSV");
  auto* int_app = app.add_subcommand("integrate", "fractional (Young) integral of f against g");
  auto* solve_app = app.add_subcommand("solve", "Euler solution of the mixed SDE to CSV");
  auto* check_app = app.add_subcommand("check", "sampled check of hypotheses (A)-(E)");
  auto* conv_app = app.add_subcommand("converge", "Monte Carlo strong-error and rate study");
  fbm.add(*fbm_app);
  integrate.add(*int_app);
  solve.add(*solve_app);
  check.add(*check_app);
  converge.add(*conv_app);

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("mixsde");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*fbm_app) return fbm.run(out);
    if (*int_app) return integrate.run(out, err);
    if (*solve_app) return solve.run(out, err);
    if (*check_app) return check.run(out);
    if (*conv_app) return converge.run(out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const NotPositiveDefiniteError& e) {
    err << "numerical failure: " << e.what() << " (smallest eigenvalue "
        << num(e.min_eigenvalue()) << ")\n";
    return Exit::numerical;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return Exit::numerical;
  } catch (const CouplingError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return Exit::numerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return Exit::usage;
  }
  return Exit::usage;
}

}  // namespace mixsde::cli
