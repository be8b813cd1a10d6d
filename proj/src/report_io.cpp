#include "mixsde/report_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mixsde/csv.hpp"
#include "mixsde/errors.hpp"

namespace mixsde {
namespace {

using nlohmann::ordered_json;

ordered_json fit_json(const RateFit& f) {
  return ordered_json{{"slope", f.slope},
                      {"stderr", f.stderr_slope},
                      {"intercept", f.intercept},
                      {"rate", f.slope / 2.0},
                      {"levels_used", f.used}};
}

std::string kind_name(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::wiener: return "wiener";
    case FunctionalKind::fbm: return "fbm";
    case FunctionalKind::sum: return "sum";
  }
  return "sum";
}

}  // namespace

std::string report_json(const ErrorReport& r) {
  const ConvergenceSetup& s = r.setup;
  ordered_json levels = ordered_json::array();
  for (const auto& l : r.levels) {
    levels.push_back(ordered_json{{"level_n", l.steps},
                                  {"delta", l.delta},
                                  {"err2_norm2", l.err2_norm2},
                                  {"err2_sup", l.err2_sup},
                                  {"se_norm2", l.se_norm2},
                                  {"se_sup", l.se_sup},
                                  {"retained", l.retained},
                                  {"discarded", l.discarded},
                                  {"aborted", l.aborted},
                                  {"moment_inf_alpha", l.moment_inf_alpha},
                                  {"moment_se", l.moment_se},
                                  {"max_comparison_ratio", l.max_comparison_ratio},
                                  {"max_increment_ratio", l.max_increment_ratio},
                                  {"flagged", l.flagged}});
  }
  ordered_json j{
      {"coefficients", r.coefficients},
      {"hurst", s.hurst},
      {"horizon", s.horizon},
      {"x0", s.x0},
      {"seed", s.seed},
      {"paths", s.paths},
      {"fine_steps", s.fine_steps},
      {"fine_delta", r.fine_delta},
      {"alpha", s.config.alpha},
      {"eta", s.config.eta},
      {"threshold", s.config.threshold},
      {"epsilon", s.config.epsilon},
      {"radius", s.config.radius},
      {"kappa", r.kappa},
      {"rate_floor", r.rate_floor()},
      {"dependence", to_string(s.dependence.mode)},
      {"rho", s.dependence.rho},
      {"method", to_string(s.method)},
      {"functional", kind_name(s.functional)},
      {"monitor_nodes", s.monitor_nodes},
      {"levels", levels},
      {"stopped_fraction", r.stopped_fraction},
      {"mean_tau", r.mean_tau},
      {"restricted_fraction", r.restricted_fraction},
      {"aborted_fine", r.aborted_fine},
      {"rounding_floor", r.rounding_floor},
      {"moment_ratio", r.moment_ratio()},
      {"degenerate", r.degenerate},
      {"note", r.note},
  };
  if (!r.degenerate) {
    j["fit_norm2"] = fit_json(r.fit_norm2);
    j["fit_sup"] = fit_json(r.fit_sup);
    j["rate_ok"] = r.rate_ok();
  }
  j["version"] = MIXSDE_VERSION;
  return j.dump(2) + "\n";
}

std::string report_csv(const ErrorReport& r) {
  std::ostringstream out;
  out << "level_n,delta,err2_norm2,err2_sup,se_norm2,se_sup,discarded,aborted\n";
  for (const auto& l : r.levels) {
    out << l.steps << ',' << format_double(l.delta) << ',' << format_double(l.err2_norm2) << ','
        << format_double(l.err2_sup) << ',' << format_double(l.se_norm2) << ','
        << format_double(l.se_sup) << ',' << l.discarded << ',' << l.aborted << '\n';
  }
  return out.str();
}

std::string report_loglog_csv(const ErrorReport& r) {
  std::ostringstream out;
  out << "log_delta,log_err2_norm2,log_err2_sup,fit_norm2,fit_sup\n";
  auto log_or_nan = [](double v) { return v > 0.0 ? std::log(v) : std::nan(""); };
  for (const auto& l : r.levels) {
    const double x = std::log(l.delta);
    const double f2 = r.degenerate ? std::nan("") : r.fit_norm2.intercept + r.fit_norm2.slope * x;
    const double fs = r.degenerate ? std::nan("") : r.fit_sup.intercept + r.fit_sup.slope * x;
    out << format_double(x) << ',' << format_double(log_or_nan(l.err2_norm2)) << ','
        << format_double(log_or_nan(l.err2_sup)) << ',' << format_double(f2) << ','
        << format_double(fs) << '\n';
  }
  return out.str();
}

std::string hypothesis_json(const HypothesisReport& r) {
  ordered_json results = ordered_json::array();
  for (const auto& h : r.results) {
    results.push_back(ordered_json{
        {"hypothesis", std::string(1, h.id)},
        {"name", h.name},
        {"pass", h.pass},
        {"worst_ratio", h.non_finite ? ordered_json(nullptr) : ordered_json(h.worst_ratio)},
        {"non_finite", h.non_finite},
        {"witness",
         {{"t", h.witness.t}, {"s", h.witness.s}, {"x", h.witness.x}, {"y", h.witness.y}}}});
  }
  ordered_json j{{"coefficients", r.coefficients},
                 {"K", r.K},
                 {"beta", r.beta},
                 {"samples", r.samples},
                 {"all_pass", r.all_pass()},
                 {"evidence", "sampled; a pass is not a proof"},
                 {"results", results}};
  return j.dump(2) + "\n";
}

void write_text(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ResourceError("cannot open '" + file + "' for writing");
  out << text;
  out.flush();
  if (!out) throw ResourceError("write to '" + file + "' failed");
}

}  // namespace mixsde
