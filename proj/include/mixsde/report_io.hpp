#pragma once

#include <string>

#include "mixsde/convergence.hpp"
#include "mixsde/model.hpp"

namespace mixsde {

/// JSON text of a report (doubles in shortest round-trip form).
std::string report_json(const ErrorReport& report);

/// `level_n,delta,err2_norm2,err2_sup,se_norm2,se_sup,discarded,aborted`
std::string report_csv(const ErrorReport& report);

/// `log_delta,log_err2_norm2,log_err2_sup,fit_norm2,fit_sup` for log-log plots.
std::string report_loglog_csv(const ErrorReport& report);

std::string hypothesis_json(const HypothesisReport& report);

/// Writes `text` to `file`, throwing ResourceError on failure.
void write_text(const std::string& file, const std::string& text);

}  // namespace mixsde
