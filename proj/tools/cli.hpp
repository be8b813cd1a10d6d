#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "mixsde/convergence.hpp"
#include "mixsde/model.hpp"

namespace mixsde::cli {

/// Process exit codes.
enum Exit : int { ok = 0, usage = 1, refused = 2, numerical = 3 };

/// Everything needed to replay a convergence run bit-for-bit.  The worker
/// count is deliberately absent: results do not depend on it.
struct ExperimentManifest {
  ConvergenceSetup setup;
  std::string preset = "linear";
  /// a, b, c, dc; used instead of the preset when non-empty.
  std::array<std::string, 4> expressions;
  std::string name;
  double K = 1.0;
  double beta = 0.9;
  std::string output_dir;
  std::string prefix = "converge";
  std::string version = MIXSDE_VERSION;

  bool uses_expressions() const noexcept { return !expressions[0].empty(); }
  CoefficientSet coefficients() const;
};

/// Reads a manifest; keys that are absent keep their defaults, unknown keys
/// are rejected.
ExperimentManifest load_manifest(const std::string& file);
std::string manifest_json(const ExperimentManifest& manifest);

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "MIXSDE_OUTPUT_DIR";

/// Runs one command line (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixsde::cli
