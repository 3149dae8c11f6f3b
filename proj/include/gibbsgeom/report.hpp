#pragma once

#include "gibbsgeom/stats.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gibbsgeom {

inline constexpr const char* kVersion = "0.1.0";

/// A parsed run: the experiment kind, the spec, and kind-specific extras.
/// `raw` preserves the config file entries verbatim for the JSON echo.
struct RunConfig {
  std::string kind;
  ExperimentSpec spec;
  std::string out_dir = "out";
  std::vector<double> rho_grid;   // mismatch
  std::vector<double> tail_grid;  // tails
  TailMode tail_mode = TailMode::kStabilizationRadius;
  bool tail_require_fit = false;
  double probe_r_volume = 0.0;
  double probe_t_volume = 0.0;
  long probe_n_outer = 0;
  long probe_n_inner = 0;
  std::map<std::string, std::string> raw;
};

/// Parses the flat dotted-key config file for the given experiment kind.
/// Unknown keys, duplicate keys, bad values, and missing required keys all
/// throw ConfigError naming the key and line.
RunConfig parse_run_config(const std::string& path, const std::string& kind);

struct ValidationReport {
  bool ok = true;
  double margin = 0.0;
  std::string rho_rule;
  std::string message;
};

/// Static checks before any sampling: admissibility margin (aborts when
/// >= 1 with interaction and no override) and the resolved rho rule echo.
ValidationReport validate_run(const RunConfig& config);

/// Command-line surface, after flag parsing. Empty/zero fields mean
/// "not given"; precedence is flag > environment > config file > default.
struct CliOptions {
  std::string kind;
  std::string config_path;
  std::string out_dir;
  bool has_seed = false;
  std::uint64_t seed = 0;
  int threads = 0;
  bool allow_near_critical = false;
  bool validate_only = false;
};

/// Parses, validates, runs, and writes the report bundle. Returns the
/// process exit code: 0 success, 2 validation failure, 3 sampler or
/// estimator failure (partial results flagged in the summary), 4 I/O.
int run_cli(const CliOptions& options);

/// Number formatted so it round-trips exactly (17 significant digits).
std::string format_g17(double v);

}  // namespace gibbsgeom
