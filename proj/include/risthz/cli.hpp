// Command implementations behind the `risthz` executable: the power-sweep
// simulation (CSV per variant + run manifest), the geometry report, and
// the beam-search complexity table. Kept in the library so tests can
// drive them directly.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "risthz/evaluation.hpp"

namespace risthz {

// Process exit codes shared by the CLI and the command functions.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

// FNV-1a 64-bit content hash (hex string) used to fingerprint the config
// copy embedded in the run manifest.
std::string content_hash(const std::string& bytes);

// Overrides applied on top of the config file by CLI flags.
struct SimulateOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
};

// Run the sweep for every variant listed in the config. Writes
// <out>/<variant>.csv with header `power_dbm,mean_sum_rate_bpshz,ci95`
// and one row per power point, plus <out>/manifest.json containing the
// serialized config, its content hash, the effective seed, the tool
// version, and a hash per output file. Everything written is a pure
// function of the config and the overrides, so re-runs are byte
// identical. Returns a process exit code; diagnostics go to `err`.
int cmd_simulate(const SimulateOptions& opts, std::ostream& err);

// Print derived geometry for a scenario: optimal spacings, the field
// boundary with each user's regime, and the normalized column inner
// product at the configured spacing.
int cmd_geometry(const std::string& config_path, std::ostream& out, std::ostream& err);

// Emit the scheme x codebook-size search-cost table as CSV.
int cmd_complexity(const std::vector<int>& sizes, std::ostream& out, std::ostream& err);

// Format a double the way all CSV output does (shortest round-trippable
// form via %.12g; stable under parse -> re-emit).
std::string format_csv_value(double v);

}  // namespace risthz
