// key = value scenario-config files: parsing with defaults, strict key
// checking, and canonical re-emission (for manifests and reproducibility).
#pragma once

#include <stdexcept>
#include <string>

#include "risthz/evaluation.hpp"

namespace risthz {

// Raised for unreadable files, unknown keys, malformed values, missing
// required keys, or out-of-range settings. `what()` names the key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse a config file: one `key = value` per line, '#' comments, blank
// lines ignored. Vector values are whitespace-separated. Unknown keys are
// rejected; missing optional keys take the documented defaults; missing
// required keys (frequency_ghz, noise_dbm, users, bs_center, user_<i>)
// raise ConfigError listing them.
ScenarioConfig load_config(const std::string& path);

// Same parser over an in-memory string (tests, manifests).
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<memory>");

// Canonical text form of a config; parse_config(serialize_config(c))
// round-trips every field.
std::string serialize_config(const ScenarioConfig& cfg);

}  // namespace risthz
