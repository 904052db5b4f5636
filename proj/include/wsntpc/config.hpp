// Configuration documents: strict JSON parsing into ScenarioConfig,
// canonical serialization, and the content hash embedded in output files.
// Power values cross this boundary in dBm and frequency in MHz; everything
// behind it is watts and Hz.
#pragma once

#include <stdexcept>
#include <string>

#include "wsntpc/sim.hpp"

namespace wsntpc {

// Schema or I/O problem with a configuration or policy document; the CLI
// maps it to the usage/config exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses and validates a config document.  Unknown keys anywhere are
// rejected; missing optional fields take the documented defaults.
ScenarioConfig parse_config(const std::string& json_text);

ScenarioConfig load_config_file(const std::string& path);

// Canonical full serialization (normalized units, defaults materialized,
// alphabetical keys).  parse(serialize(cfg)) reproduces cfg exactly.
std::string serialize_config(const ScenarioConfig& config);

// Hex digest of the policy-relevant part of the config: everything except
// the simulation block (horizon/runs/seed/burn_in) and the feasibility
// block, so re-simulating with a different seed still matches its policy.
std::string config_hash(const ScenarioConfig& config);

// Shortest-round-trip decimal rendering shared by the CSV writers
// ("inf"/"-inf"/"nan" for non-finite values).
std::string format_double(double v);

}  // namespace wsntpc
