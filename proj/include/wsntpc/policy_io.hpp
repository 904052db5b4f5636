// Policy file serialization: the solver's output as a self-contained JSON
// document (grid, action table with powers, per-state action indices,
// convergence metadata, diagnostics, and the config hash it was built from).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsntpc/mdp.hpp"

namespace wsntpc {

struct SolveMeta {
  double alpha = 0.0;
  double epsilon = 0.0;
  int max_sweeps = 0;
  UpdateMode update_mode = UpdateMode::kInPlace;
  std::vector<double> lambda;  // per system
  int sweeps = 0;
  double final_delta = 0.0;
  bool converged = false;
};

struct PolicyDiagnostics {
  ActionDiagnostics actions;
  std::uint64_t interpolation_saturations = 0;
  std::uint64_t channel_clamps = 0;
};

std::string serialize_policy(const Policy& policy, const SolveMeta& meta,
                             const PolicyDiagnostics& diagnostics,
                             const std::string& config_hash_hex);

struct LoadedPolicy {
  Policy policy;
  SolveMeta meta;
  std::string config_hash;
};

// Parses and structurally validates a policy document (throws ConfigError
// via the config layer's conventions on malformed input).
LoadedPolicy parse_policy(const std::string& json_text);

LoadedPolicy load_policy_file(const std::string& path);

}  // namespace wsntpc
