#include "wsntpc/policy_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "wsntpc/config.hpp"
#include "wsntpc/units.hpp"

namespace wsntpc {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
  throw ConfigError("policy: " + what);
}

std::vector<std::vector<double>> parse_level_lists(const json& arr, const char* name) {
  if (!arr.is_array() || arr.empty()) fail(std::string(name) + " must be a nonempty array");
  std::vector<std::vector<double>> out;
  for (const json& axis : arr) {
    if (!axis.is_array() || axis.empty()) fail(std::string(name) + " axes must be nonempty arrays");
    std::vector<double> ls;
    for (const json& v : axis) {
      if (!v.is_number()) fail(std::string(name) + " entries must be numbers");
      ls.push_back(v.get<double>());
    }
    out.push_back(std::move(ls));
  }
  return out;
}

Eigen::VectorXd parse_vector(const json& arr, int expect, const char* name) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != expect)
    fail(std::string(name) + " must be an array with one entry per link");
  Eigen::VectorXd v(expect);
  for (int i = 0; i < expect; ++i) {
    if (!arr[i].is_number()) fail(std::string(name) + " entries must be numbers");
    v(i) = arr[i].get<double>();
  }
  return v;
}

}  // namespace

std::string serialize_policy(const Policy& policy, const SolveMeta& meta,
                             const PolicyDiagnostics& diagnostics,
                             const std::string& config_hash_hex) {
  json root;
  root["config_hash"] = config_hash_hex;

  json grid_levels = json::array();
  for (const auto& axis : policy.grid.levels) grid_levels.push_back(axis);
  root["grid_levels"] = std::move(grid_levels);

  json action_levels = json::array();
  for (const auto& axis : policy.actions.levels) action_levels.push_back(axis);
  root["action_levels"] = std::move(action_levels);
  root["p_max_watt"] = policy.actions.p_max_w;

  json actions = json::array();
  for (const Action& act : policy.actions.actions) {
    json a;
    json kappa = json::array(), p_watt = json::array(), p_dbm = json::array();
    for (int l = 0; l < act.kappa.size(); ++l) {
      kappa.push_back(act.kappa(l));
      p_watt.push_back(act.p(l));
      p_dbm.push_back(watt_to_dbm(act.p(l)));
    }
    a["kappa"] = std::move(kappa);
    a["p_watt"] = std::move(p_watt);
    a["p_dbm"] = std::move(p_dbm);
    a["total_power_watt"] = act.total_power;
    actions.push_back(std::move(a));
  }
  root["actions"] = std::move(actions);

  root["action_index"] = policy.action_index;

  root["solver"] = {
      {"alpha", meta.alpha},
      {"epsilon", meta.epsilon},
      {"max_sweeps", meta.max_sweeps},
      {"update_mode", meta.update_mode == UpdateMode::kSnapshot ? "snapshot" : "in_place"},
      {"lambda", meta.lambda},
      {"sweeps", meta.sweeps},
      {"final_delta", meta.final_delta},
      {"converged", meta.converged},
  };
  root["diagnostics"] = {
      {"action_candidates", diagnostics.actions.candidates},
      {"actions_rejected_unachievable", diagnostics.actions.rejected_unachievable},
      {"actions_rejected_power_limit", diagnostics.actions.rejected_power_limit},
      {"actions_below_power_floor", diagnostics.actions.below_power_floor},
      {"action_count", policy.actions.size()},
      {"interpolation_saturations", diagnostics.interpolation_saturations},
      {"channel_clamps", diagnostics.channel_clamps},
  };
  return root.dump(2) + "\n";
}

LoadedPolicy parse_policy(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("expected an object");
  for (const auto& item : root.items()) {
    static const char* const allowed[] = {"action_index", "action_levels", "actions",
                                          "config_hash", "diagnostics", "grid_levels",
                                          "p_max_watt", "solver"};
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) fail("unknown key \"" + item.key() + "\"");
  }
  for (const char* k : {"action_index", "action_levels", "actions", "config_hash",
                        "grid_levels", "solver"}) {
    if (!root.contains(k)) fail(std::string("missing required key \"") + k + "\"");
  }

  LoadedPolicy out;
  if (!root.at("config_hash").is_string()) fail("config_hash must be a string");
  out.config_hash = root.at("config_hash").get<std::string>();

  out.policy.grid.levels = parse_level_lists(root.at("grid_levels"), "grid_levels");
  try {
    validate_grid(out.policy.grid);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  const int L = out.policy.grid.systems();

  out.policy.actions.levels = parse_level_lists(root.at("action_levels"), "action_levels");
  if (static_cast<int>(out.policy.actions.levels.size()) != L)
    fail("action_levels/grid_levels link count mismatch");
  if (root.contains("p_max_watt")) {
    if (!root.at("p_max_watt").is_number()) fail("p_max_watt must be a number");
    out.policy.actions.p_max_w = root.at("p_max_watt").get<double>();
  }

  const json& actions = root.at("actions");
  if (!actions.is_array() || actions.empty()) fail("actions must be a nonempty array");
  for (const json& a : actions) {
    if (!a.is_object()) fail("actions entries must be objects");
    for (const auto& item : a.items()) {
      if (item.key() != "kappa" && item.key() != "p_watt" && item.key() != "p_dbm" &&
          item.key() != "total_power_watt")
        fail("unknown action key \"" + item.key() + "\"");
    }
    if (!a.contains("kappa") || !a.contains("p_watt") || !a.contains("total_power_watt"))
      fail("actions entries need kappa, p_watt, total_power_watt");
    Action act;
    act.kappa = parse_vector(a.at("kappa"), L, "kappa");
    act.p = parse_vector(a.at("p_watt"), L, "p_watt");
    if (!a.at("total_power_watt").is_number()) fail("total_power_watt must be a number");
    act.total_power = a.at("total_power_watt").get<double>();
    out.policy.actions.actions.push_back(std::move(act));
  }

  const json& index = root.at("action_index");
  if (!index.is_array() || index.size() != out.policy.grid.size())
    fail("action_index must have one entry per grid state");
  for (const json& v : index) {
    if (!v.is_number_integer()) fail("action_index entries must be integers");
    const std::int64_t a = v.get<std::int64_t>();
    if (a < 0 || a >= out.policy.actions.size()) fail("action_index entry out of range");
    out.policy.action_index.push_back(static_cast<std::int32_t>(a));
  }

  const json& solver = root.at("solver");
  if (!solver.is_object()) fail("solver must be an object");
  for (const char* k : {"alpha", "epsilon", "max_sweeps", "update_mode", "lambda",
                        "sweeps", "final_delta", "converged"}) {
    if (!solver.contains(k)) fail(std::string("solver: missing \"") + k + "\"");
  }
  out.meta.alpha = solver.at("alpha").get<double>();
  out.meta.epsilon = solver.at("epsilon").get<double>();
  out.meta.max_sweeps = solver.at("max_sweeps").get<int>();
  const std::string mode = solver.at("update_mode").get<std::string>();
  if (mode == "snapshot") {
    out.meta.update_mode = UpdateMode::kSnapshot;
  } else if (mode == "in_place") {
    out.meta.update_mode = UpdateMode::kInPlace;
  } else {
    fail("solver.update_mode must be in_place or snapshot");
  }
  if (!solver.at("lambda").is_array() ||
      static_cast<int>(solver.at("lambda").size()) != L)
    fail("solver.lambda must have one entry per link");
  for (const json& v : solver.at("lambda")) out.meta.lambda.push_back(v.get<double>());
  out.meta.sweeps = solver.at("sweeps").get<int>();
  out.meta.final_delta = solver.at("final_delta").get<double>();
  out.meta.converged = solver.at("converged").get<bool>();
  return out;
}

LoadedPolicy load_policy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("policy: cannot read \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_policy(buf.str());
}

}  // namespace wsntpc
