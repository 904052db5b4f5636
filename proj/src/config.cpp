#include "wsntpc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>

#include "wsntpc/sha1.hpp"
#include "wsntpc/units.hpp"

namespace wsntpc {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end()) {
      fail(where, "unknown key \"" + item.key() + "\"");
    }
  }
}

double get_number(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing required key \"") + key + "\"");
  if (!it->is_number()) fail(where + "." + key, "expected a number");
  return it->get<double>();
}

double get_number_or(const json& obj, const std::string& where, const char* key,
                     double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) fail(where + "." + key, "expected a number");
  return it->get<double>();
}

int get_integer_or(const json& obj, const std::string& where, const char* key,
                   int fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) fail(where + "." + key, "expected an integer");
  return it->get<int>();
}

int get_integer(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing required key \"") + key + "\"");
  if (!it->is_number_integer()) fail(where + "." + key, "expected an integer");
  return it->get<int>();
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing required key \"") + key + "\"");
  if (!it->is_string()) fail(where + "." + key, "expected a string");
  return it->get<std::string>();
}

std::vector<Vec2> parse_points(const json& arr, const std::string& where) {
  if (!arr.is_array()) fail(where, "expected an array of [x, y] pairs");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& pt = arr[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
      fail(at, "expected [x, y]");
    out.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  return out;
}

TopologySpec parse_topology(const json& obj) {
  check_keys(obj, "topology", {"kind", "links", "d1", "d2", "tx", "rx"});
  TopologySpec spec;
  const std::string kind = get_string(obj, "topology", "kind");
  if (kind == "circular") {
    spec.kind = TopologyKind::kCircular;
  } else if (kind == "assembly_line") {
    spec.kind = TopologyKind::kAssemblyLine;
  } else if (kind == "explicit") {
    spec.kind = TopologyKind::kExplicit;
  } else {
    fail("topology.kind", "must be circular, assembly_line, or explicit");
  }
  spec.links = get_integer(obj, "topology", "links");
  if (spec.links < 1) fail("topology.links", "must be >= 1");
  if (spec.kind == TopologyKind::kExplicit) {
    if (obj.contains("d1") || obj.contains("d2"))
      fail("topology", "d1/d2 do not apply to an explicit topology");
    if (!obj.contains("tx") || !obj.contains("rx"))
      fail("topology", "explicit topology needs tx and rx");
    spec.tx = parse_points(obj.at("tx"), "topology.tx");
    spec.rx = parse_points(obj.at("rx"), "topology.rx");
    if (static_cast<int>(spec.tx.size()) != spec.links ||
        static_cast<int>(spec.rx.size()) != spec.links)
      fail("topology", "tx/rx must list one point per link");
  } else {
    if (obj.contains("tx") || obj.contains("rx"))
      fail("topology", "tx/rx apply only to an explicit topology");
    spec.d1 = get_number(obj, "topology", "d1");
    spec.d2 = get_number(obj, "topology", "d2");
    if (!(spec.d1 > 0.0) || !(spec.d2 > 0.0)) fail("topology", "d1 and d2 must be > 0");
  }
  return spec;
}

PropagationParams parse_propagation(const json* obj) {
  PropagationParams params;  // defaults are the 2.4 GHz ISM values
  if (obj == nullptr) return params;
  check_keys(*obj, "propagation",
             {"frequency_mhz", "pathloss_exponent", "shadowing_variance_db2",
              "shadowing_std_db", "reference_distance_m"});
  params.frequency_hz = mhz_to_hz(get_number_or(*obj, "propagation", "frequency_mhz", 2480.0));
  params.pathloss_exponent = get_number_or(*obj, "propagation", "pathloss_exponent", 3.3);
  if (obj->contains("shadowing_variance_db2") && obj->contains("shadowing_std_db"))
    fail("propagation", "give shadowing_variance_db2 or shadowing_std_db, not both");
  if (obj->contains("shadowing_std_db")) {
    const double sd = get_number(*obj, "propagation", "shadowing_std_db");
    params.shadowing_variance_db = sd * sd;
  } else {
    params.shadowing_variance_db =
        get_number_or(*obj, "propagation", "shadowing_variance_db2", 2.75);
  }
  params.reference_distance_m =
      get_number_or(*obj, "propagation", "reference_distance_m", 1.0);
  if (!(params.frequency_hz > 0.0) || !(params.pathloss_exponent > 0.0) ||
      !(params.reference_distance_m > 0.0) || params.shadowing_variance_db < 0.0)
    fail("propagation", "parameters out of range");
  return params;
}

SystemModel parse_system(const json& obj, const std::string& where,
                         std::optional<double> shared_lambda) {
  check_keys(obj, where, {"F", "H", "R1", "R2", "m0", "R0", "Theta", "lambda"});
  const double f = get_number(obj, where, "F");
  const double h = get_number(obj, where, "H");
  const double r1 = get_number(obj, where, "R1");
  const double r2 = get_number(obj, where, "R2");
  const double m0 = get_number_or(obj, where, "m0", 0.0);
  const double r0 = get_number_or(obj, where, "R0", 1.0);
  const double theta = get_number_or(obj, where, "Theta", 1.0);
  double lambda;
  if (obj.contains("lambda")) {
    lambda = get_number(obj, where, "lambda");
  } else if (shared_lambda) {
    lambda = *shared_lambda;
  } else {
    fail(where, "no lambda given and no shared top-level lambda to fall back on");
  }
  SystemModel model = SystemModel::scalar(f, h, r1, r2, lambda, m0, r0, theta);
  try {
    validate_model(model);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return model;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  check_keys(root, "(root)",
             {"topology", "propagation", "channel", "systems", "lambda", "solver",
              "state_grid", "action_grid", "simulation", "feasibility"});

  ScenarioConfig cfg;
  if (!root.contains("topology")) fail("(root)", "missing required key \"topology\"");
  cfg.topology = parse_topology(root.at("topology"));
  const int L = cfg.topology.links;

  const json* prop = root.contains("propagation") ? &root.at("propagation") : nullptr;
  cfg.propagation = parse_propagation(prop);

  cfg.noise_dbm.assign(L, -100.0);
  if (root.contains("channel")) {
    const json& ch = root.at("channel");
    check_keys(ch, "channel", {"packet_bits", "noise_dbm", "p_max_dbm", "p_min_dbm"});
    cfg.packet_bits = get_integer_or(ch, "channel", "packet_bits", 120);
    if (cfg.packet_bits < 1) fail("channel.packet_bits", "must be >= 1");
    cfg.p_max_dbm = get_number_or(ch, "channel", "p_max_dbm", 7.0);
    cfg.p_min_dbm = get_number_or(ch, "channel", "p_min_dbm", -24.0);
    if (ch.contains("noise_dbm")) {
      const json& noise = ch.at("noise_dbm");
      if (noise.is_number()) {
        cfg.noise_dbm.assign(L, noise.get<double>());
      } else if (noise.is_array()) {
        if (static_cast<int>(noise.size()) != L)
          fail("channel.noise_dbm", "array must have one entry per link");
        for (int l = 0; l < L; ++l) {
          if (!noise[l].is_number()) fail("channel.noise_dbm", "entries must be numbers");
          cfg.noise_dbm[l] = noise[l].get<double>();
        }
      } else {
        fail("channel.noise_dbm", "expected a number or an array");
      }
    }
  }

  std::optional<double> shared_lambda;
  if (root.contains("lambda")) {
    if (!root.at("lambda").is_number()) fail("lambda", "expected a number");
    shared_lambda = root.at("lambda").get<double>();
  }
  if (!root.contains("systems")) fail("(root)", "missing required key \"systems\"");
  const json& systems = root.at("systems");
  if (!systems.is_array() || static_cast<int>(systems.size()) != L)
    fail("systems", "expected an array with one entry per link");
  for (int l = 0; l < L; ++l) {
    cfg.systems.push_back(
        parse_system(systems[l], "systems[" + std::to_string(l) + "]", shared_lambda));
  }

  if (!root.contains("solver")) fail("(root)", "missing required key \"solver\"");
  const json& solver = root.at("solver");
  check_keys(solver, "solver", {"alpha", "epsilon", "max_sweeps", "update_mode"});
  cfg.solver.alpha = get_number(solver, "solver", "alpha");
  cfg.solver.epsilon = get_number(solver, "solver", "epsilon");
  cfg.solver.max_sweeps = get_integer_or(solver, "solver", "max_sweeps", 10000);
  if (!(cfg.solver.alpha >= 0.0) || !(cfg.solver.alpha < 1.0))
    fail("solver.alpha", "must be in [0, 1)");
  if (!(cfg.solver.epsilon > 0.0)) fail("solver.epsilon", "must be > 0");
  if (cfg.solver.max_sweeps < 1) fail("solver.max_sweeps", "must be >= 1");
  if (solver.contains("update_mode")) {
    const std::string mode = get_string(solver, "solver", "update_mode");
    if (mode == "in_place") {
      cfg.solver.update_mode = UpdateMode::kInPlace;
    } else if (mode == "snapshot") {
      cfg.solver.update_mode = UpdateMode::kSnapshot;
    } else {
      fail("solver.update_mode", "must be in_place or snapshot");
    }
  }

  if (!root.contains("state_grid")) fail("(root)", "missing required key \"state_grid\"");
  const json& grid = root.at("state_grid");
  check_keys(grid, "state_grid", {"levels", "min", "max"});
  cfg.state_grid.levels = get_integer(grid, "state_grid", "levels");
  cfg.state_grid.min = get_number(grid, "state_grid", "min");
  cfg.state_grid.max = get_number(grid, "state_grid", "max");
  if (cfg.state_grid.levels < 2) fail("state_grid.levels", "must be >= 2");
  if (cfg.state_grid.min < 0.0 || !(cfg.state_grid.max > cfg.state_grid.min))
    fail("state_grid", "need 0 <= min < max");

  if (!root.contains("action_grid")) fail("(root)", "missing required key \"action_grid\"");
  const json& agrid = root.at("action_grid");
  check_keys(agrid, "action_grid", {"levels", "kappa_min", "kappa_max"});
  cfg.action_grid.levels = get_integer(agrid, "action_grid", "levels");
  if (cfg.action_grid.levels < 1) fail("action_grid.levels", "must be >= 1");
  if (agrid.contains("kappa_min") != agrid.contains("kappa_max"))
    fail("action_grid", "kappa_min and kappa_max must be given together");
  if (agrid.contains("kappa_min")) {
    cfg.action_grid.kappa_min = get_number(agrid, "action_grid", "kappa_min");
    cfg.action_grid.kappa_max = get_number(agrid, "action_grid", "kappa_max");
    if (!(*cfg.action_grid.kappa_min > 0.0) || !(*cfg.action_grid.kappa_max < 1.0) ||
        !(*cfg.action_grid.kappa_max > *cfg.action_grid.kappa_min))
      fail("action_grid", "need 0 < kappa_min < kappa_max < 1");
  }

  if (root.contains("simulation")) {
    const json& s = root.at("simulation");
    check_keys(s, "simulation", {"horizon", "runs", "seed", "burn_in"});
    cfg.horizon = get_integer_or(s, "simulation", "horizon", 500);
    cfg.runs = get_integer_or(s, "simulation", "runs", 50);
    cfg.burn_in = get_integer_or(s, "simulation", "burn_in", 0);
    if (s.contains("seed")) {
      const json& seed = s.at("seed");
      if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                        seed.get<std::int64_t>() < 0))
        fail("simulation.seed", "expected a nonnegative integer");
      cfg.seed = seed.get<std::uint64_t>();
    }
    if (cfg.horizon < 1) fail("simulation.horizon", "must be >= 1");
    if (cfg.runs < 1) fail("simulation.runs", "must be >= 1");
    if (cfg.burn_in < 0 || cfg.burn_in >= cfg.horizon)
      fail("simulation.burn_in", "must be in [0, horizon)");
  }

  if (root.contains("feasibility")) {
    const json& f = root.at("feasibility");
    check_keys(f, "feasibility", {"resolution", "fixed"});
    cfg.feas_resolution = get_integer_or(f, "feasibility", "resolution", 200);
    if (cfg.feas_resolution < 2) fail("feasibility.resolution", "must be >= 2");
    if (f.contains("fixed")) {
      const json& fixed = f.at("fixed");
      if (!fixed.is_object()) fail("feasibility.fixed", "expected an object of link -> kappa");
      std::set<int> seen;
      for (const auto& item : fixed.items()) {
        int link = 0;
        try {
          std::size_t pos = 0;
          link = std::stoi(item.key(), &pos);
          if (pos != item.key().size()) throw std::invalid_argument("trailing");
        } catch (...) {
          fail("feasibility.fixed", "keys must be 1-based link numbers");
        }
        if (link < 1 || link > L) fail("feasibility.fixed", "link number out of range");
        if (!seen.insert(link).second) fail("feasibility.fixed", "duplicate link");
        if (!item.value().is_number()) fail("feasibility.fixed", "kappa must be a number");
        const double kappa = item.value().get<double>();
        if (!(kappa > 0.0) || !(kappa < 1.0)) fail("feasibility.fixed", "kappa must be in (0, 1)");
        cfg.feas_fixed.emplace_back(link, kappa);
      }
      std::sort(cfg.feas_fixed.begin(), cfg.feas_fixed.end());
    }
  }

  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

json config_to_json(const ScenarioConfig& cfg) {
  json root;

  json topo;
  switch (cfg.topology.kind) {
    case TopologyKind::kCircular: topo["kind"] = "circular"; break;
    case TopologyKind::kAssemblyLine: topo["kind"] = "assembly_line"; break;
    case TopologyKind::kExplicit: topo["kind"] = "explicit"; break;
  }
  topo["links"] = cfg.topology.links;
  if (cfg.topology.kind == TopologyKind::kExplicit) {
    json tx = json::array(), rx = json::array();
    for (const auto& p : cfg.topology.tx) tx.push_back({p.x, p.y});
    for (const auto& p : cfg.topology.rx) rx.push_back({p.x, p.y});
    topo["tx"] = std::move(tx);
    topo["rx"] = std::move(rx);
  } else {
    topo["d1"] = cfg.topology.d1;
    topo["d2"] = cfg.topology.d2;
  }
  root["topology"] = std::move(topo);

  root["propagation"] = {
      {"frequency_mhz", cfg.propagation.frequency_hz / 1e6},
      {"pathloss_exponent", cfg.propagation.pathloss_exponent},
      {"shadowing_variance_db2", cfg.propagation.shadowing_variance_db},
      {"reference_distance_m", cfg.propagation.reference_distance_m},
  };
  root["channel"] = {
      {"packet_bits", cfg.packet_bits},
      {"noise_dbm", cfg.noise_dbm},
      {"p_max_dbm", cfg.p_max_dbm},
      {"p_min_dbm", cfg.p_min_dbm},
  };

  json systems = json::array();
  for (const auto& m : cfg.systems) {
    systems.push_back({
        {"F", m.F(0, 0)},
        {"H", m.H(0, 0)},
        {"R1", m.R1(0, 0)},
        {"R2", m.R2(0, 0)},
        {"m0", m.m0(0)},
        {"R0", m.R0(0, 0)},
        {"Theta", m.Theta(0, 0)},
        {"lambda", m.lambda},
    });
  }
  root["systems"] = std::move(systems);

  root["solver"] = {
      {"alpha", cfg.solver.alpha},
      {"epsilon", cfg.solver.epsilon},
      {"max_sweeps", cfg.solver.max_sweeps},
      {"update_mode",
       cfg.solver.update_mode == UpdateMode::kSnapshot ? "snapshot" : "in_place"},
  };
  root["state_grid"] = {
      {"levels", cfg.state_grid.levels},
      {"min", cfg.state_grid.min},
      {"max", cfg.state_grid.max},
  };
  json agrid = {{"levels", cfg.action_grid.levels}};
  if (cfg.action_grid.kappa_min) {
    agrid["kappa_min"] = *cfg.action_grid.kappa_min;
    agrid["kappa_max"] = *cfg.action_grid.kappa_max;
  }
  root["action_grid"] = std::move(agrid);
  root["simulation"] = {
      {"horizon", cfg.horizon},
      {"runs", cfg.runs},
      {"seed", cfg.seed},
      {"burn_in", cfg.burn_in},
  };
  json fixed = json::object();
  for (const auto& [link, kappa] : cfg.feas_fixed) {
    fixed[std::to_string(link)] = kappa;
  }
  root["feasibility"] = {
      {"resolution", cfg.feas_resolution},
      {"fixed", std::move(fixed)},
  };
  return root;
}

}  // namespace

std::string serialize_config(const ScenarioConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

std::string config_hash(const ScenarioConfig& config) {
  json j = config_to_json(config);
  j.erase("simulation");
  j.erase("feasibility");
  return sha1_hex(j.dump());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

}  // namespace wsntpc
