#include "wsntpc/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "wsntpc/config.hpp"
#include "wsntpc/policy_io.hpp"
#include "wsntpc/units.hpp"

namespace wsntpc {
namespace {

using nlohmann::json;

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string policy_path;
  std::string axis;
  std::string values;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool episodes_traces = false;
  bool force = false;
  int threads = 1;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write \"" + path.string() + "\"");
  out << content;
  if (!out) throw ConfigError("write failed for \"" + path.string() + "\"");
}

std::filesystem::path prepare_out_dir(const Options& opt) {
  std::filesystem::path dir(opt.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory \"" + opt.out_dir + "\"");
  return dir;
}

// Status strings go into one unquoted CSV field.
std::string sanitize_csv_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument("trailing characters");
      out.push_back(v);
    } catch (...) {
      throw ConfigError("--values: \"" + item + "\" is not a number");
    }
  }
  if (out.empty()) throw ConfigError("--values: need at least one value");
  return out;
}

int cmd_feasibility(const Options& opt) {
  const ScenarioConfig cfg = load_config_file(opt.config_path);
  const int L = cfg.topology.links;

  std::vector<double> fixed(L, 0.5);
  std::vector<bool> is_fixed(L, false);
  for (const auto& [link, kappa] : cfg.feas_fixed) {
    fixed[link - 1] = kappa;
    is_fixed[link - 1] = true;
  }
  std::vector<int> free_links;
  for (int l = 0; l < L; ++l) {
    if (!is_fixed[l]) free_links.push_back(l);
  }
  if (free_links.size() != 2)
    throw ConfigError("feasibility needs exactly two free links (fix all but two in feasibility.fixed)");

  const Topology topo = build_topology(cfg.topology);
  const GainMatrix gains = build_gain_matrix(topo, cfg.propagation);
  NoiseVector noise;
  noise.n.resize(L);
  for (int l = 0; l < L; ++l) noise.n(l) = dbm_to_watt(cfg.noise_dbm[l]);

  const FeasibilitySlice slice = feasibility_region_slice(
      fixed, free_links[0], free_links[1], cfg.feas_resolution, gains, noise,
      cfg.packet_bits, dbm_to_watt(cfg.p_max_dbm));

  std::string csv = "# config_hash=" + config_hash(cfg) + "\n";
  csv += "kappa_i,kappa_j,feasible\n";
  const int r = cfg.feas_resolution;
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) {
      csv += format_double(slice.kappa_values[a]);
      csv += ',';
      csv += format_double(slice.kappa_values[b]);
      csv += ',';
      csv += slice.feasible[static_cast<std::size_t>(a) * r + b] ? '1' : '0';
      csv += '\n';
    }
  }
  write_file(prepare_out_dir(opt) / "feasibility.csv", csv);
  return 0;
}

SolveMeta make_meta(const ScenarioConfig& cfg, const SolveResult& solved) {
  SolveMeta meta;
  meta.alpha = cfg.solver.alpha;
  meta.epsilon = cfg.solver.epsilon;
  meta.max_sweeps = cfg.solver.max_sweeps;
  meta.update_mode = cfg.solver.update_mode;
  for (const auto& m : cfg.systems) meta.lambda.push_back(m.lambda);
  meta.sweeps = solved.sweeps;
  meta.final_delta = solved.final_delta;
  meta.converged = solved.converged;
  return meta;
}

int cmd_solve(const Options& opt) {
  const ScenarioConfig cfg = load_config_file(opt.config_path);
  reset_channel_clamp_count();
  reset_interpolation_saturation_count();

  const ScenarioArtifacts art = build_artifacts(cfg);
  SolverConfig solver = cfg.solver;
  solver.threads = opt.threads;
  const SolveResult solved = value_iteration(art.grid, art.actions, art.models, solver);
  if (!solved.converged) {
    std::cerr << "warning: value iteration stopped at max_sweeps with delta "
              << solved.final_delta << "\n";
  }
  const Policy policy =
      extract_policy(solved.value, art.grid, art.actions, art.models, solver.alpha);

  PolicyDiagnostics diag;
  diag.actions = art.actions.diagnostics;
  diag.interpolation_saturations = interpolation_saturation_count();
  diag.channel_clamps = channel_clamp_count();
  write_file(prepare_out_dir(opt) / "policy.json",
             serialize_policy(policy, make_meta(cfg, solved), diag, config_hash(cfg)));
  return 0;
}

std::string trace_csv(const Trace& trace, const std::string& hash) {
  std::string csv = "# config_hash=" + hash + "\n";
  csv += "k,link,P,p_watt,p_dbm,kappa,beta,x,xhat,err\n";
  for (const TraceRow& row : trace.rows) {
    csv += std::to_string(row.k);
    csv += ',';
    csv += std::to_string(row.link);
    csv += ',';
    csv += format_double(row.P);
    csv += ',';
    csv += format_double(row.p_watt);
    csv += ',';
    csv += format_double(watt_to_dbm(row.p_watt));
    csv += ',';
    csv += format_double(row.kappa);
    csv += ',';
    csv += std::to_string(row.beta);
    csv += ',';
    csv += format_double(row.x);
    csv += ',';
    csv += format_double(row.xhat);
    csv += ',';
    csv += format_double(row.err);
    csv += '\n';
  }
  return csv;
}

json summary_json(const ScenarioConfig& cfg, const std::string& hash,
                  const MonteCarloSummary& sum, const SolveMeta& meta) {
  json j;
  j["config"] = json::parse(serialize_config(cfg));
  j["config_hash"] = hash;
  json links = json::array();
  for (std::size_t l = 0; l < sum.links.size(); ++l) {
    const LinkStats& ls = sum.links[l];
    links.push_back({
        {"link", l + 1},
        {"mean_P", ls.mean_cov},
        {"mean_p_watt", ls.mean_power_w},
        {"mean_p_dbm", watt_to_dbm(ls.mean_power_w)},
        {"P_halfwidth", ls.cov_halfwidth},
        {"p_watt_halfwidth", ls.power_halfwidth},
    });
  }
  j["links"] = std::move(links);
  j["network"] = {
      {"sum_mean_P", sum.total_mean_cov},
      {"sum_mean_p_watt", sum.total_mean_power_w},
      {"sum_P_halfwidth", sum.total_cov_halfwidth},
      {"sum_p_watt_halfwidth", sum.total_power_halfwidth},
  };
  j["solver"] = {
      {"alpha", meta.alpha},
      {"epsilon", meta.epsilon},
      {"max_sweeps", meta.max_sweeps},
      {"update_mode", meta.update_mode == UpdateMode::kSnapshot ? "snapshot" : "in_place"},
      {"lambda", meta.lambda},
      {"sweeps", meta.sweeps},
      {"final_delta", meta.final_delta},
      {"converged", meta.converged},
  };
  return j;
}

int cmd_simulate(const Options& opt) {
  ScenarioConfig cfg = load_config_file(opt.config_path);
  if (opt.seed_given) cfg.seed = opt.seed;
  if (opt.policy_path.empty()) throw ConfigError("simulate needs --policy <path>");
  const LoadedPolicy lp = load_policy_file(opt.policy_path);

  const std::string hash = config_hash(cfg);
  if (lp.config_hash != hash) {
    if (opt.force) {
      std::cerr << "warning: policy was solved for config hash " << lp.config_hash
                << ", current config hashes to " << hash << "; proceeding (--force)\n";
    } else {
      throw ConfigError("policy config hash " + lp.config_hash +
                        " does not match this config (" + hash +
                        "); rerun solve or pass --force");
    }
  }

  const ScenarioArtifacts art = build_artifacts(cfg);
  const MonteCarloResult mc =
      monte_carlo(lp.policy, cfg, art, opt.threads, opt.episodes_traces);

  const auto dir = prepare_out_dir(opt);
  write_file(dir / "summary.json",
             summary_json(cfg, hash, mc.summary, lp.meta).dump(2) + "\n");
  if (opt.episodes_traces) {
    for (std::size_t e = 0; e < mc.traces.size(); ++e) {
      std::ostringstream name;
      name << "trace_ep" << std::setw(4) << std::setfill('0') << e << ".csv";
      write_file(dir / name.str(), trace_csv(mc.traces[e], hash));
    }
  }
  return 0;
}

int cmd_sweep(const Options& opt) {
  const ScenarioConfig cfg = load_config_file(opt.config_path);
  ScenarioConfig base = cfg;
  if (opt.seed_given) base.seed = opt.seed;

  SweepAxis axis;
  if (opt.axis == "lambda") {
    axis = SweepAxis::kLambda;
  } else if (opt.axis == "alpha") {
    axis = SweepAxis::kAlpha;
  } else if (opt.axis == "d2_over_d1") {
    axis = SweepAxis::kD2OverD1;
  } else {
    throw ConfigError("--axis must be lambda, alpha, or d2_over_d1");
  }
  const std::vector<double> values = parse_value_list(opt.values);
  if (axis == SweepAxis::kD2OverD1 && base.topology.kind == TopologyKind::kExplicit)
    throw ConfigError("d2_over_d1 sweeps need a parametric (circular/assembly_line) topology");

  const std::vector<SweepRow> rows = sweep(base, axis, values, opt.threads);

  const int L = base.topology.links;
  std::string csv = "# config_hash=" + config_hash(base) + "\n";
  csv += "value,status,sum_P,sum_p_watt,sum_P_halfwidth,sum_p_watt_halfwidth,"
         "sweeps,final_delta,converged,action_count";
  for (int l = 1; l <= L; ++l) {
    csv += ",P_" + std::to_string(l) + ",p_watt_" + std::to_string(l) + ",P_halfwidth_" +
           std::to_string(l) + ",p_watt_halfwidth_" + std::to_string(l);
  }
  csv += '\n';
  bool any_ok = false;
  for (const SweepRow& row : rows) {
    csv += format_double(row.value);
    csv += ',';
    csv += sanitize_csv_field(row.status);
    if (row.ok) {
      any_ok = true;
      const MonteCarloSummary& s = row.summary;
      csv += ',' + format_double(s.total_mean_cov);
      csv += ',' + format_double(s.total_mean_power_w);
      csv += ',' + format_double(s.total_cov_halfwidth);
      csv += ',' + format_double(s.total_power_halfwidth);
      csv += ',' + std::to_string(row.sweeps);
      csv += ',' + format_double(row.final_delta);
      csv += row.converged ? ",1" : ",0";
      csv += ',' + std::to_string(row.action_count);
      for (int l = 0; l < L; ++l) {
        csv += ',' + format_double(s.links[l].mean_cov);
        csv += ',' + format_double(s.links[l].mean_power_w);
        csv += ',' + format_double(s.links[l].cov_halfwidth);
        csv += ',' + format_double(s.links[l].power_halfwidth);
      }
    } else {
      for (int i = 0; i < 8 + 4 * L; ++i) csv += ',';
    }
    csv += '\n';
  }
  write_file(prepare_out_dir(opt) / "sweep.csv", csv);
  if (!any_ok) {
    std::cerr << "error: every sweep point failed\n";
    return 3;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Minimum-power transmission policies for remote state estimation "
               "over a shared wireless channel"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Path to the scenario config JSON")
        ->required();
    sub->add_option("--out", opt.out_dir, "Output directory (created if needed)");
    sub->add_option("--threads", opt.threads, "Worker thread count")
        ->check(CLI::Range(1, 256));
  };

  CLI::App* feas = app.add_subcommand(
      "feasibility", "Sample the jointly achievable success-rate region on a 2-D slice");
  add_common(feas);

  CLI::App* solve = app.add_subcommand(
      "solve", "Compute the optimal power-control policy for a scenario");
  add_common(solve);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run Monte Carlo closed-loop episodes under a solved policy");
  add_common(simulate);
  simulate->add_option("--policy", opt.policy_path, "Policy JSON produced by solve");
  CLI::Option* seed_opt_sim =
      simulate->add_option("--seed", opt.seed, "Override the config's master seed");
  simulate->add_flag("--episodes-traces", opt.episodes_traces,
                     "Write one trace CSV per episode");
  simulate->add_flag("--force", opt.force, "Proceed despite a config-hash mismatch");

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Re-solve and re-simulate along one parameter axis");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--axis", opt.axis, "lambda | alpha | d2_over_d1")->required();
  sweep_cmd->add_option("--values", opt.values, "Comma-separated list of axis values")
      ->required();
  CLI::Option* seed_opt_sweep =
      sweep_cmd->add_option("--seed", opt.seed, "Override the config's master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  opt.seed_given = seed_opt_sim->count() > 0 || seed_opt_sweep->count() > 0;

  try {
    if (app.got_subcommand(feas)) return cmd_feasibility(opt);
    if (app.got_subcommand(solve)) return cmd_solve(opt);
    if (app.got_subcommand(simulate)) return cmd_simulate(opt);
    if (app.got_subcommand(sweep_cmd)) return cmd_sweep(opt);
    std::cerr << "error: no command\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace wsntpc
