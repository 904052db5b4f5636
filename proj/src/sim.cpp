#include "wsntpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "wsntpc/units.hpp"

namespace wsntpc {
namespace {

void validate_config(const ScenarioConfig& config) {
  const int L = config.topology.links;
  if (L < 1) throw std::invalid_argument("config: need at least one link");
  if (static_cast<int>(config.systems.size()) != L)
    throw std::invalid_argument("config: need one system model per link");
  if (static_cast<int>(config.noise_dbm.size()) != L)
    throw std::invalid_argument("config: need one noise entry per link");
  for (const auto& m : config.systems) {
    validate_model(m);
    if (m.state_dim() != 1 || m.meas_dim() != 1)
      throw std::invalid_argument("config: scalar system models only");
  }
  if (config.packet_bits < 1) throw std::invalid_argument("config: packet_bits must be >= 1");
  if (!(config.p_max_dbm > config.p_min_dbm))
    throw std::invalid_argument("config: p_max_dbm must exceed p_min_dbm");
  if (config.horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (config.runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (config.burn_in < 0 || config.burn_in >= config.horizon)
    throw std::invalid_argument("config: burn_in must be in [0, horizon)");
  if (config.state_grid.levels < 2 || !(config.state_grid.max > config.state_grid.min) ||
      config.state_grid.min < 0.0)
    throw std::invalid_argument("config: state grid needs >= 2 levels and 0 <= min < max");
}

struct EpisodeStats {
  std::vector<double> mean_cov;      // per link
  std::vector<double> mean_power;    // per link
  double total_cov = 0.0;
  double total_power = 0.0;
};

EpisodeStats episode_stats(const Trace& trace, int burn_in) {
  const int L = trace.links;
  const int steps = trace.horizon - burn_in;
  EpisodeStats st;
  st.mean_cov.assign(L, 0.0);
  st.mean_power.assign(L, 0.0);
  for (const auto& row : trace.rows) {
    if (row.k < burn_in) continue;
    st.mean_cov[row.link - 1] += row.P;
    st.mean_power[row.link - 1] += row.p_watt;
  }
  for (int l = 0; l < L; ++l) {
    st.mean_cov[l] /= steps;
    st.mean_power[l] /= steps;
    st.total_cov += st.mean_cov[l];
    st.total_power += st.mean_power[l];
  }
  return st;
}

// 95% half-width over per-episode statistics (0 for a single run).
double halfwidth(const std::vector<double>& xs, double mean) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return 1.96 * std::sqrt(ss / static_cast<double>(n - 1)) /
         std::sqrt(static_cast<double>(n));
}

}  // namespace

Topology build_topology(const TopologySpec& spec) {
  if (spec.links < 1) throw std::invalid_argument("topology: links must be >= 1");
  Topology topo;
  switch (spec.kind) {
    case TopologyKind::kCircular: {
      if (!(spec.d1 > 0.0) || !(spec.d2 > 0.0))
        throw std::invalid_argument("topology: d1 and d2 must be > 0");
      const int ref = (spec.links + 1) / 2;  // 1-based reference link
      for (int l = 1; l <= spec.links; ++l) {
        const double radius = (l == ref) ? spec.d1 : spec.d2;
        const double angle = 2.0 * std::numbers::pi * (l - 1) / spec.links;
        topo.tx.push_back({radius * std::cos(angle), radius * std::sin(angle)});
        topo.rx.push_back({0.0, 0.0});
      }
      break;
    }
    case TopologyKind::kAssemblyLine: {
      if (!(spec.d1 > 0.0) || !(spec.d2 > 0.0))
        throw std::invalid_argument("topology: d1 and d2 must be > 0");
      for (int l = 1; l <= spec.links; ++l) {
        const double x = (l - 1) * spec.d2;
        topo.tx.push_back({x, 0.0});
        topo.rx.push_back({x, spec.d1});
      }
      break;
    }
    case TopologyKind::kExplicit: {
      if (static_cast<int>(spec.tx.size()) != spec.links ||
          static_cast<int>(spec.rx.size()) != spec.links)
        throw std::invalid_argument("topology: explicit coordinates must match link count");
      topo.tx = spec.tx;
      topo.rx = spec.rx;
      break;
    }
    default:
      throw std::invalid_argument("topology: invalid kind");
  }
  validate_topology(topo);
  return topo;
}

std::vector<std::vector<double>> make_action_levels(const ActionGridSpec& spec,
                                                    int sensors) {
  if (sensors < 1) throw std::invalid_argument("action levels: sensors must be >= 1");
  if (spec.levels < 1) throw std::invalid_argument("action levels: need at least one level");
  if (spec.kappa_min.has_value() != spec.kappa_max.has_value())
    throw std::invalid_argument("action levels: kappa_min and kappa_max must be given together");

  std::vector<double> axis(spec.levels);
  if (spec.kappa_min) {
    const double lo = *spec.kappa_min;
    const double hi = *spec.kappa_max;
    if (!(lo > 0.0) || !(hi < 1.0) || !(hi > lo))
      throw std::invalid_argument("action levels: need 0 < kappa_min < kappa_max < 1");
    if (spec.levels < 2) throw std::invalid_argument("action levels: a range needs >= 2 levels");
    for (int r = 0; r < spec.levels; ++r) {
      axis[r] = lo + (hi - lo) * static_cast<double>(r) / (spec.levels - 1);
    }
  } else {
    for (int r = 0; r < spec.levels; ++r) {
      axis[r] = static_cast<double>(r + 1) / (spec.levels + 1);
    }
  }
  return std::vector<std::vector<double>>(sensors, axis);
}

ScenarioArtifacts build_artifacts(const ScenarioConfig& config) {
  validate_config(config);
  ScenarioArtifacts art;
  art.topology = build_topology(config.topology);
  art.gains = build_gain_matrix(art.topology, config.propagation);
  art.noise.n.resize(config.topology.links);
  for (int l = 0; l < config.topology.links; ++l) {
    art.noise.n(l) = dbm_to_watt(config.noise_dbm[l]);
  }
  art.p_max_w = dbm_to_watt(config.p_max_dbm);
  art.p_min_w = dbm_to_watt(config.p_min_dbm);
  art.grid = StateGrid::uniform(config.topology.links, config.state_grid.levels,
                                config.state_grid.min, config.state_grid.max);
  art.actions = enumerate_feasible_actions(
      make_action_levels(config.action_grid, config.topology.links), art.gains,
      art.noise, config.packet_bits, art.p_max_w, art.p_min_w);
  art.models = config.systems;
  return art;
}

int nearest_level(const std::vector<double>& levels, double x) {
  const int m = static_cast<int>(levels.size());
  const auto it = std::lower_bound(levels.begin(), levels.end(), x);
  if (it == levels.begin()) return 0;
  if (it == levels.end()) return m - 1;
  const int hi = static_cast<int>(it - levels.begin());
  const int lo = hi - 1;
  // Tie at the exact midpoint goes to the lower index.
  return (x - levels[lo] <= levels[hi] - x) ? lo : hi;
}

Trace run_episode(const Policy& policy, const ScenarioConfig& config,
                  const ScenarioArtifacts& artifacts, std::uint64_t seed,
                  const EpisodeHooks& hooks) {
  const int L = config.topology.links;
  if (policy.grid.systems() != L || static_cast<int>(policy.actions.levels.size()) != L)
    throw std::invalid_argument("run_episode: policy/scenario link count mismatch");
  if (policy.action_index.size() != policy.grid.size())
    throw std::invalid_argument("run_episode: policy table size mismatch");
  for (const std::int32_t a : policy.action_index) {
    if (a < 0 || a >= policy.actions.size())
      throw std::invalid_argument("run_episode: action index out of range");
  }
  if (hooks.forced_beta && *hooks.forced_beta != 0 && *hooks.forced_beta != 1)
    throw std::invalid_argument("run_episode: forced beta must be 0 or 1");

  Rng rng(seed);
  std::vector<double> x(L), xhat(L), P(L);
  for (int l = 0; l < L; ++l) {
    const SystemModel& m = artifacts.models[l];
    x[l] = m.m0(0) + std::sqrt(m.R0(0, 0)) * sample_standard_normal(rng);
    xhat[l] = m.m0(0);
    P[l] = m.R0(0, 0);
  }

  Trace trace;
  trace.links = L;
  trace.horizon = config.horizon;
  trace.rows.reserve(static_cast<std::size_t>(config.horizon) * L);

  std::vector<int> idx(L);
  std::vector<int> beta(L);
  for (int k = 0; k < config.horizon; ++k) {
    for (int l = 0; l < L; ++l) idx[l] = nearest_level(policy.grid.levels[l], P[l]);
    const std::size_t flat = policy.grid.flat_index(idx);
    const Action& act = policy.actions.actions[policy.action_index[flat]];

    if (hooks.forced_beta) {
      std::fill(beta.begin(), beta.end(), *hooks.forced_beta);
    } else {
      for (int l = 0; l < L; ++l) {
        beta[l] = uniform_unit(rng) < act.kappa(l) ? 1 : 0;
      }
    }

    for (int l = 0; l < L; ++l) {
      TraceRow row;
      row.k = k;
      row.link = l + 1;
      row.P = P[l];
      row.p_watt = act.p(l);
      row.kappa = act.kappa(l);
      row.beta = beta[l];
      row.x = x[l];
      row.xhat = xhat[l];
      row.err = x[l] - xhat[l];
      trace.rows.push_back(row);
    }

    for (int l = 0; l < L; ++l) {
      const SystemModel& m = artifacts.models[l];
      Eigen::VectorXd xv(1);
      xv(0) = x[l];
      const auto [x_next, y] = plant_step(xv, m, rng);
      xhat[l] = estimate_update(xhat[l], P[l], y(0), beta[l], m);
      P[l] = covariance_update(P[l], beta[l], m);
      x[l] = x_next(0);
    }
  }
  return trace;
}

MonteCarloResult monte_carlo(const Policy& policy, const ScenarioConfig& config,
                             const ScenarioArtifacts& artifacts, int threads,
                             bool keep_traces) {
  const int L = config.topology.links;
  const int runs = config.runs;
  std::vector<EpisodeStats> stats(runs);
  MonteCarloResult result;
  if (keep_traces) result.traces.resize(runs);

  const auto work = [&](int e0, int e1) {
    for (int e = e0; e < e1; ++e) {
      Trace trace = run_episode(policy, config, artifacts, mix_seed(config.seed, e));
      stats[e] = episode_stats(trace, config.burn_in);
      if (keep_traces) result.traces[e] = std::move(trace);
    }
  };

  const int nt = std::clamp(threads, 1, runs);
  if (nt == 1) {
    work(0, runs);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int i = 0; i < nt; ++i) {
      pool.emplace_back(work, runs * i / nt, runs * (i + 1) / nt);
    }
    for (auto& th : pool) th.join();
  }

  MonteCarloSummary& sum = result.summary;
  sum.links.resize(L);
  sum.runs = runs;
  sum.horizon = config.horizon;
  sum.burn_in = config.burn_in;
  std::vector<double> scratch(runs);
  for (int l = 0; l < L; ++l) {
    LinkStats& ls = sum.links[l];
    for (int e = 0; e < runs; ++e) ls.mean_cov += stats[e].mean_cov[l];
    for (int e = 0; e < runs; ++e) ls.mean_power_w += stats[e].mean_power[l];
    ls.mean_cov /= runs;
    ls.mean_power_w /= runs;
    for (int e = 0; e < runs; ++e) scratch[e] = stats[e].mean_cov[l];
    ls.cov_halfwidth = halfwidth(scratch, ls.mean_cov);
    for (int e = 0; e < runs; ++e) scratch[e] = stats[e].mean_power[l];
    ls.power_halfwidth = halfwidth(scratch, ls.mean_power_w);
    sum.total_mean_cov += ls.mean_cov;
    sum.total_mean_power_w += ls.mean_power_w;
  }
  for (int e = 0; e < runs; ++e) scratch[e] = stats[e].total_cov;
  {
    double mean = 0.0;
    for (double v : scratch) mean += v;
    mean /= runs;
    sum.total_cov_halfwidth = halfwidth(scratch, mean);
  }
  for (int e = 0; e < runs; ++e) scratch[e] = stats[e].total_power;
  {
    double mean = 0.0;
    for (double v : scratch) mean += v;
    mean /= runs;
    sum.total_power_halfwidth = halfwidth(scratch, mean);
  }
  return result;
}

std::vector<SweepRow> sweep(const ScenarioConfig& base, SweepAxis axis,
                            const std::vector<double>& values, int threads) {
  if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
  if (axis == SweepAxis::kD2OverD1 && base.topology.kind == TopologyKind::kExplicit)
    throw std::invalid_argument("sweep: d2_over_d1 needs a parametric topology");

  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (const double value : values) {
    SweepRow row;
    row.value = value;
    ScenarioConfig cfg = base;
    try {
      switch (axis) {
        case SweepAxis::kLambda:
          if (!(value >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
          for (auto& m : cfg.systems) m.lambda = value;
          break;
        case SweepAxis::kAlpha:
          cfg.solver.alpha = value;
          break;
        case SweepAxis::kD2OverD1:
          if (!(value > 0.0)) throw std::invalid_argument("d2_over_d1 must be > 0");
          cfg.topology.d2 = value * cfg.topology.d1;
          break;
      }
      const ScenarioArtifacts art = build_artifacts(cfg);
      SolverConfig solver = cfg.solver;
      solver.threads = threads;
      const SolveResult solved = value_iteration(art.grid, art.actions, art.models, solver);
      const Policy policy =
          extract_policy(solved.value, art.grid, art.actions, art.models, solver.alpha);
      row.summary = monte_carlo(policy, cfg, art, threads).summary;
      row.sweeps = solved.sweeps;
      row.final_delta = solved.final_delta;
      row.converged = solved.converged;
      row.action_count = art.actions.size();
      row.ok = true;
      row.status = "ok";
    } catch (const std::exception& e) {
      row.ok = false;
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace wsntpc
