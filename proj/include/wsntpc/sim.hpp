// Scenario assembly and closed-loop simulation: topology constructors, the
// per-episode estimator/channel loop under a computed policy, Monte Carlo
// aggregation, and one-axis parameter sweeps.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsntpc/channel.hpp"
#include "wsntpc/estimation.hpp"
#include "wsntpc/mdp.hpp"
#include "wsntpc/power_control.hpp"
#include "wsntpc/rng.hpp"

namespace wsntpc {

enum class TopologyKind { kCircular, kAssemblyLine, kExplicit };

struct TopologySpec {
  TopologyKind kind = TopologyKind::kCircular;
  int links = 0;
  double d1 = 0.0;  // meters; see build_topology for the role per kind
  double d2 = 0.0;
  std::vector<Vec2> tx;  // explicit kind only
  std::vector<Vec2> rx;
};

// circular: all receivers at the origin, transmitter l on a ray at angle
// 2*pi*(l-1)/L; the reference link (link 2 when L = 3, else link ceil(L/2),
// 1-based) sits at radius d1 and every other link at radius d2.
// assembly_line: transmitter l at ((l-1)*d2, 0), receiver l at ((l-1)*d2, d1).
Topology build_topology(const TopologySpec& spec);

struct StateGridSpec {
  int levels = 0;
  double min = 0.0;
  double max = 0.0;
};

struct ActionGridSpec {
  int levels = 0;
  // Explicit kappa range endpoints are included in the level set; when
  // absent, levels default to r/(levels+1) for r = 1..levels.
  std::optional<double> kappa_min;
  std::optional<double> kappa_max;
};

// Identical level lists for every sensor.
std::vector<std::vector<double>> make_action_levels(const ActionGridSpec& spec,
                                                    int sensors);

// Full scenario description; powers in dBm and frequency in Hz live only
// here and in the config file layer, the artifacts below are in watts.
struct ScenarioConfig {
  TopologySpec topology;
  PropagationParams propagation;
  std::vector<SystemModel> systems;  // scalar models, lambda resolved
  int packet_bits = 120;
  std::vector<double> noise_dbm;     // one entry per link
  double p_max_dbm = 7.0;
  double p_min_dbm = -24.0;
  SolverConfig solver;
  StateGridSpec state_grid;
  ActionGridSpec action_grid;
  int horizon = 500;
  int runs = 50;
  int burn_in = 0;
  std::uint64_t seed = 1;
  int feas_resolution = 200;
  std::vector<std::pair<int, double>> feas_fixed;  // (1-based link, kappa)
};

// Everything derived from a config that the planner and simulator consume.
struct ScenarioArtifacts {
  Topology topology;
  GainMatrix gains;
  NoiseVector noise;
  double p_max_w = 0.0;
  double p_min_w = 0.0;
  StateGrid grid;
  FeasibleActionSet actions;
  std::vector<SystemModel> models;
};

ScenarioArtifacts build_artifacts(const ScenarioConfig& config);

// Nearest grid level to x (ties toward the lower index).
int nearest_level(const std::vector<double>& levels, double x);

struct TraceRow {
  int k = 0;
  int link = 0;  // 1-based
  double P = 0.0;
  double p_watt = 0.0;
  double kappa = 0.0;
  int beta = 0;
  double x = 0.0;
  double xhat = 0.0;
  double err = 0.0;
};

struct Trace {
  int links = 0;
  int horizon = 0;
  std::vector<TraceRow> rows;  // step-major, link-minor
};

// Test hook: overrides every arrival indicator (no Bernoulli draws are
// consumed when set; plant noise draws are unaffected).
struct EpisodeHooks {
  std::optional<int> forced_beta;
};

// One closed-loop episode.  Per step, in order: nearest-grid-point policy
// lookup, the L Bernoulli arrival draws (link order), then per link the
// plant step (process noise first, then measurement noise).  The row for
// step k records the pre-update state/estimate/covariance together with the
// commanded action and the arrival outcome.
Trace run_episode(const Policy& policy, const ScenarioConfig& config,
                  const ScenarioArtifacts& artifacts, std::uint64_t seed,
                  const EpisodeHooks& hooks = {});

struct LinkStats {
  double mean_cov = 0.0;
  double mean_power_w = 0.0;
  double cov_halfwidth = 0.0;
  double power_halfwidth = 0.0;
};

struct MonteCarloSummary {
  std::vector<LinkStats> links;
  // Exact sums of the per-link means; the half-widths come from the
  // per-episode network totals.
  double total_mean_cov = 0.0;
  double total_mean_power_w = 0.0;
  double total_cov_halfwidth = 0.0;
  double total_power_halfwidth = 0.0;
  int runs = 0;
  int horizon = 0;
  int burn_in = 0;
};

struct MonteCarloResult {
  MonteCarloSummary summary;
  std::vector<Trace> traces;  // filled only when keep_traces is set
};

// `runs` episodes with per-episode seeds mix_seed(config.seed, episode).
// Averages exclude the first burn_in steps.  Episodes may run on parallel
// workers; results merge in episode order, so the output is independent of
// the thread count.
MonteCarloResult monte_carlo(const Policy& policy, const ScenarioConfig& config,
                             const ScenarioArtifacts& artifacts, int threads = 1,
                             bool keep_traces = false);

enum class SweepAxis { kLambda, kAlpha, kD2OverD1 };

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string status;  // "ok" or the failure reason
  MonteCarloSummary summary;
  int sweeps = 0;
  double final_delta = 0.0;
  bool converged = false;
  int action_count = 0;
};

// Re-solves and re-simulates the scenario at each value of the swept
// parameter.  A point whose solve fails (e.g. empty action set) is flagged
// in its row and the sweep continues.
std::vector<SweepRow> sweep(const ScenarioConfig& base, SweepAxis axis,
                            const std::vector<double>& values, int threads = 1);

}  // namespace wsntpc
