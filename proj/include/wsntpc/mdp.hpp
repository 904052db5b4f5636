// Discounted Markov decision process over discretized per-system estimation
// covariances, solved by value iteration.  States are points on a product
// grid of scalar covariance levels; actions are the jointly achievable
// packet-success-rate vectors; the stage cost trades transmit power against
// estimation distortion.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "wsntpc/estimation.hpp"
#include "wsntpc/power_control.hpp"

namespace wsntpc {

// Product grid over per-system covariance levels.  Flat indices run with the
// last system's axis fastest (row-major).
struct StateGrid {
  std::vector<std::vector<double>> levels;  // per system, strictly ascending, >= 0

  int systems() const { return static_cast<int>(levels.size()); }
  std::size_t size() const;
  std::size_t flat_index(const std::vector<int>& idx) const;
  void unflatten(std::size_t flat, std::vector<int>& idx) const;
  std::vector<double> point(std::size_t flat) const;

  static StateGrid uniform(int systems, int levels_per_system, double lo, double hi);
};

void validate_grid(const StateGrid& grid);

struct ValueFunction {
  std::vector<double> v;  // indexed by StateGrid flat index
};

// All 2^L arrival outcomes (bit l set = system l's packet arrived), ordered
// by popcount and numerically within equal popcount.  Every reduction over
// outcomes or interpolation corners walks this order, grouped by popcount;
// for two systems that makes the sums exactly invariant under swapping the
// systems, so symmetric networks yield bitwise-symmetric value functions.
std::vector<unsigned> outcome_order(int systems);

// Probability of an arrival outcome under success rates kappa:
// prod_l (bit l ? kappa_l : 1 - kappa_l).
double transition_probability(const Eigen::VectorXd& kappa, unsigned outcome, int systems);

// The 2^L successor covariance vectors of state S, one per arrival outcome,
// in outcome_order.  Successors do not depend on the action; the action only
// reweights them.
std::vector<std::vector<double>> reachable_states(const std::vector<double>& state,
                                                  const std::vector<SystemModel>& models);

// Stage cost: total transmit power of the action plus the weighted
// distortion sum_l lambda_l * Theta_l * P_l.
double stage_cost(const std::vector<double>& state, const Action& action,
                  const std::vector<SystemModel>& models);

// Multilinear interpolation of J at an arbitrary covariance vector.
// Coordinates outside the grid range are clamped to the boundary; each
// clamped coordinate bumps the saturation diagnostics counter.
double interpolate_value(const ValueFunction& value, const StateGrid& grid,
                         const std::vector<double>& state);

std::uint64_t interpolation_saturation_count();
void reset_interpolation_saturation_count();

// One Bellman update at a grid state, reading J snapshot-style:
//   min_a [ stage_cost + alpha * E_outcome J(successor) ].
// Returns the updated value and the argmin action index.  Ties resolve by
// lower total power, then lower action index.
std::pair<double, int> target_update(const ValueFunction& value, const StateGrid& grid,
                                     std::size_t flat, const FeasibleActionSet& actions,
                                     const std::vector<SystemModel>& models,
                                     double alpha);

// Full snapshot application of the Bellman operator (every state updated
// from the same input J).  Exposed for contraction/monotonicity tests.
ValueFunction apply_bellman(const ValueFunction& value, const StateGrid& grid,
                            const FeasibleActionSet& actions,
                            const std::vector<SystemModel>& models, double alpha);

enum class UpdateMode {
  kInPlace,   // Gauss-Seidel: states read values already updated this sweep
  kSnapshot,  // Jacobi: whole sweep reads the previous iterate
};

struct SolverConfig {
  double alpha = 0.9;        // discount, in [0, 1)
  double epsilon = 0.05;     // sweep-to-sweep sup-norm stopping threshold
  int max_sweeps = 10000;
  UpdateMode update_mode = UpdateMode::kInPlace;
  int threads = 1;           // used by snapshot sweeps only
};

struct SolveResult {
  ValueFunction value;
  int sweeps = 0;
  double final_delta = 0.0;
  bool converged = false;
};

// Value iteration from J = 0 until the sweep delta falls to epsilon or
// max_sweeps is hit.  Snapshot sweeps give identical results for any thread
// count; in-place sweeps are sequential by nature and ignore `threads`.
SolveResult value_iteration(const StateGrid& grid, const FeasibleActionSet& actions,
                            const std::vector<SystemModel>& models,
                            const SolverConfig& config);

struct Policy {
  StateGrid grid;
  FeasibleActionSet actions;
  std::vector<std::int32_t> action_index;  // per flat grid state
};

// Greedy policy of a (converged) value function, using the same update and
// tie-break as value iteration.
Policy extract_policy(const ValueFunction& value, const StateGrid& grid,
                      const FeasibleActionSet& actions,
                      const std::vector<SystemModel>& models, double alpha);

}  // namespace wsntpc
