#include "wsntpc/mdp.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace wsntpc {
namespace {

// Hard cap: the grid has M^L states and updates touch 2^L outcomes, so
// anything past this is out of reach regardless of hardware.
constexpr int kMaxSystems = 12;

std::atomic<std::uint64_t> g_saturation_count{0};

struct AxisPos {
  int lo = 0;   // lower bracket index
  int hi = 0;   // upper bracket index (== lo on single-level axes)
  double t = 0; // fraction toward hi
};

AxisPos locate(const std::vector<double>& levels, double x) {
  const int m = static_cast<int>(levels.size());
  if (m == 1) return {0, 0, 0.0};
  if (x < levels.front()) {
    g_saturation_count.fetch_add(1, std::memory_order_relaxed);
    return {0, 1, 0.0};
  }
  if (x > levels.back()) {
    g_saturation_count.fetch_add(1, std::memory_order_relaxed);
    return {m - 2, m - 1, 1.0};
  }
  int j = static_cast<int>(std::upper_bound(levels.begin(), levels.end(), x) -
                           levels.begin()) - 1;
  if (j > m - 2) j = m - 2;
  return {j, j + 1, (x - levels[j]) / (levels[j + 1] - levels[j])};
}

// All (state, outcome) interpolation stencils plus the per-action data the
// Bellman kernel consumes.  Corner and outcome reductions both walk `masks`
// (popcount-major) and accumulate per popcount group before combining
// groups, which keeps the sums exactly symmetric under swapping two
// identical systems (group reorderings there are single commutative swaps).
struct Precomp {
  int L = 0;
  int B = 0;                       // 2^L: outcome count == corner count
  std::size_t N = 0;
  int A = 0;
  std::vector<unsigned> masks;     // popcount-major mask order
  std::vector<int> goff;           // group offsets into masks, size L + 2
  std::vector<std::uint32_t> corner_idx;  // [s][outcome][corner]
  std::vector<double> corner_w;
  std::vector<double> state_cost;         // weighted distortion part
  std::vector<double> action_power;
  std::vector<double> action_prob;        // [a][outcome slot]
};

double weighted_distortion(const std::vector<double>& state,
                           const std::vector<SystemModel>& models) {
  double acc = 0.0;
  for (std::size_t l = 0; l < models.size(); ++l) {
    acc += models[l].lambda * models[l].Theta(0, 0) * state[l];
  }
  return acc;
}

void fill_stencil(const StateGrid& grid, const std::vector<std::size_t>& strides,
                  const std::vector<unsigned>& masks, const std::vector<double>& pt,
                  std::uint32_t* idx_out, double* w_out) {
  const int L = grid.systems();
  std::size_t lo_c[kMaxSystems], hi_c[kMaxSystems];
  double t[kMaxSystems];
  for (int d = 0; d < L; ++d) {
    const AxisPos pos = locate(grid.levels[d], pt[d]);
    lo_c[d] = static_cast<std::size_t>(pos.lo) * strides[d];
    hi_c[d] = static_cast<std::size_t>(pos.hi) * strides[d];
    t[d] = pos.t;
  }
  for (std::size_t c = 0; c < masks.size(); ++c) {
    const unsigned mask = masks[c];
    std::size_t flat = 0;
    double w = 1.0;
    for (int d = 0; d < L; ++d) {
      if (mask & (1u << d)) {
        flat += hi_c[d];
        w *= t[d];
      } else {
        flat += lo_c[d];
        w *= 1.0 - t[d];
      }
    }
    idx_out[c] = static_cast<std::uint32_t>(flat);
    w_out[c] = w;
  }
}

void validate_problem(const StateGrid& grid, const FeasibleActionSet& actions,
                      const std::vector<SystemModel>& models) {
  validate_grid(grid);
  const int L = grid.systems();
  if (L > kMaxSystems) throw std::invalid_argument("planner supports at most 12 systems");
  if (static_cast<int>(models.size()) != L)
    throw std::invalid_argument("need one system model per grid axis");
  if (static_cast<int>(actions.levels.size()) != L)
    throw std::invalid_argument("action set sensor count must match the grid");
  for (const auto& m : models) {
    validate_model(m);
    if (m.state_dim() != 1 || m.meas_dim() != 1)
      throw std::invalid_argument("planner handles scalar systems only");
  }
  if (actions.actions.empty())
    throw std::domain_error("no feasible action: the planner has nothing to choose from");
  if (grid.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("state grid too large");
}

std::vector<std::size_t> grid_strides(const StateGrid& grid) {
  const int L = grid.systems();
  std::vector<std::size_t> strides(L, 1);
  for (int d = L - 2; d >= 0; --d) {
    strides[d] = strides[d + 1] * grid.levels[d + 1].size();
  }
  return strides;
}

Precomp build_precomp(const StateGrid& grid, const FeasibleActionSet& actions,
                      const std::vector<SystemModel>& models) {
  Precomp pc;
  pc.L = grid.systems();
  pc.B = 1 << pc.L;
  pc.N = grid.size();
  pc.A = actions.size();
  pc.masks = outcome_order(pc.L);
  pc.goff.assign(pc.L + 2, 0);
  for (unsigned mask : pc.masks) ++pc.goff[std::popcount(mask) + 1];
  for (int g = 0; g + 1 <= pc.L + 1; ++g) pc.goff[g + 1] += pc.goff[g];

  pc.action_power.resize(pc.A);
  pc.action_prob.resize(static_cast<std::size_t>(pc.A) * pc.B);
  for (int a = 0; a < pc.A; ++a) {
    pc.action_power[a] = actions.actions[a].total_power;
    for (int b = 0; b < pc.B; ++b) {
      pc.action_prob[static_cast<std::size_t>(a) * pc.B + b] =
          transition_probability(actions.actions[a].kappa, pc.masks[b], pc.L);
    }
  }

  const auto strides = grid_strides(grid);
  pc.state_cost.resize(pc.N);
  pc.corner_idx.resize(pc.N * pc.B * pc.B);
  pc.corner_w.resize(pc.N * pc.B * pc.B);
  std::vector<double> succ(pc.L);
  for (std::size_t s = 0; s < pc.N; ++s) {
    const std::vector<double> pt = grid.point(s);
    pc.state_cost[s] = weighted_distortion(pt, models);
    for (int b = 0; b < pc.B; ++b) {
      const unsigned mask = pc.masks[b];
      for (int l = 0; l < pc.L; ++l) {
        succ[l] = covariance_update(pt[l], (mask >> l) & 1u, models[l]);
      }
      const std::size_t off = (s * pc.B + b) * pc.B;
      fill_stencil(grid, strides, pc.masks, succ, pc.corner_idx.data() + off,
                   pc.corner_w.data() + off);
    }
  }
  return pc;
}

// Interpolates J at every successor of state s (one value per outcome slot).
inline void successor_values(const Precomp& pc, const double* j, std::size_t s,
                             double* jb) {
  for (int b = 0; b < pc.B; ++b) {
    const std::size_t off = (s * static_cast<std::size_t>(pc.B) + b) * pc.B;
    const std::uint32_t* ci = pc.corner_idx.data() + off;
    const double* cw = pc.corner_w.data() + off;
    double total = 0.0;
    for (int g = 0; g <= pc.L; ++g) {
      double gs = 0.0;
      for (int c = pc.goff[g]; c < pc.goff[g + 1]; ++c) gs += cw[c] * j[ci[c]];
      total += gs;
    }
    jb[b] = total;
  }
}

// Bellman update at one state given the successor values; returns the new
// state value and writes the argmin action.  Ties resolve by lower total
// power, then by keeping the earlier (lexicographically smaller) action.
inline double best_action(const Precomp& pc, const double* jb, double cost_s,
                          double alpha, int* argmin) {
  double best_v = std::numeric_limits<double>::infinity();
  double best_p = std::numeric_limits<double>::infinity();
  int best_a = -1;
  for (int a = 0; a < pc.A; ++a) {
    const double* pr = pc.action_prob.data() + static_cast<std::size_t>(a) * pc.B;
    double e = 0.0;
    for (int g = 0; g <= pc.L; ++g) {
      double gs = 0.0;
      for (int b = pc.goff[g]; b < pc.goff[g + 1]; ++b) gs += pr[b] * jb[b];
      e += gs;
    }
    const double v = (pc.action_power[a] + cost_s) + alpha * e;
    if (v < best_v || (v == best_v && pc.action_power[a] < best_p)) {
      best_v = v;
      best_p = pc.action_power[a];
      best_a = a;
    }
  }
  *argmin = best_a;
  return best_v;
}

void snapshot_sweep(const Precomp& pc, const double* j_old, double* j_new,
                    double alpha, int threads, double* delta_out) {
  const auto work = [&](std::size_t s0, std::size_t s1, double* dmax) {
    std::vector<double> jb(pc.B);
    double local = 0.0;
    for (std::size_t s = s0; s < s1; ++s) {
      successor_values(pc, j_old, s, jb.data());
      int argmin = -1;
      const double v = best_action(pc, jb.data(), pc.state_cost[s], alpha, &argmin);
      local = std::max(local, std::abs(v - j_old[s]));
      j_new[s] = v;
    }
    *dmax = local;
  };

  if (threads <= 1 || pc.N < 2) {
    work(0, pc.N, delta_out);
    return;
  }
  const int nt = std::min<std::size_t>(threads, pc.N);
  std::vector<double> deltas(nt, 0.0);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int i = 0; i < nt; ++i) {
    const std::size_t s0 = pc.N * i / nt;
    const std::size_t s1 = pc.N * (i + 1) / nt;
    pool.emplace_back(work, s0, s1, &deltas[i]);
  }
  for (auto& th : pool) th.join();
  *delta_out = *std::max_element(deltas.begin(), deltas.end());
}

}  // namespace

std::size_t StateGrid::size() const {
  std::size_t n = 1;
  for (const auto& ls : levels) n *= ls.size();
  return n;
}

std::size_t StateGrid::flat_index(const std::vector<int>& idx) const {
  if (idx.size() != levels.size()) throw std::invalid_argument("flat_index: rank mismatch");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < levels.size(); ++d) {
    if (idx[d] < 0 || idx[d] >= static_cast<int>(levels[d].size()))
      throw std::invalid_argument("flat_index: index out of range");
    flat = flat * levels[d].size() + static_cast<std::size_t>(idx[d]);
  }
  return flat;
}

void StateGrid::unflatten(std::size_t flat, std::vector<int>& idx) const {
  idx.resize(levels.size());
  for (int d = static_cast<int>(levels.size()) - 1; d >= 0; --d) {
    const std::size_t m = levels[d].size();
    idx[d] = static_cast<int>(flat % m);
    flat /= m;
  }
  if (flat != 0) throw std::invalid_argument("unflatten: flat index out of range");
}

std::vector<double> StateGrid::point(std::size_t flat) const {
  std::vector<int> idx;
  unflatten(flat, idx);
  std::vector<double> pt(levels.size());
  for (std::size_t d = 0; d < levels.size(); ++d) pt[d] = levels[d][idx[d]];
  return pt;
}

StateGrid StateGrid::uniform(int systems, int levels_per_system, double lo, double hi) {
  if (systems < 1 || levels_per_system < 2 || !(hi > lo))
    throw std::invalid_argument("StateGrid::uniform: bad arguments");
  std::vector<double> axis(levels_per_system);
  for (int i = 0; i < levels_per_system; ++i) {
    axis[i] = lo + (hi - lo) * static_cast<double>(i) / (levels_per_system - 1);
  }
  StateGrid g;
  g.levels.assign(systems, axis);
  return g;
}

void validate_grid(const StateGrid& grid) {
  if (grid.levels.empty()) throw std::invalid_argument("grid: no systems");
  for (const auto& ls : grid.levels) {
    if (ls.empty()) throw std::invalid_argument("grid: empty axis");
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (!(ls[i] >= 0.0) || !std::isfinite(ls[i]))
        throw std::invalid_argument("grid: levels must be finite and >= 0");
      if (i > 0 && !(ls[i] > ls[i - 1]))
        throw std::invalid_argument("grid: levels must be strictly ascending");
    }
  }
}

std::vector<unsigned> outcome_order(int systems) {
  if (systems < 1 || systems > kMaxSystems)
    throw std::invalid_argument("outcome_order: unsupported system count");
  const unsigned b = 1u << systems;
  std::vector<unsigned> order;
  order.reserve(b);
  for (int g = 0; g <= systems; ++g) {
    for (unsigned mask = 0; mask < b; ++mask) {
      if (std::popcount(mask) == g) order.push_back(mask);
    }
  }
  return order;
}

double transition_probability(const Eigen::VectorXd& kappa, unsigned outcome,
                              int systems) {
  if (kappa.size() != systems) throw std::invalid_argument("transition_probability: rank mismatch");
  if (systems < 1 || systems > kMaxSystems || outcome >= (1u << systems))
    throw std::invalid_argument("transition_probability: bad outcome");
  if ((kappa.array() < 0.0).any() || (kappa.array() > 1.0).any())
    throw std::invalid_argument("transition_probability: kappa must be in [0, 1]");
  double p = 1.0;
  for (int l = 0; l < systems; ++l) {
    p *= (outcome & (1u << l)) ? kappa(l) : 1.0 - kappa(l);
  }
  return p;
}

std::vector<std::vector<double>> reachable_states(const std::vector<double>& state,
                                                  const std::vector<SystemModel>& models) {
  const int L = static_cast<int>(models.size());
  if (static_cast<int>(state.size()) != L || L < 1)
    throw std::invalid_argument("reachable_states: rank mismatch");
  const auto masks = outcome_order(L);
  std::vector<std::vector<double>> out(masks.size(), std::vector<double>(L));
  for (std::size_t b = 0; b < masks.size(); ++b) {
    for (int l = 0; l < L; ++l) {
      out[b][l] = covariance_update(state[l], (masks[b] >> l) & 1u, models[l]);
    }
  }
  return out;
}

double stage_cost(const std::vector<double>& state, const Action& action,
                  const std::vector<SystemModel>& models) {
  if (state.size() != models.size() || action.kappa.size() != static_cast<int>(models.size()))
    throw std::invalid_argument("stage_cost: rank mismatch");
  return action.total_power + weighted_distortion(state, models);
}

double interpolate_value(const ValueFunction& value, const StateGrid& grid,
                         const std::vector<double>& state) {
  validate_grid(grid);
  const int L = grid.systems();
  if (L > kMaxSystems || static_cast<int>(state.size()) != L)
    throw std::invalid_argument("interpolate_value: rank mismatch");
  if (value.v.size() != grid.size())
    throw std::invalid_argument("interpolate_value: value/grid size mismatch");
  const auto masks = outcome_order(L);
  const auto strides = grid_strides(grid);
  std::vector<std::uint32_t> ci(masks.size());
  std::vector<double> cw(masks.size());
  fill_stencil(grid, strides, masks, state, ci.data(), cw.data());

  double total = 0.0;
  std::size_t c = 0;
  for (int g = 0; g <= L; ++g) {
    double gs = 0.0;
    while (c < masks.size() && std::popcount(masks[c]) == g) {
      gs += cw[c] * value.v[ci[c]];
      ++c;
    }
    total += gs;
  }
  return total;
}

std::uint64_t interpolation_saturation_count() {
  return g_saturation_count.load(std::memory_order_relaxed);
}

void reset_interpolation_saturation_count() {
  g_saturation_count.store(0, std::memory_order_relaxed);
}

std::pair<double, int> target_update(const ValueFunction& value, const StateGrid& grid,
                                     std::size_t flat, const FeasibleActionSet& actions,
                                     const std::vector<SystemModel>& models,
                                     double alpha) {
  validate_problem(grid, actions, models);
  if (flat >= grid.size()) throw std::invalid_argument("target_update: state out of range");
  if (value.v.size() != grid.size())
    throw std::invalid_argument("target_update: value/grid size mismatch");

  // One-state version of the sweep kernel: same stencil builder, same
  // reduction order, so the result is bit-identical to a full sweep's.
  Precomp pc;
  pc.L = grid.systems();
  pc.B = 1 << pc.L;
  pc.N = 1;
  pc.A = actions.size();
  pc.masks = outcome_order(pc.L);
  pc.goff.assign(pc.L + 2, 0);
  for (unsigned mask : pc.masks) ++pc.goff[std::popcount(mask) + 1];
  for (int g = 0; g + 1 <= pc.L + 1; ++g) pc.goff[g + 1] += pc.goff[g];
  pc.action_power.resize(pc.A);
  pc.action_prob.resize(static_cast<std::size_t>(pc.A) * pc.B);
  for (int a = 0; a < pc.A; ++a) {
    pc.action_power[a] = actions.actions[a].total_power;
    for (int b = 0; b < pc.B; ++b) {
      pc.action_prob[static_cast<std::size_t>(a) * pc.B + b] =
          transition_probability(actions.actions[a].kappa, pc.masks[b], pc.L);
    }
  }
  const auto strides = grid_strides(grid);
  const std::vector<double> pt = grid.point(flat);
  pc.state_cost.assign(1, weighted_distortion(pt, models));
  pc.corner_idx.resize(static_cast<std::size_t>(pc.B) * pc.B);
  pc.corner_w.resize(static_cast<std::size_t>(pc.B) * pc.B);
  std::vector<double> succ(pc.L);
  for (int b = 0; b < pc.B; ++b) {
    for (int l = 0; l < pc.L; ++l) {
      succ[l] = covariance_update(pt[l], (pc.masks[b] >> l) & 1u, models[l]);
    }
    fill_stencil(grid, strides, pc.masks, succ,
                 pc.corner_idx.data() + static_cast<std::size_t>(b) * pc.B,
                 pc.corner_w.data() + static_cast<std::size_t>(b) * pc.B);
  }

  std::vector<double> jb(pc.B);
  successor_values(pc, value.v.data(), 0, jb.data());
  int argmin = -1;
  const double v = best_action(pc, jb.data(), pc.state_cost[0], alpha, &argmin);
  return {v, argmin};
}

ValueFunction apply_bellman(const ValueFunction& value, const StateGrid& grid,
                            const FeasibleActionSet& actions,
                            const std::vector<SystemModel>& models, double alpha) {
  validate_problem(grid, actions, models);
  if (value.v.size() != grid.size())
    throw std::invalid_argument("apply_bellman: value/grid size mismatch");
  const Precomp pc = build_precomp(grid, actions, models);
  ValueFunction out;
  out.v.resize(pc.N);
  double delta = 0.0;
  snapshot_sweep(pc, value.v.data(), out.v.data(), alpha, 1, &delta);
  return out;
}

SolveResult value_iteration(const StateGrid& grid, const FeasibleActionSet& actions,
                            const std::vector<SystemModel>& models,
                            const SolverConfig& config) {
  validate_problem(grid, actions, models);
  if (!(config.alpha >= 0.0) || !(config.alpha < 1.0))
    throw std::invalid_argument("value_iteration: alpha must be in [0, 1)");
  if (!(config.epsilon > 0.0))
    throw std::invalid_argument("value_iteration: epsilon must be > 0");
  if (config.max_sweeps < 1)
    throw std::invalid_argument("value_iteration: max_sweeps must be >= 1");

  const Precomp pc = build_precomp(grid, actions, models);
  SolveResult res;
  res.value.v.assign(pc.N, 0.0);

  if (config.update_mode == UpdateMode::kSnapshot) {
    std::vector<double> next(pc.N, 0.0);
    for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
      double delta = 0.0;
      snapshot_sweep(pc, res.value.v.data(), next.data(), config.alpha,
                     std::max(1, config.threads), &delta);
      res.value.v.swap(next);
      res.sweeps = sweep;
      res.final_delta = delta;
      if (delta <= config.epsilon) {
        res.converged = true;
        break;
      }
    }
  } else {
    std::vector<double> jb(pc.B);
    for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
      double delta = 0.0;
      double* j = res.value.v.data();
      for (std::size_t s = 0; s < pc.N; ++s) {
        successor_values(pc, j, s, jb.data());
        int argmin = -1;
        const double v = best_action(pc, jb.data(), pc.state_cost[s], config.alpha, &argmin);
        delta = std::max(delta, std::abs(v - j[s]));
        j[s] = v;
      }
      res.sweeps = sweep;
      res.final_delta = delta;
      if (delta <= config.epsilon) {
        res.converged = true;
        break;
      }
    }
  }
  return res;
}

Policy extract_policy(const ValueFunction& value, const StateGrid& grid,
                      const FeasibleActionSet& actions,
                      const std::vector<SystemModel>& models, double alpha) {
  validate_problem(grid, actions, models);
  if (value.v.size() != grid.size())
    throw std::invalid_argument("extract_policy: value/grid size mismatch");
  const Precomp pc = build_precomp(grid, actions, models);
  Policy pol;
  pol.grid = grid;
  pol.actions = actions;
  pol.action_index.resize(pc.N);
  std::vector<double> jb(pc.B);
  for (std::size_t s = 0; s < pc.N; ++s) {
    successor_values(pc, value.v.data(), s, jb.data());
    int argmin = -1;
    best_action(pc, jb.data(), pc.state_cost[s], alpha, &argmin);
    pol.action_index[s] = argmin;
  }
  return pol;
}

}  // namespace wsntpc
