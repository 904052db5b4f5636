// Minimum-power allocation under SINR constraints on an interference
// channel, and enumeration of the jointly achievable packet-success-rate
// targets that form the action set of the planner.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "wsntpc/channel.hpp"

namespace wsntpc {

// Per-link SINR targets (dimensionless, >= 0).
struct SinrRequirements {
  Eigen::VectorXd gamma;
};

// Per-link transmit powers in watts.
struct PowerAllocation {
  Eigen::VectorXd p;

  double total_watt() const { return p.sum(); }
};

// Largest |eigenvalue| of a (generally non-symmetric) real matrix.
double spectral_radius(const Eigen::MatrixXd& m);

// Interference coupling matrix T with T(l, m) = q(m, l) / q(l, l) off the
// diagonal and 0 on it: row l holds the gains of the interferers heard by
// receiver l, normalized by link l's own direct gain.
Eigen::MatrixXd normalized_gain_matrix(const GainMatrix& gains);

// Noise loading u with u(l) = n(l) * gamma(l) / q(l, l).
Eigen::VectorXd normalized_interference(const SinrRequirements& req,
                                        const NoiseVector& noise,
                                        const GainMatrix& gains);

// Solves (I - diag(gamma) T) p = u for the componentwise-minimal power
// vector that meets every SINR target with equality.  Returns nullopt when
// the targets are jointly unachievable at any power (spectral radius of
// diag(gamma) T at or above 1, or a negative solution).  L = 1 and L = 2
// use closed forms; larger networks go through an LU solve.
std::optional<PowerAllocation> foschini_miljanic(const SinrRequirements& req,
                                                 const GainMatrix& gains,
                                                 const NoiseVector& noise);

// True iff the targets are achievable with every power in [0, p_max_w].
bool is_feasible(const SinrRequirements& req, const GainMatrix& gains,
                 const NoiseVector& noise, double p_max_w);

// Power cost of a packet-success-rate vector: converts each kappa to its
// required SINR and solves for minimal powers.  nullopt when unachievable
// within the power limit.
std::optional<PowerAllocation> psi(const Eigen::VectorXd& kappa,
                                   const GainMatrix& gains, const NoiseVector& noise,
                                   int packet_bits, double p_max_w);

// One admissible joint success-rate target with its minimal power vector.
struct Action {
  Eigen::VectorXd kappa;
  Eigen::VectorXd p;          // watts
  double total_power = 0.0;   // watts
};

struct ActionDiagnostics {
  std::uint64_t candidates = 0;
  std::uint64_t rejected_unachievable = 0;   // no finite power meets the targets
  std::uint64_t rejected_power_limit = 0;    // some power above p_max
  std::uint64_t below_power_floor = 0;       // kept, but some power under p_min
};

struct FeasibleActionSet {
  std::vector<std::vector<double>> levels;  // per-sensor kappa levels, ascending
  std::vector<Action> actions;              // lexicographic in level indices
  double p_max_w = 0.0;
  ActionDiagnostics diagnostics;

  int size() const { return static_cast<int>(actions.size()); }
};

// Builds the action set from per-sensor kappa levels: the Cartesian product
// is walked in lexicographic order (last sensor's index fastest) and every
// candidate achievable within p_max_w is kept, preserving that order.
// Powers below p_min_w are allowed but counted in the diagnostics.
FeasibleActionSet enumerate_feasible_actions(
    const std::vector<std::vector<double>>& levels, const GainMatrix& gains,
    const NoiseVector& noise, int packet_bits, double p_max_w, double p_min_w);

// Feasibility indicator sampled on a 2-D slice of the kappa hypercube:
// links free_i and free_j sweep a uniform grid strictly inside (0, 1),
// the remaining links hold the supplied fixed values.
struct FeasibilitySlice {
  int free_i = 0;
  int free_j = 1;
  std::vector<double> kappa_values;       // shared axis grid
  std::vector<std::uint8_t> feasible;     // row-major, free_i index major
};

FeasibilitySlice feasibility_region_slice(const std::vector<double>& fixed_kappa,
                                          int free_i, int free_j, int resolution,
                                          const GainMatrix& gains,
                                          const NoiseVector& noise, int packet_bits,
                                          double p_max_w);

}  // namespace wsntpc
