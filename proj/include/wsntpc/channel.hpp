// Radio channel model: deterministic path loss, mean log-normal shadowing,
// link gain matrices, SINR, and the packet success rate <-> SINR maps.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace wsntpc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Vec2& a, const Vec2& b);

// Transmitter/receiver positions of the L point-to-point links, in meters.
// tx[i] talks to rx[i]; every other transmitter interferes.
struct Topology {
  std::vector<Vec2> tx;
  std::vector<Vec2> rx;

  int links() const { return static_cast<int>(tx.size()); }
};

// Throws std::invalid_argument on size mismatch, empty topology, or any
// coincident transmitter/receiver pair (zero distance has no path loss).
void validate_topology(const Topology& topo);

struct PropagationParams {
  double frequency_hz = 2480e6;
  double pathloss_exponent = 3.3;
  double shadowing_variance_db = 2.75;   // variance of the shadowing term in dB^2
  double reference_distance_m = 1.0;
};

// Free-space-anchored power path loss at distance d (dimensionless, < 1 for
// any practical geometry): (c / (4 pi f d0))^2 * (d0 / d)^eta.
double path_loss(double distance_m, const PropagationParams& params);

// Mean of the multiplicative log-normal shadowing factor whose underlying
// normal has variance sigma_db^2 on the dB scale.
double shadowing_mean(double shadowing_variance_db);

// Expected channel power gain: path loss divided by the shadowing mean.
// Values that would reach 1 are clamped to 1 - 1e-12 and counted in the
// clamp diagnostics (physically a gain above unity means the geometry is
// outside the model's validity range).
double channel_coefficient(double distance_m, const PropagationParams& params);

std::uint64_t channel_clamp_count();
void reset_channel_clamp_count();

// Gain matrix over a topology: q(m, l) is the expected power gain from
// transmitter m to receiver l.  Direct gains sit on the diagonal.
struct GainMatrix {
  Eigen::MatrixXd q;

  int links() const { return static_cast<int>(q.rows()); }
};

GainMatrix build_gain_matrix(const Topology& topo, const PropagationParams& params);

// Receiver noise powers in watts.
struct NoiseVector {
  Eigen::VectorXd n;

  int links() const { return static_cast<int>(n.size()); }
};

// SINR at receiver `link` when all transmitters send simultaneously with
// powers p (watts): p_l q(l,l) / (sum_{m != l} p_m q(m,l) + n_l).
double sinr(const Eigen::VectorXd& p, const GainMatrix& gains,
            const NoiseVector& noise, int link);

// Upper tail of the standard normal distribution, Q(x) = P(Z > x).
double gaussian_tail(double x);

// Inverse of gaussian_tail on (0, 1).  Accurate to ~1 ulp via a rational
// initial guess refined with Newton steps on erfc.
double gaussian_tail_inv(double y);

// Packet success rate of a packet_bits-bit packet at the given SINR:
// (1 - Q(4 sqrt(gamma)))^W.  Monotone increasing in gamma.
double psr_from_sinr(double sinr_value, int packet_bits);

// Inverse map: the SINR required to hit success rate kappa in (0, 1).
// Returns 0 when even zero SINR meets the target (kappa below the
// zero-SINR success floor).
double sinr_from_psr(double kappa, int packet_bits);

}  // namespace wsntpc
