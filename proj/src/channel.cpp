#include "wsntpc/channel.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wsntpc/units.hpp"

namespace wsntpc {
namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Rational approximation of the standard normal quantile (Acklam's
// coefficients, |relative error| < 1.15e-9 everywhere); refined below.
double probit_estimate(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void validate_topology(const Topology& topo) {
  if (topo.tx.empty()) throw std::invalid_argument("topology: no links");
  if (topo.tx.size() != topo.rx.size())
    throw std::invalid_argument("topology: tx/rx size mismatch");
  for (std::size_t m = 0; m < topo.tx.size(); ++m) {
    for (std::size_t l = 0; l < topo.rx.size(); ++l) {
      if (distance(topo.tx[m], topo.rx[l]) <= 0.0)
        throw std::invalid_argument("topology: coincident transmitter/receiver");
    }
  }
}

double path_loss(double distance_m, const PropagationParams& params) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("path_loss: distance must be > 0");
  if (!(params.frequency_hz > 0.0) || !(params.reference_distance_m > 0.0) ||
      !(params.pathloss_exponent > 0.0))
    throw std::invalid_argument("path_loss: propagation parameters must be > 0");
  const double amp = kSpeedOfLight /
                     (4.0 * std::numbers::pi * params.frequency_hz * params.reference_distance_m);
  return amp * amp *
         std::pow(params.reference_distance_m / distance_m, params.pathloss_exponent);
}

double shadowing_mean(double shadowing_variance_db) {
  if (shadowing_variance_db < 0.0)
    throw std::invalid_argument("shadowing_mean: variance must be >= 0");
  const double scale = std::numbers::ln10 / 10.0;
  const double sigma_ln_sq = scale * scale * shadowing_variance_db;
  return std::exp(0.5 * sigma_ln_sq);
}

double channel_coefficient(double distance_m, const PropagationParams& params) {
  const double q =
      path_loss(distance_m, params) / shadowing_mean(params.shadowing_variance_db);
  if (q >= 1.0) {
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    return 1.0 - 1e-12;
  }
  return q;
}

std::uint64_t channel_clamp_count() {
  return g_clamp_count.load(std::memory_order_relaxed);
}

void reset_channel_clamp_count() { g_clamp_count.store(0, std::memory_order_relaxed); }

GainMatrix build_gain_matrix(const Topology& topo, const PropagationParams& params) {
  validate_topology(topo);
  const int L = topo.links();
  GainMatrix g;
  g.q.resize(L, L);
  for (int m = 0; m < L; ++m) {
    for (int l = 0; l < L; ++l) {
      g.q(m, l) = channel_coefficient(distance(topo.tx[m], topo.rx[l]), params);
    }
  }
  return g;
}

double sinr(const Eigen::VectorXd& p, const GainMatrix& gains,
            const NoiseVector& noise, int link) {
  const int L = gains.links();
  if (p.size() != L || noise.links() != L)
    throw std::invalid_argument("sinr: dimension mismatch");
  if (link < 0 || link >= L) throw std::invalid_argument("sinr: link out of range");
  if ((p.array() < 0.0).any()) throw std::invalid_argument("sinr: negative power");
  if (!(noise.n(link) > 0.0)) throw std::invalid_argument("sinr: noise must be > 0");

  double denom = 0.0;
  for (int m = 0; m < L; ++m) {
    if (m != link) denom += p(m) * gains.q(m, link);
  }
  denom += noise.n(link);
  return p(link) * gains.q(link, link) / denom;
}

double gaussian_tail(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double gaussian_tail_inv(double y) {
  if (!(y > 0.0) || !(y < 1.0))
    throw std::invalid_argument("gaussian_tail_inv: argument must be in (0, 1)");
  // Q^{-1}(y) = -probit(y); evaluating the tail branch at y directly avoids
  // the 1 - y cancellation for small y.
  double x = -probit_estimate(y);
  // Newton steps on Q(x) - y = 0 (derivative -phi(x)); two are enough to
  // reach erfc-level accuracy from the rational estimate.
  for (int i = 0; i < 2; ++i) {
    const double phi = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    if (!(phi > 0.0)) break;  // deep tail: refinement would divide by 0
    x += (gaussian_tail(x) - y) / phi;
  }
  return x;
}

double psr_from_sinr(double sinr_value, int packet_bits) {
  if (sinr_value < 0.0) throw std::invalid_argument("psr_from_sinr: SINR must be >= 0");
  if (packet_bits < 1) throw std::invalid_argument("psr_from_sinr: packet_bits must be >= 1");
  const double bit_success = 1.0 - gaussian_tail(4.0 * std::sqrt(sinr_value));
  return std::pow(bit_success, static_cast<double>(packet_bits));
}

double sinr_from_psr(double kappa, int packet_bits) {
  if (!(kappa > 0.0) || !(kappa < 1.0))
    throw std::invalid_argument("sinr_from_psr: kappa must be in (0, 1)");
  if (packet_bits < 1) throw std::invalid_argument("sinr_from_psr: packet_bits must be >= 1");
  const double tail = 1.0 - std::pow(kappa, 1.0 / static_cast<double>(packet_bits));
  if (tail >= 0.5) return 0.0;  // even zero SINR succeeds this often
  const double x = gaussian_tail_inv(tail);
  return (x * x) / 16.0;
}

}  // namespace wsntpc
