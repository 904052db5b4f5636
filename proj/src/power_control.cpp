#include "wsntpc/power_control.hpp"

#include <cmath>
#include <stdexcept>

namespace wsntpc {
namespace {

void validate_inputs(const GainMatrix& gains, const NoiseVector& noise) {
  const int L = gains.links();
  if (L < 1 || gains.q.cols() != L) throw std::invalid_argument("gain matrix must be square");
  if (noise.links() != L) throw std::invalid_argument("noise dimension mismatch");
  if (!(gains.q.array() > 0.0).all() || !(gains.q.array() < 1.0).all())
    throw std::invalid_argument("gains must lie in (0, 1)");
  if (!(noise.n.array() > 0.0).all()) throw std::invalid_argument("noise must be > 0");
}

void validate_requirements(const SinrRequirements& req, int L) {
  if (req.gamma.size() != L) throw std::invalid_argument("SINR target dimension mismatch");
  if (!req.gamma.allFinite() || (req.gamma.array() < 0.0).any())
    throw std::invalid_argument("SINR targets must be finite and >= 0");
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("spectral_radius: matrix must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd normalized_gain_matrix(const GainMatrix& gains) {
  const int L = gains.links();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(L, L);
  for (int l = 0; l < L; ++l) {
    for (int m = 0; m < L; ++m) {
      // Row l collects the interference receiver l hears: the gain from
      // transmitter m into receiver l, normalized by link l's direct gain.
      // This row form is what makes the solved powers meet the SINR
      // definition with equality.
      if (m != l) t(l, m) = gains.q(m, l) / gains.q(l, l);
    }
  }
  return t;
}

Eigen::VectorXd normalized_interference(const SinrRequirements& req,
                                        const NoiseVector& noise,
                                        const GainMatrix& gains) {
  const int L = gains.links();
  Eigen::VectorXd u(L);
  for (int l = 0; l < L; ++l) u(l) = noise.n(l) * req.gamma(l) / gains.q(l, l);
  return u;
}

std::optional<PowerAllocation> foschini_miljanic(const SinrRequirements& req,
                                                 const GainMatrix& gains,
                                                 const NoiseVector& noise) {
  validate_inputs(gains, noise);
  const int L = gains.links();
  validate_requirements(req, L);

  if (L == 1) {
    PowerAllocation out;
    out.p.resize(1);
    out.p(0) = req.gamma(0) * noise.n(0) / gains.q(0, 0);
    return out;
  }

  if (L == 2) {
    // Cramer's rule on (I - diag(gamma) T).  Besides speed, the closed form
    // guarantees that swapping two symmetric links swaps the solution
    // exactly, which the planner relies on for symmetric networks.
    const double a0 = req.gamma(0) * (gains.q(1, 0) / gains.q(0, 0));
    const double a1 = req.gamma(1) * (gains.q(0, 1) / gains.q(1, 1));
    const double coupling = a0 * a1;
    if (!(coupling < 1.0)) return std::nullopt;
    const double det = 1.0 - coupling;
    const double u0 = noise.n(0) * req.gamma(0) / gains.q(0, 0);
    const double u1 = noise.n(1) * req.gamma(1) / gains.q(1, 1);
    PowerAllocation out;
    out.p.resize(2);
    out.p(0) = (u0 + a0 * u1) / det;
    out.p(1) = (u1 + a1 * u0) / det;
    if (!out.p.allFinite() || (out.p.array() < 0.0).any()) return std::nullopt;
    return out;
  }

  const Eigen::MatrixXd coupling = req.gamma.asDiagonal() * normalized_gain_matrix(gains);
  if (!(spectral_radius(coupling) < 1.0)) return std::nullopt;

  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(L, L) - coupling;
  Eigen::VectorXd p = a.partialPivLu().solve(normalized_interference(req, noise, gains));
  if (!p.allFinite()) return std::nullopt;
  // Below the radius threshold the exact solution is componentwise
  // nonnegative; anything more than rounding noise below zero means the
  // solve went numerically bad, so reject it.
  const double tol = -1e-9 * (1.0 + p.cwiseAbs().maxCoeff());
  if ((p.array() < tol).any()) return std::nullopt;
  PowerAllocation out;
  out.p = p.cwiseMax(0.0);
  return out;
}

bool is_feasible(const SinrRequirements& req, const GainMatrix& gains,
                 const NoiseVector& noise, double p_max_w) {
  if (!(p_max_w > 0.0)) throw std::invalid_argument("is_feasible: p_max must be > 0");
  const auto alloc = foschini_miljanic(req, gains, noise);
  return alloc && (alloc->p.array() <= p_max_w).all();
}

std::optional<PowerAllocation> psi(const Eigen::VectorXd& kappa,
                                   const GainMatrix& gains, const NoiseVector& noise,
                                   int packet_bits, double p_max_w) {
  const int L = gains.links();
  if (kappa.size() != L) throw std::invalid_argument("psi: kappa dimension mismatch");
  if (!(p_max_w > 0.0)) throw std::invalid_argument("psi: p_max must be > 0");
  SinrRequirements req;
  req.gamma.resize(L);
  for (int l = 0; l < L; ++l) req.gamma(l) = sinr_from_psr(kappa(l), packet_bits);
  auto alloc = foschini_miljanic(req, gains, noise);
  if (!alloc || (alloc->p.array() > p_max_w).any()) return std::nullopt;
  return alloc;
}

FeasibleActionSet enumerate_feasible_actions(
    const std::vector<std::vector<double>>& levels, const GainMatrix& gains,
    const NoiseVector& noise, int packet_bits, double p_max_w, double p_min_w) {
  const int L = gains.links();
  if (static_cast<int>(levels.size()) != L)
    throw std::invalid_argument("enumerate_feasible_actions: need one level list per sensor");
  for (const auto& ls : levels) {
    if (ls.empty()) throw std::invalid_argument("enumerate_feasible_actions: empty level list");
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (!(ls[i] > 0.0) || !(ls[i] < 1.0))
        throw std::invalid_argument("enumerate_feasible_actions: kappa levels must be in (0, 1)");
      if (i > 0 && !(ls[i] > ls[i - 1]))
        throw std::invalid_argument("enumerate_feasible_actions: kappa levels must be ascending");
    }
  }

  FeasibleActionSet set;
  set.levels = levels;
  set.p_max_w = p_max_w;

  std::vector<std::size_t> idx(L, 0);
  bool done = false;
  while (!done) {
    ++set.diagnostics.candidates;
    Eigen::VectorXd kappa(L);
    for (int l = 0; l < L; ++l) kappa(l) = levels[l][idx[l]];

    SinrRequirements req;
    req.gamma.resize(L);
    for (int l = 0; l < L; ++l) req.gamma(l) = sinr_from_psr(kappa(l), packet_bits);
    auto alloc = foschini_miljanic(req, gains, noise);
    if (!alloc) {
      ++set.diagnostics.rejected_unachievable;
    } else if ((alloc->p.array() > p_max_w).any()) {
      ++set.diagnostics.rejected_power_limit;
    } else {
      if ((alloc->p.array() < p_min_w).any()) ++set.diagnostics.below_power_floor;
      Action act;
      act.kappa = std::move(kappa);
      act.p = std::move(alloc->p);
      act.total_power = act.p.sum();
      set.actions.push_back(std::move(act));
    }

    // Odometer increment, last sensor fastest => lexicographic order.
    int pos = L - 1;
    while (pos >= 0) {
      if (++idx[pos] < levels[pos].size()) break;
      idx[pos] = 0;
      --pos;
    }
    done = pos < 0;
  }
  return set;
}

FeasibilitySlice feasibility_region_slice(const std::vector<double>& fixed_kappa,
                                          int free_i, int free_j, int resolution,
                                          const GainMatrix& gains,
                                          const NoiseVector& noise, int packet_bits,
                                          double p_max_w) {
  const int L = gains.links();
  if (static_cast<int>(fixed_kappa.size()) != L)
    throw std::invalid_argument("feasibility_region_slice: fixed_kappa must have one entry per link");
  if (free_i < 0 || free_j < 0 || free_i >= L || free_j >= L || free_i == free_j)
    throw std::invalid_argument("feasibility_region_slice: bad free link indices");
  if (resolution < 2) throw std::invalid_argument("feasibility_region_slice: resolution must be >= 2");
  for (int l = 0; l < L; ++l) {
    if (l == free_i || l == free_j) continue;
    if (!(fixed_kappa[l] > 0.0) || !(fixed_kappa[l] < 1.0))
      throw std::invalid_argument("feasibility_region_slice: fixed kappa must be in (0, 1)");
  }

  FeasibilitySlice slice;
  slice.free_i = free_i;
  slice.free_j = free_j;
  slice.kappa_values.resize(resolution);
  for (int k = 0; k < resolution; ++k) {
    slice.kappa_values[k] = static_cast<double>(k + 1) / (resolution + 1);
  }

  Eigen::VectorXd kappa(L);
  for (int l = 0; l < L; ++l) kappa(l) = (l == free_i || l == free_j) ? 0.5 : fixed_kappa[l];

  slice.feasible.resize(static_cast<std::size_t>(resolution) * resolution);
  for (int a = 0; a < resolution; ++a) {
    kappa(free_i) = slice.kappa_values[a];
    for (int b = 0; b < resolution; ++b) {
      kappa(free_j) = slice.kappa_values[b];
      slice.feasible[static_cast<std::size_t>(a) * resolution + b] =
          psi(kappa, gains, noise, packet_bits, p_max_w).has_value() ? 1 : 0;
    }
  }
  return slice;
}

}  // namespace wsntpc
