#include "wsntpc/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace wsntpc {
namespace {

bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-9) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().minCoeff();
}

void require_psd(const Eigen::MatrixXd& m, const char* name, bool strict) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(name) + " must be square");
  if (!is_symmetric(m)) throw std::invalid_argument(std::string(name) + " must be symmetric");
  const double lo = min_eigenvalue(m);
  const double tol = 1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
  if (strict ? !(lo > 0.0) : lo < -tol)
    throw std::invalid_argument(std::string(name) +
                                (strict ? " must be positive definite" : " must be positive semidefinite"));
}

// Deterministic symmetric square root used to sample correlated noise; LLT
// alone would reject semidefinite process covariances.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) {
    Eigen::MatrixXd f(1, 1);
    f(0, 0) = std::sqrt(m(0, 0));
    return f;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

SystemModel SystemModel::scalar(double f, double h, double r1, double r2,
                                double lambda, double m0, double r0, double theta) {
  SystemModel m;
  m.F = Eigen::MatrixXd::Constant(1, 1, f);
  m.H = Eigen::MatrixXd::Constant(1, 1, h);
  m.R1 = Eigen::MatrixXd::Constant(1, 1, r1);
  m.R2 = Eigen::MatrixXd::Constant(1, 1, r2);
  m.m0 = Eigen::VectorXd::Constant(1, m0);
  m.R0 = Eigen::MatrixXd::Constant(1, 1, r0);
  m.Theta = Eigen::MatrixXd::Constant(1, 1, theta);
  m.lambda = lambda;
  return m;
}

void validate_model(const SystemModel& model) {
  const int n = model.state_dim();
  const int p = model.meas_dim();
  if (n < 1 || model.F.cols() != n) throw std::invalid_argument("F must be square and nonempty");
  if (p < 1 || model.H.cols() != n) throw std::invalid_argument("H must be p x n");
  if (model.R1.rows() != n || model.R2.rows() != p || model.R0.rows() != n ||
      model.Theta.rows() != n || model.m0.size() != n)
    throw std::invalid_argument("model dimension mismatch");
  require_psd(model.R1, "R1", /*strict=*/false);
  require_psd(model.R2, "R2", /*strict=*/true);
  require_psd(model.R0, "R0", /*strict=*/true);
  require_psd(model.Theta, "Theta", /*strict=*/false);
  if (!(model.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");

  Eigen::MatrixXd obs(static_cast<Eigen::Index>(n) * p, n);
  Eigen::MatrixXd block = model.H;
  for (int i = 0; i < n; ++i) {
    obs.middleRows(static_cast<Eigen::Index>(i) * p, p) = block;
    block = block * model.F;
  }
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(obs).rank() < n)
    throw std::invalid_argument("(F, H) must be observable");
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& P, const SystemModel& model) {
  const Eigen::MatrixXd s = model.H * P * model.H.transpose() + model.R2;
  // K = F P H^T s^{-1}, via the symmetric solve s K^T = H P F^T.
  return s.llt().solve(model.H * P * model.F.transpose()).transpose();
}

double kalman_gain(double P, const SystemModel& model) {
  const double f = model.F(0, 0), h = model.H(0, 0), r2 = model.R2(0, 0);
  return f * P * h / (h * P * h + r2);
}

Eigen::MatrixXd covariance_update(const Eigen::MatrixXd& P, int beta,
                                  const SystemModel& model) {
  if (beta != 0 && beta != 1) throw std::invalid_argument("beta must be 0 or 1");
  Eigen::MatrixXd next = model.F * P * model.F.transpose() + model.R1;
  if (beta == 1) {
    next -= kalman_gain(P, model) * model.H * P * model.F.transpose();
  }
  return 0.5 * (next + next.transpose());
}

double covariance_update(double P, int beta, const SystemModel& model) {
  if (beta != 0 && beta != 1) throw std::invalid_argument("beta must be 0 or 1");
  const double f = model.F(0, 0), h = model.H(0, 0);
  const double open = f * P * f + model.R1(0, 0);
  if (beta == 0) return open;
  return open - kalman_gain(P, model) * h * P * f;
}

Eigen::VectorXd estimate_update(const Eigen::VectorXd& xhat, const Eigen::MatrixXd& P,
                                const Eigen::VectorXd* y, int beta,
                                const SystemModel& model) {
  if (beta != 0 && beta != 1) throw std::invalid_argument("beta must be 0 or 1");
  Eigen::VectorXd next = model.F * xhat;
  if (beta == 1) {
    if (y == nullptr) throw std::invalid_argument("estimate_update: measurement required when beta = 1");
    next += kalman_gain(P, model) * (*y - model.H * xhat);
  }
  return next;
}

double estimate_update(double xhat, double P, double y, int beta,
                       const SystemModel& model) {
  if (beta != 0 && beta != 1) throw std::invalid_argument("beta must be 0 or 1");
  const double f = model.F(0, 0), h = model.H(0, 0);
  if (beta == 0) return f * xhat;
  return f * xhat + kalman_gain(P, model) * (y - h * xhat);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> plant_step(const Eigen::VectorXd& x,
                                                       const SystemModel& model,
                                                       Rng& rng) {
  const int n = model.state_dim();
  const int p = model.meas_dim();
  if (x.size() != n) throw std::invalid_argument("plant_step: state dimension mismatch");

  Eigen::VectorXd zw(n);
  for (int i = 0; i < n; ++i) zw(i) = sample_standard_normal(rng);
  Eigen::VectorXd zv(p);
  for (int i = 0; i < p; ++i) zv(i) = sample_standard_normal(rng);

  Eigen::VectorXd next = model.F * x + covariance_factor(model.R1) * zw;
  Eigen::VectorXd y = model.H * x + covariance_factor(model.R2) * zv;
  return {std::move(next), std::move(y)};
}

double distortion(const std::vector<Eigen::VectorXd>& states,
                  const std::vector<Eigen::VectorXd>& estimates,
                  const Eigen::MatrixXd& theta) {
  if (states.size() != estimates.size() || states.empty())
    throw std::invalid_argument("distortion: need equally many states and estimates");
  double acc = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Eigen::VectorXd e = states[k] - estimates[k];
    acc += e.dot(theta * e);
  }
  return acc / static_cast<double>(states.size());
}

Eigen::MatrixXd riccati_fixed_point(const SystemModel& model) {
  validate_model(model);
  Eigen::MatrixXd P = model.R0;
  for (int it = 0; it < 100000; ++it) {
    const Eigen::MatrixXd next = covariance_update(P, 1, model);
    const double delta = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (delta < 1e-12) return P;
  }
  throw std::runtime_error("riccati_fixed_point: no convergence");
}

}  // namespace wsntpc
