// Remote state estimation: linear plant models, the Kalman recursion with
// Bernoulli measurement arrivals, and its full-arrival fixed point.
#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "wsntpc/rng.hpp"

namespace wsntpc {

// One linear time-invariant plant x' = F x + w, y = H x + v with
// w ~ N(0, R1), v ~ N(0, R2), prior x0 ~ N(m0, R0).  Theta weighs the
// squared estimation error and lambda prices it against transmit power.
struct SystemModel {
  Eigen::MatrixXd F;
  Eigen::MatrixXd H;
  Eigen::MatrixXd R1;
  Eigen::MatrixXd R2;
  Eigen::VectorXd m0;
  Eigen::MatrixXd R0;
  Eigen::MatrixXd Theta;
  double lambda = 0.0;

  int state_dim() const { return static_cast<int>(F.rows()); }
  int meas_dim() const { return static_cast<int>(H.rows()); }

  static SystemModel scalar(double f, double h, double r1, double r2,
                            double lambda = 0.0, double m0 = 0.0, double r0 = 1.0,
                            double theta = 1.0);
};

// Dimension checks, symmetry/definiteness of the covariances (R2 and R0
// positive definite, R1 and Theta positive semidefinite), lambda >= 0, and
// observability of (F, H).  Throws std::invalid_argument.
void validate_model(const SystemModel& model);

// Kalman gain for prediction covariance P: F P H^T (H P H^T + R2)^{-1}.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& P, const SystemModel& model);
double kalman_gain(double P, const SystemModel& model);  // scalar models

// One covariance step given the arrival indicator beta in {0, 1}:
//   P' = F P F^T + R1 - beta * K H P F^T,
// re-symmetrized before returning.  With beta = 0 this is the open-loop
// prediction; with beta = 1 the standard Riccati step.
Eigen::MatrixXd covariance_update(const Eigen::MatrixXd& P, int beta,
                                  const SystemModel& model);
double covariance_update(double P, int beta, const SystemModel& model);

// One estimate step: x' = F xhat + beta * K (y - H xhat).  y is read only
// when beta = 1.
Eigen::VectorXd estimate_update(const Eigen::VectorXd& xhat, const Eigen::MatrixXd& P,
                                const Eigen::VectorXd* y, int beta,
                                const SystemModel& model);
double estimate_update(double xhat, double P, double y, int beta,
                       const SystemModel& model);

// Draws process and measurement noise and returns (next state, measurement
// of the *input* state).  Consumes state_dim normals for w first, then
// meas_dim normals for v, in component order.
std::pair<Eigen::VectorXd, Eigen::VectorXd> plant_step(const Eigen::VectorXd& x,
                                                       const SystemModel& model,
                                                       Rng& rng);

// Mean weighted squared estimation error over paired trajectories.
double distortion(const std::vector<Eigen::VectorXd>& states,
                  const std::vector<Eigen::VectorXd>& estimates,
                  const Eigen::MatrixXd& theta);

// Limit of covariance_update with beta = 1 from P = R0 (the covariance the
// estimator settles at when every packet arrives).  Iterates until the max
// norm step falls below 1e-12; throws std::runtime_error if it never does.
Eigen::MatrixXd riccati_fixed_point(const SystemModel& model);

}  // namespace wsntpc
