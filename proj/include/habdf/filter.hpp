#pragma once

#include <Eigen/Dense>

namespace habdf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Gaussian belief: mean and covariance.
struct GaussianState {
  Vector mean;
  Matrix cov;

  Eigen::Index dim() const { return mean.size(); }
};

/// Linear-Gaussian model
///   x(t) = A x(t-1) + B u(t) + w,  w ~ N(0, Rww)
///   y(t) = C x(t) + v,             v ~ N(0, Rvv)
struct LinearModel {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix Rww;
  Matrix Rvv;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index control_dim() const { return B.cols(); }
  Eigen::Index meas_dim() const { return C.rows(); }
};

struct UpdateResult {
  GaussianState posterior;
  Vector innovation;
  Matrix innovation_cov;
};

/// Largest condition number accepted for an innovation covariance.
inline constexpr double kMaxInnovationCondition = 1e12;

/// Throws ContractError unless the model's matrices have consistent shapes,
/// finite entries and symmetric noise covariances.
void validate(const LinearModel& model);

/// Throws ContractError unless the state is finite, its covariance symmetric
/// (1e-9) and positive semidefinite (eigenvalues >= -1e-9).
void validate(const GaussianState& state);

GaussianState kf_predict(const GaussianState& state, const LinearModel& model,
                         const Vector& control);

/// Prediction with a zero control input.
GaussianState kf_predict(const GaussianState& state, const LinearModel& model);

/// Measurement update in Joseph form, symmetrized. The innovation covariance
/// must be positive definite with condition number <= kMaxInnovationCondition,
/// otherwise DegenerateError is thrown.
UpdateResult kf_update(const GaussianState& state, const LinearModel& model,
                       const Vector& y);

/// Same as kf_update with the observation matrix and noise given explicitly,
/// for callers that assemble them per step (stacked fusion measurements).
UpdateResult kf_update(const GaussianState& state, const Matrix& C,
                       const Matrix& Rvv, const Vector& y);

/// Condition number of a symmetric matrix from its eigenvalues; inf when the
/// smallest eigenvalue is not positive.
double symmetric_condition(const Matrix& m);

/// Parameters of the constant-velocity box tracking model. `axes` measured
/// coordinates, each with a velocity, so the state has 2*axes entries laid out
/// as [positions..., velocities...].
struct TrackModelParams {
  int axes = 4;
  double dt = 1.0;          // frames
  double accel_var = 1.0;   // (pixels/frame^2)^2
  double meas_var = 1.0;    // pixels^2
};

/// Random-acceleration (white-noise acceleration) model over `params.axes`
/// coordinates. B is a zero column: tracking has no control input.
LinearModel build_cv_model(const TrackModelParams& params);

/// The 8-state [u v h w u' v' h' w'] bounding-box model.
LinearModel build_track_model(double dt, double accel_var, double meas_var);

}  // namespace habdf
