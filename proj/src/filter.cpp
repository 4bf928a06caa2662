#include "habdf/filter.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "habdf/errors.hpp"

namespace habdf {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kPsdTol = 1e-9;

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

bool symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol * scale;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

double symmetric_condition(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

void validate(const LinearModel& model) {
  const auto n = model.A.rows();
  require(n > 0 && model.A.cols() == n, "A must be square, got " + shape(model.A));
  require(model.B.rows() == n, "B must have " + std::to_string(n) + " rows, got " + shape(model.B));
  require(model.C.cols() == n, "C must have " + std::to_string(n) + " columns, got " + shape(model.C));
  require(model.Rww.rows() == n && model.Rww.cols() == n,
          "Rww must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " + shape(model.Rww));
  const auto p = model.C.rows();
  require(model.Rvv.rows() == p && model.Rvv.cols() == p,
          "Rvv must be " + std::to_string(p) + "x" + std::to_string(p) + ", got " + shape(model.Rvv));
  require(model.A.allFinite() && model.B.allFinite() && model.C.allFinite() &&
              model.Rww.allFinite() && model.Rvv.allFinite(),
          "model contains non-finite entries");
  require(symmetric(model.Rww), "Rww is not symmetric");
  require(symmetric(model.Rvv), "Rvv is not symmetric");
}

void validate(const GaussianState& state) {
  const auto n = state.mean.size();
  require(n > 0, "empty state");
  require(state.cov.rows() == n && state.cov.cols() == n,
          "covariance must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " + shape(state.cov));
  require(state.mean.allFinite() && state.cov.allFinite(), "state contains non-finite entries");
  require(symmetric(state.cov), "state covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(state.cov, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, state.cov.cwiseAbs().maxCoeff());
  require(eig.eigenvalues().minCoeff() >= -kPsdTol * scale,
          "state covariance is not positive semidefinite");
}

GaussianState kf_predict(const GaussianState& state, const LinearModel& model,
                         const Vector& control) {
  validate(model);
  validate(state);
  require(state.dim() == model.state_dim(), "state dimension " + std::to_string(state.dim()) +
                                                " does not match model dimension " +
                                                std::to_string(model.state_dim()));
  require(control.size() == model.control_dim(),
          "control dimension " + std::to_string(control.size()) + " does not match B columns " +
              std::to_string(model.control_dim()));
  require(control.allFinite(), "control contains non-finite entries");

  GaussianState out;
  out.mean = model.A * state.mean + model.B * control;
  out.cov = symmetrize(model.A * state.cov * model.A.transpose() + model.Rww);
  return out;
}

GaussianState kf_predict(const GaussianState& state, const LinearModel& model) {
  return kf_predict(state, model, Vector::Zero(model.control_dim()));
}

UpdateResult kf_update(const GaussianState& state, const Matrix& C, const Matrix& Rvv,
                       const Vector& y) {
  validate(state);
  const auto n = state.dim();
  const auto p = C.rows();
  require(C.cols() == n, "C must have " + std::to_string(n) + " columns, got " + shape(C));
  require(Rvv.rows() == p && Rvv.cols() == p,
          "Rvv must be " + std::to_string(p) + "x" + std::to_string(p) + ", got " + shape(Rvv));
  require(y.size() == p, "measurement dimension " + std::to_string(y.size()) +
                             " does not match " + std::to_string(p));
  require(C.allFinite() && Rvv.allFinite(), "observation model contains non-finite entries");
  require(y.allFinite(), "measurement contains non-finite entries");
  require(symmetric(Rvv), "Rvv is not symmetric");

  UpdateResult out;
  out.innovation = y - C * state.mean;
  out.innovation_cov = symmetrize(C * state.cov * C.transpose() + Rvv);

  const double cond = symmetric_condition(out.innovation_cov);
  if (!(cond <= kMaxInnovationCondition)) {
    std::ostringstream os;
    os << "innovation covariance is degenerate (condition " << cond << ")";
    throw DegenerateError(os.str(), cond);
  }

  // K = P C' S^-1, solved as S K' = C P.
  const Eigen::LDLT<Matrix> ldlt(out.innovation_cov);
  const Matrix gain = ldlt.solve(C * state.cov).transpose();

  const Matrix I_KC = Matrix::Identity(n, n) - gain * C;
  out.posterior.mean = state.mean + gain * out.innovation;
  out.posterior.cov =
      symmetrize(I_KC * state.cov * I_KC.transpose() + gain * Rvv * gain.transpose());
  return out;
}

UpdateResult kf_update(const GaussianState& state, const LinearModel& model, const Vector& y) {
  validate(model);
  return kf_update(state, model.C, model.Rvv, y);
}

LinearModel build_cv_model(const TrackModelParams& params) {
  require(params.axes > 0, "axes must be positive");
  require(std::isfinite(params.dt) && params.dt > 0.0, "dt must be positive");
  require(std::isfinite(params.accel_var) && params.accel_var >= 0.0,
          "accel_var must be nonnegative");
  require(std::isfinite(params.meas_var) && params.meas_var >= 0.0,
          "meas_var must be nonnegative");

  const int k = params.axes;
  const int n = 2 * k;
  const double dt = params.dt;
  const auto I = Matrix::Identity(k, k);

  LinearModel m;
  m.A = Matrix::Identity(n, n);
  m.A.topRightCorner(k, k) = dt * I;
  m.B = Matrix::Zero(n, 1);
  m.C = Matrix::Zero(k, n);
  m.C.leftCols(k) = I;

  // Piecewise-constant white acceleration per axis:
  //   q * [dt^4/4  dt^3/2]
  //       [dt^3/2  dt^2  ]
  const double q = params.accel_var;
  m.Rww = Matrix::Zero(n, n);
  m.Rww.topLeftCorner(k, k) = q * std::pow(dt, 4) / 4.0 * I;
  m.Rww.topRightCorner(k, k) = q * std::pow(dt, 3) / 2.0 * I;
  m.Rww.bottomLeftCorner(k, k) = q * std::pow(dt, 3) / 2.0 * I;
  m.Rww.bottomRightCorner(k, k) = q * dt * dt * I;

  m.Rvv = params.meas_var * Matrix::Identity(k, k);
  return m;
}

LinearModel build_track_model(double dt, double accel_var, double meas_var) {
  return build_cv_model({.axes = 4, .dt = dt, .accel_var = accel_var, .meas_var = meas_var});
}

}  // namespace habdf
