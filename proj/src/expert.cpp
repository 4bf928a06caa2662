#include "habdf/expert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "habdf/errors.hpp"

namespace habdf {

namespace {

void check_residual_dims(const Vector& y, const Vector& mu, Eigen::Index n) {
  if (y.size() != mu.size() || y.size() != n) {
    throw ContractError("mahalanobis: dimension mismatch (y " + std::to_string(y.size()) +
                        ", mu " + std::to_string(mu.size()) + ", C " + std::to_string(n) + ")");
  }
  if (!y.allFinite() || !mu.allFinite()) throw ContractError("mahalanobis: non-finite input");
}

}  // namespace

double mahalanobis(const Vector& y, const Vector& mu, const Matrix& C) {
  if (C.rows() != C.cols()) throw ContractError("mahalanobis: covariance must be square");
  check_residual_dims(y, mu, C.rows());

  const double cond = symmetric_condition(C);
  if (!(cond <= kMaxInnovationCondition)) {
    throw DegenerateError("mahalanobis: covariance is singular or indefinite", cond);
  }
  const Eigen::LLT<Matrix> llt(C);
  if (llt.info() != Eigen::Success) {
    throw DegenerateError("mahalanobis: covariance is not positive definite", cond);
  }
  const Vector z = llt.matrixL().solve(y - mu);
  return z.norm();
}

double mahalanobis_diag(const Vector& y, const Vector& mu, const Vector& C_diag) {
  check_residual_dims(y, mu, C_diag.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < C_diag.size(); ++i) {
    if (!(C_diag[i] > 0.0)) {
      throw ContractError("mahalanobis_diag: diagonal entry " + std::to_string(i) +
                          " is not positive");
    }
    const double q = y[i] - mu[i];
    sum += std::sqrt(q * q / C_diag[i]);
  }
  return sum;
}

double local_weight(double md, double xi) {
  const double w = 1.0 / (1.0 + std::exp(xi - md));
  return std::clamp(w, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double chi2_xi(int dof, double confidence) {
  if (dof < 1) throw ContractError("chi2_xi: dof must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ContractError("chi2_xi: confidence must lie in (0, 1)");
  }
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return std::sqrt(boost::math::quantile(dist, confidence));
}

GaussianState seed_belief(const LinearModel& model, const Vector& y, double init_pos_var,
                          double init_vel_var) {
  const auto n = model.state_dim();
  const Matrix pinv = model.C.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix observed = pinv * model.C;
  GaussianState s;
  s.mean = pinv * y;
  s.cov = init_pos_var * pinv * pinv.transpose() +
          init_vel_var * (Matrix::Identity(n, n) - observed);
  s.cov = 0.5 * (s.cov + s.cov.transpose());
  return s;
}

ExpertReport expert_step(ExpertState& state, const LinearModel& model,
                         const std::optional<Vector>& y, const ExpertConfig& config,
                         std::int64_t frame) {
  if (!(config.xi > 0.0)) throw ContractError("expert: xi must be positive");
  validate(model);

  ExpertReport report;
  report.frame = frame;
  state.frame = frame;

  const bool stale = state.misses >= config.stale_after;
  if (y && (!state.belief || stale)) {
    state.belief = seed_belief(model, *y, config.init_pos_var, config.init_vel_var);
    state.misses = 0;
    state.last_md = 0.0;
    report.posterior = *state.belief;
    report.predicted_meas = *y;
    report.innovation_cov = model.C * state.belief->cov * model.C.transpose() + model.Rvv;
    report.md = 0.0;
    report.w_M = local_weight(0.0, config.xi);
    report.present = true;
    report.reinitialized = true;
    return report;
  }

  if (!y) {
    ++state.misses;
    if (state.belief) {
      state.belief = kf_predict(*state.belief, model);
      report.posterior = *state.belief;
      report.predicted_meas = model.C * state.belief->mean;
      report.innovation_cov = model.C * state.belief->cov * model.C.transpose() + model.Rvv;
    }
    report.md = state.last_md;
    const double fresh = local_weight(state.last_md, config.xi);
    const double w = 1.0 - (1.0 - fresh) * std::exp2(-static_cast<double>(state.misses));
    report.w_M = std::clamp(w, fresh, std::nextafter(1.0, 0.0));
    return report;
  }

  const GaussianState prior = kf_predict(*state.belief, model);
  UpdateResult upd = kf_update(prior, model, *y);
  report.predicted_meas = *y - upd.innovation;
  report.innovation_cov = upd.innovation_cov;
  report.md = config.use_diag_approx
                  ? mahalanobis_diag(*y, report.predicted_meas, upd.innovation_cov.diagonal())
                  : mahalanobis(*y, report.predicted_meas, upd.innovation_cov);
  report.w_M = local_weight(report.md, config.xi);
  report.present = true;
  report.posterior = std::move(upd.posterior);

  state.belief = report.posterior;
  state.misses = 0;
  state.last_md = report.md;
  return report;
}

}  // namespace habdf
