#pragma once

#include <cstdint>
#include <optional>

#include "habdf/filter.hpp"

namespace habdf {

// Local weighting convention: w_M is a *penalty*. It grows with the
// Mahalanobis distance of a measurement from its prediction, and the fusion
// center adds it to that detector's measurement noise, so a higher w_M means
// the detector is trusted less.

struct ExpertConfig {
  double xi = 3.0802;            // sigmoid offset, see chi2_xi
  bool use_diag_approx = false;  // sum-of-standardized-residuals form
  int stale_after = 10;          // consecutive misses before reinitializing
  double init_pos_var = 100.0;   // covariance of a freshly initialized track
  double init_vel_var = 100.0;
};

struct ExpertReport {
  GaussianState posterior;
  Vector predicted_meas;
  Matrix innovation_cov;
  double md = 0.0;
  double w_M = 0.5;
  std::int64_t frame = 0;
  bool present = false;        // a measurement was used this frame
  bool reinitialized = false;  // belief was (re)seeded from the measurement
};

/// Mutable per-detector state threaded through expert_step.
struct ExpertState {
  std::optional<GaussianState> belief;
  int misses = 0;
  double last_md = 0.0;
  std::int64_t frame = -1;
};

/// sqrt((y-mu)' C^-1 (y-mu)). C must be symmetric positive definite; a
/// singular or indefinite C raises DegenerateError.
double mahalanobis(const Vector& y, const Vector& mu, const Matrix& C);

/// Approximation using only the diagonal of the innovation covariance:
///   sum_i (q_i^2 / C_i)^(1/2),  q = y - mu.
/// Note this is the L1 norm of the standardized residual, so it is >= the
/// exact distance whenever C is diagonal.
double mahalanobis_diag(const Vector& y, const Vector& mu, const Vector& C_diag);

/// w_M = 1 / (1 + exp(xi - md)), kept strictly inside (0, 1).
double local_weight(double md, double xi);

/// sqrt of the chi-squared(dof) quantile at `confidence`. The distance is the
/// square root of a chi-squared variable under the Gaussian model.
double chi2_xi(int dof, double confidence);

/// One frame of a detector's expert: predict, score `y` against the predicted
/// measurement, then update. With `y` absent the expert only predicts and its
/// penalty decays toward 1 by half the remaining distance per missed frame.
/// A measurement arriving after `stale_after` or more consecutive misses
/// reseeds the belief instead of updating it.
ExpertReport expert_step(ExpertState& state, const LinearModel& model,
                         const std::optional<Vector>& y, const ExpertConfig& config,
                         std::int64_t frame);

/// Belief seeded from a single measurement: mean = C^+ y, position covariance
/// init_pos_var in the observed subspace, init_vel_var elsewhere.
GaussianState seed_belief(const LinearModel& model, const Vector& y, double init_pos_var,
                          double init_vel_var);

}  // namespace habdf
