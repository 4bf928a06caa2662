#include "habdf/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "habdf/errors.hpp"

namespace habdf {

namespace {

double pick(const std::vector<double>& v, std::size_t i) {
  if (v.empty()) return 1.0;
  return v.size() == 1 ? v.front() : v.at(i);
}

void check_per_detector(const std::vector<double>& v, std::size_t n, const char* name) {
  if (!v.empty() && v.size() != 1 && v.size() != n) {
    throw ContractError(std::string("fusion config: ") + name + " has " +
                        std::to_string(v.size()) + " entries for " + std::to_string(n) +
                        " detectors");
  }
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ContractError(std::string("fusion config: ") + name + " entries must be positive");
    }
  }
}

}  // namespace

double FusionConfig::gamma_for(std::size_t i) const { return pick(gamma, i); }
double FusionConfig::delta_for(std::size_t i) const { return pick(delta, i); }

void validate(const FusionConfig& config, std::size_t n_detectors) {
  check_per_detector(config.gamma, n_detectors, "gamma");
  check_per_detector(config.delta, n_detectors, "delta");
  if (!(config.cov_floor > 0.0)) throw ContractError("fusion config: cov_floor must be positive");
  if (config.stale_after < 1) throw ContractError("fusion config: stale_after must be >= 1");
  if (!(config.expert.xi > 0.0)) throw ContractError("fusion config: xi must be positive");
  validate(config.vote);
}

double adapt_rvv(double w_d, double w_M, double gamma, double delta, double cov_floor) {
  return std::max(gamma * w_d + delta * w_M, cov_floor);
}

FusedEstimate fusion_update(const GaussianState& predicted, const Matrix& observation,
                            std::span<const std::optional<Vector>> measurements,
                            std::span<const double> w_d, std::span<const double> w_M,
                            const FusionConfig& config, std::int64_t frame) {
  const std::size_t n = measurements.size();
  if (w_d.size() != n || w_M.size() != n) {
    throw ContractError("fusion_update: weights not aligned with detectors");
  }
  const auto p = observation.rows();
  const auto dim = observation.cols();

  FusedEstimate out;
  out.frame = frame;
  out.per_detector.resize(n);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto& d = out.per_detector[i];
    d.w_d = w_d[i];
    d.w_M = w_M[i];
    d.rvv_scale =
        adapt_rvv(w_d[i], w_M[i], config.gamma_for(i), config.delta_for(i), config.cov_floor);
    d.present = measurements[i].has_value();
    if (d.present) {
      if (measurements[i]->size() != p) {
        throw ContractError("fusion_update: detector " + std::to_string(i) +
                            " measurement has dimension " +
                            std::to_string(measurements[i]->size()) + ", expected " +
                            std::to_string(p));
      }
      rows.push_back(i);
    }
  }

  if (rows.empty()) {
    out.state = predicted;
    out.coasting = true;
    return out;
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  Matrix C(m * p, dim);
  Matrix R = Matrix::Zero(m * p, m * p);
  Vector y(m * p);
  for (Eigen::Index k = 0; k < m; ++k) {
    const std::size_t i = rows[static_cast<std::size_t>(k)];
    C.middleRows(k * p, p) = observation;
    R.block(k * p, k * p, p, p).diagonal().setConstant(out.per_detector[i].rvv_scale);
    y.segment(k * p, p) = *measurements[i];
  }
  out.state = kf_update(predicted, C, R, y).posterior;
  return out;
}

FusedEstimate fusion_step(const GaussianState& center, const LinearModel& model,
                          std::span<const ExpertReport> reports,
                          std::span<const std::optional<Vector>> measurements,
                          const FusionConfig& config, std::int64_t frame) {
  if (reports.size() != measurements.size()) {
    throw ContractError("fusion_step: " + std::to_string(reports.size()) + " reports for " +
                        std::to_string(measurements.size()) + " detectors");
  }
  if (measurements.size() < 3) {
    throw InsufficientDetectors("fusion needs at least 3 detectors, got " +
                                std::to_string(measurements.size()));
  }
  const GaussianState predicted = kf_predict(center, model);
  const std::vector<double> w_d = vote_weights(measurements, config.vote);
  std::vector<double> w_M(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) w_M[i] = reports[i].w_M;

  FusedEstimate out = fusion_update(predicted, model.C, measurements, w_d, w_M, config, frame);
  for (std::size_t i = 0; i < reports.size(); ++i) out.per_detector[i].md = reports[i].md;
  return out;
}

FusedEstimate fusion_step(const GaussianState& center, const LinearModel& model,
                          std::span<const ExpertReport> reports,
                          std::span<const std::optional<BoundingBox>> boxes,
                          const FusionConfig& config, std::int64_t frame) {
  std::vector<std::optional<Vector>> meas(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i]) {
      validate(*boxes[i]);
      meas[i] = Vector(boxes[i]->as_vector());
    }
  }
  return fusion_step(center, model, reports, meas, config, frame);
}

Pipeline::Pipeline(std::size_t n_detectors, PipelineParams params, FusionConfig config)
    : params_(std::move(params)), config_(std::move(config)) {
  if (n_detectors < 3) {
    throw InsufficientDetectors("a consensus needs at least 3 detectors, got " +
                                std::to_string(n_detectors));
  }
  validate(config_, n_detectors);
  if (!params_.meas_var.empty() && params_.meas_var.size() != 1 &&
      params_.meas_var.size() != n_detectors) {
    throw ContractError("pipeline: meas_var has " + std::to_string(params_.meas_var.size()) +
                        " entries for " + std::to_string(n_detectors) + " detectors");
  }
  config_.expert.stale_after = config_.stale_after;
  config_.expert.init_pos_var = params_.init_pos_var;
  config_.expert.init_vel_var = params_.init_vel_var;

  center_model_ = build_cv_model(params_.model);
  expert_models_.reserve(n_detectors);
  for (std::size_t i = 0; i < n_detectors; ++i) {
    TrackModelParams mp = params_.model;
    if (!params_.meas_var.empty()) {
      mp.meas_var = params_.meas_var.size() == 1 ? params_.meas_var.front() : params_.meas_var[i];
    }
    expert_models_.push_back(build_cv_model(mp));
  }
  experts_.resize(n_detectors);
}

PipelineFrame Pipeline::step(std::int64_t frame,
                             std::span<const std::optional<Vector>> measurements) {
  if (measurements.size() != experts_.size()) {
    throw ContractError("pipeline: got " + std::to_string(measurements.size()) +
                        " measurements for " + std::to_string(experts_.size()) + " detectors");
  }

  PipelineFrame out;
  out.reports.reserve(experts_.size());
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    out.reports.push_back(
        expert_step(experts_[i], expert_models_[i], measurements[i], config_.expert, frame));
  }

  if (center_) {
    out.fused = fusion_step(*center_, center_model_, out.reports, measurements, config_, frame);
    center_ = out.fused.state;
    out.initialized = true;
    return out;
  }

  // Seed the center from the mean of the first present measurements.
  Vector sum = Vector::Zero(center_model_.meas_dim());
  int count = 0;
  for (const auto& m : measurements) {
    if (m) {
      sum += *m;
      ++count;
    }
  }
  const std::vector<double> w_d = vote_weights(measurements, config_.vote);
  out.fused.frame = frame;
  out.fused.per_detector.resize(experts_.size());
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    auto& d = out.fused.per_detector[i];
    d.w_d = w_d[i];
    d.w_M = out.reports[i].w_M;
    d.md = out.reports[i].md;
    d.rvv_scale = adapt_rvv(d.w_d, d.w_M, config_.gamma_for(i), config_.delta_for(i),
                            config_.cov_floor);
    d.present = measurements[i].has_value();
  }
  if (count == 0) {
    out.fused.coasting = true;
    return out;
  }
  center_ = seed_belief(center_model_, sum / count, params_.init_pos_var, params_.init_vel_var);
  out.fused.state = *center_;
  out.initialized = true;
  return out;
}

Pipeline make_pipeline(std::size_t n_detectors, const PipelineParams& params,
                       const FusionConfig& config) {
  return Pipeline(n_detectors, params, config);
}

}  // namespace habdf
