#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "habdf/box.hpp"
#include "habdf/expert.hpp"
#include "habdf/filter.hpp"
#include "habdf/voting.hpp"

namespace habdf {

struct FusionConfig {
  // Diagonals of Gamma and Delta, one entry per detector. A single entry is
  // broadcast to every detector; empty means 1 for all.
  std::vector<double> gamma;
  std::vector<double> delta;
  double cov_floor = 1e-6;
  int stale_after = 10;
  VoteConfig vote;
  ExpertConfig expert;

  double gamma_for(std::size_t i) const;
  double delta_for(std::size_t i) const;
};

/// Throws ContractError unless the config is usable with `n_detectors`.
void validate(const FusionConfig& config, std::size_t n_detectors);

struct DetectorDiagnostics {
  double w_d = 0.0;
  double w_M = 0.0;
  double md = 0.0;
  double rvv_scale = 0.0;  // adapted measurement-noise scale, >= cov_floor
  bool present = false;
};

struct FusedEstimate {
  GaussianState state;
  std::vector<DetectorDiagnostics> per_detector;
  std::int64_t frame = 0;
  bool coasting = false;  // no detector contributed a measurement
};

/// Adapted noise scale for one detector: max(gamma w_d + delta w_M, cov_floor).
double adapt_rvv(double w_d, double w_M, double gamma, double delta, double cov_floor);

/// Fusion-center measurement update with the weights already known.
/// Present detectors are stacked into one measurement whose noise is block
/// diagonal, block i being adapt_rvv(w_d[i], w_M[i]) * I. Absent detectors
/// contribute no rows; with none present the prediction is returned and
/// flagged as coasting.
FusedEstimate fusion_update(const GaussianState& predicted, const Matrix& observation,
                            std::span<const std::optional<Vector>> measurements,
                            std::span<const double> w_d, std::span<const double> w_M,
                            const FusionConfig& config, std::int64_t frame);

/// One fusion-center frame: predict with `model`, derive w_d from the present
/// measurements by nearest-peer voting, take w_M from the experts' reports,
/// and update. `reports` and `measurements` are indexed by detector.
FusedEstimate fusion_step(const GaussianState& center, const LinearModel& model,
                          std::span<const ExpertReport> reports,
                          std::span<const std::optional<Vector>> measurements,
                          const FusionConfig& config, std::int64_t frame);

/// Bounding-box convenience overload; absent detectors are std::nullopt.
FusedEstimate fusion_step(const GaussianState& center, const LinearModel& model,
                          std::span<const ExpertReport> reports,
                          std::span<const std::optional<BoundingBox>> boxes,
                          const FusionConfig& config, std::int64_t frame);

struct PipelineParams {
  TrackModelParams model;        // shared kinematics; model.meas_var is the default
  std::vector<double> meas_var;  // per-detector expert measurement variance (optional)
  double init_pos_var = 100.0;
  double init_vel_var = 100.0;
};

struct PipelineFrame {
  std::vector<ExpertReport> reports;
  FusedEstimate fused;
  bool initialized = false;  // the fusion center holds a belief
};

/// n experts plus one fusion center driven by a shared frame clock.
class Pipeline {
 public:
  Pipeline(std::size_t n_detectors, PipelineParams params, FusionConfig config);

  /// Feed one frame. `measurements[i]` is detector i's (u, v, h, w, ...)
  /// vector or nullopt when the detector reported nothing valid.
  PipelineFrame step(std::int64_t frame, std::span<const std::optional<Vector>> measurements);

  std::size_t detectors() const { return experts_.size(); }
  const LinearModel& center_model() const { return center_model_; }
  const LinearModel& expert_model(std::size_t i) const { return expert_models_.at(i); }
  const std::optional<GaussianState>& center() const { return center_; }
  const FusionConfig& config() const { return config_; }

 private:
  PipelineParams params_;
  FusionConfig config_;
  LinearModel center_model_;
  std::vector<LinearModel> expert_models_;
  std::vector<ExpertState> experts_;
  std::optional<GaussianState> center_;
};

/// Builds a pipeline; fewer than 3 detectors cannot reach a consensus and are
/// rejected with InsufficientDetectors.
Pipeline make_pipeline(std::size_t n_detectors, const PipelineParams& params,
                       const FusionConfig& config);

}  // namespace habdf
