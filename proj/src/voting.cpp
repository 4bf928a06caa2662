#include "habdf/voting.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "habdf/errors.hpp"

namespace habdf {

void validate(const BoundingBox& box) {
  if (!std::isfinite(box.u) || !std::isfinite(box.v) || !std::isfinite(box.h) ||
      !std::isfinite(box.w)) {
    throw ContractError("bounding box has non-finite fields");
  }
  if (box.h < 0.0 || box.w < 0.0) throw ContractError("bounding box has negative size");
}

void validate(const VoteConfig& config) {
  if (!(config.omega0 >= 0.0) || !(config.omega >= 0.0) || !(config.lambda >= 0.0) ||
      !std::isfinite(config.omega0) || !std::isfinite(config.omega) ||
      !std::isfinite(config.lambda)) {
    throw ContractError("vote config: omega0, omega and lambda must be finite and >= 0");
  }
  if (config.scale.size() > 0 && !(config.scale.array() > 0.0).all()) {
    throw ContractError("vote config: scale entries must be positive");
  }
}

double box_distance(const BoundingBox& p, const BoundingBox& r) {
  return (p.as_vector() - r.as_vector()).norm();
}

double measurement_distance(const Vector& a, const Vector& b, const Vector& scale) {
  if (a.size() != b.size()) throw ContractError("measurement_distance: dimension mismatch");
  if (scale.size() == 0) return (a - b).norm();
  if (scale.size() != a.size()) throw ContractError("measurement_distance: scale dimension mismatch");
  return ((a - b).array() / scale.array()).matrix().norm();
}

double consensus_distance(std::span<const BoundingBox> boxes, std::size_t i) {
  if (boxes.size() < 3) {
    throw InsufficientDetectors("consensus needs at least 3 detectors, got " +
                                std::to_string(boxes.size()));
  }
  if (i >= boxes.size()) throw ContractError("consensus_distance: detector index out of range");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < boxes.size(); ++j) {
    if (j != i) best = std::min(best, box_distance(boxes[i], boxes[j]));
  }
  return best;
}

namespace {

std::vector<double> nearest_peer(std::span<const Vector> m, const Vector& scale) {
  std::vector<double> best(m.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      const double d = measurement_distance(m[i], m[j], scale);
      best[i] = std::min(best[i], d);
      best[j] = std::min(best[j], d);
    }
  }
  return best;
}

}  // namespace

std::vector<double> consensus_distances(std::span<const Vector> measurements,
                                        const Vector& scale) {
  if (measurements.size() < 3) {
    throw InsufficientDetectors("consensus needs at least 3 detectors, got " +
                                std::to_string(measurements.size()));
  }
  return nearest_peer(measurements, scale);
}

double vote_weight(double min_d, const VoteConfig& config) {
  return config.omega0 + config.omega * (1.0 + std::tanh(min_d - config.lambda));
}

std::vector<double> vote_weights(std::span<const std::optional<Vector>> measurements,
                                 const VoteConfig& config) {
  std::vector<Vector> present;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    if (measurements[i]) {
      present.push_back(*measurements[i]);
      index.push_back(i);
    }
  }

  std::vector<double> out(measurements.size(), config.omega0 + 2.0 * config.omega);
  if (present.size() == 1) {
    out[index[0]] = config.omega0 + config.omega;
  } else if (present.size() >= 2) {
    const auto d = nearest_peer(present, config.scale);
    for (std::size_t k = 0; k < index.size(); ++k) out[index[k]] = vote_weight(d[k], config);
  }
  return out;
}

}  // namespace habdf
