#pragma once

#include <optional>
#include <span>
#include <vector>

#include "habdf/box.hpp"
#include "habdf/filter.hpp"

namespace habdf {

struct VoteConfig {
  double omega0 = 1.0;  // base weight
  double omega = 1.0;   // penalty impact
  double lambda = 50.0; // distance at which the penalty is half on
  // Optional per-dimension divisor applied before measuring distances. Empty
  // means raw pixels, mixing center and size coordinates unscaled.
  Vector scale;
};

void validate(const VoteConfig& config);

/// Euclidean distance between the (u, v, h, w) vectors of two boxes.
double box_distance(const BoundingBox& p, const BoundingBox& r);

/// Euclidean distance between measurement vectors, each component divided by
/// `scale` when it is non-empty.
double measurement_distance(const Vector& a, const Vector& b, const Vector& scale = {});

/// Distance from detector i to its nearest peer. Needs at least 3 boxes.
double consensus_distance(std::span<const BoundingBox> boxes, std::size_t i);

/// Nearest-peer distance for every detector. Needs at least 3 measurements.
std::vector<double> consensus_distances(std::span<const Vector> measurements,
                                        const Vector& scale = {});

/// w_d = omega0 + omega * (1 + tanh(min_d - lambda)).
double vote_weight(double min_d, const VoteConfig& config);

/// Voting weights for a frame in which some detectors may be missing.
///  - two or more present: nearest-peer distance among the present ones;
///  - exactly one present: neutral weight omega0 + omega (min_d = lambda);
///  - absent detectors get the saturated weight omega0 + 2 omega.
std::vector<double> vote_weights(std::span<const std::optional<Vector>> measurements,
                                 const VoteConfig& config);

}  // namespace habdf
