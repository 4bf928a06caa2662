#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "habdf/box.hpp"

namespace habdf {

inline constexpr double kSuccessJaccard = 0.5;
inline constexpr double kSuccessDistance = 50.0;  // pixels

struct FrameEval {
  double jaccard = 0.0;
  double dist = 0.0;
  bool success = false;
  std::int64_t frame = 0;
};

/// Intersection over union of the axis-aligned rectangles
/// [u - w/2, u + w/2] x [v - h/2, v + h/2]. Zero when the union has no area.
double jaccard(const BoundingBox& a, const BoundingBox& b);

/// Same 4-D Euclidean distance the voting stage uses.
double gt_distance(const BoundingBox& a, const BoundingBox& gt);

/// j >= 0.5 and d <= 50, both inclusive.
bool success(double j, double d);

FrameEval evaluate_frame(const BoundingBox& estimate, const BoundingBox& gt, std::int64_t frame);

struct ApproachRun {
  std::string name;
  std::vector<FrameEval> evals;
};

struct ApproachSummary {
  std::string name;
  std::size_t frames = 0;
  double mean_jaccard = 0.0;
  double mean_dist = 0.0;
  double success_rate = 0.0;
};

/// One row per approach, in input order. An approach without frames is a
/// ContractError.
std::vector<ApproachSummary> summarize(const std::vector<ApproachRun>& runs);

}  // namespace habdf
