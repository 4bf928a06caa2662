#include "habdf/metrics.hpp"

#include <algorithm>

#include "habdf/errors.hpp"
#include "habdf/voting.hpp"

namespace habdf {

double jaccard(const BoundingBox& a, const BoundingBox& b) {
  validate(a);
  validate(b);
  const double ix = std::max(0.0, std::min(a.u + a.w / 2, b.u + b.w / 2) -
                                      std::max(a.u - a.w / 2, b.u - b.w / 2));
  const double iy = std::max(0.0, std::min(a.v + a.h / 2, b.v + b.h / 2) -
                                      std::max(a.v - a.h / 2, b.v - b.h / 2));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double gt_distance(const BoundingBox& a, const BoundingBox& gt) { return box_distance(a, gt); }

bool success(double j, double d) { return j >= kSuccessJaccard && d <= kSuccessDistance; }

FrameEval evaluate_frame(const BoundingBox& estimate, const BoundingBox& gt, std::int64_t frame) {
  FrameEval e;
  e.frame = frame;
  e.jaccard = jaccard(estimate, gt);
  e.dist = gt_distance(estimate, gt);
  e.success = success(e.jaccard, e.dist);
  return e;
}

std::vector<ApproachSummary> summarize(const std::vector<ApproachRun>& runs) {
  std::vector<ApproachSummary> out;
  out.reserve(runs.size());
  for (const ApproachRun& run : runs) {
    if (run.evals.empty()) {
      throw ContractError("summarize: approach '" + run.name + "' has no evaluated frames");
    }
    ApproachSummary s;
    s.name = run.name;
    s.frames = run.evals.size();
    std::size_t hits = 0;
    for (const FrameEval& e : run.evals) {
      s.mean_jaccard += e.jaccard;
      s.mean_dist += e.dist;
      hits += e.success ? 1 : 0;
    }
    const auto n = static_cast<double>(s.frames);
    s.mean_jaccard /= n;
    s.mean_dist /= n;
    s.success_rate = static_cast<double>(hits) / n;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace habdf
