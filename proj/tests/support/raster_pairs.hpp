#pragma once

// Random box pairs that overlap often enough to exercise partial
// intersections, compared against the rasterization oracle.

#include <algorithm>
#include <cmath>
#include <random>

#include "habdf/metrics.hpp"
#include "support/oracles.hpp"

namespace testing_support {

struct RasterAgreement {
  int pairs = 0;
  int overlapping = 0;
  double worst = 0.0;
};

inline RasterAgreement jaccard_vs_raster(int pairs, std::uint64_t seed, long cells_per_axis) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(200.0, 400.0), offset(-60.0, 60.0),
      size(10.0, 120.0);
  RasterAgreement out;
  for (int k = 0; k < pairs; ++k) {
    const habdf::BoundingBox a{center(rng), center(rng), size(rng), size(rng)};
    const habdf::BoundingBox b{a.u + offset(rng), a.v + offset(rng), size(rng), size(rng)};
    const double exact = habdf::jaccard(a, b);
    const double raster =
        oracle::raster_jaccard(a.u, a.v, a.h, a.w, b.u, b.v, b.h, b.w, cells_per_axis);
    out.worst = std::max(out.worst, std::abs(exact - raster));
    if (exact > 0.0) ++out.overlapping;
    ++out.pairs;
  }
  return out;
}

}  // namespace testing_support
