#pragma once

#include <Eigen/Dense>

namespace habdf {

/// Target region in pixels: center column u, center row v, height h, width w.
struct BoundingBox {
  double u = 0.0;
  double v = 0.0;
  double h = 0.0;
  double w = 0.0;

  Eigen::Vector4d as_vector() const { return {u, v, h, w}; }

  static BoundingBox from_vector(const Eigen::Ref<const Eigen::VectorXd>& x) {
    return {x[0], x[1], x[2], x[3]};
  }

  bool operator==(const BoundingBox&) const = default;
};

/// Throws ContractError on non-finite fields or negative sizes.
void validate(const BoundingBox& box);

}  // namespace habdf
