#pragma once

#include <stdexcept>
#include <string>

namespace habdf {

/// Precondition violated by the caller: wrong dimensions, non-finite input,
/// out-of-range parameter.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Consensus voting needs at least three detectors.
class InsufficientDetectors : public ContractError {
 public:
  using ContractError::ContractError;
};

/// A covariance that must be inverted is singular or too badly conditioned.
class DegenerateError : public std::runtime_error {
 public:
  DegenerateError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}

  /// Condition-number estimate of the offending matrix (inf when singular).
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace habdf
