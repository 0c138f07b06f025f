#pragma once

#include <stdexcept>

namespace rfpme {

// Field lives on a different grid than the operator was asked to use.
struct GridMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteValue : std::domain_error {
  using std::domain_error::domain_error;
};

// The round sphere (or a surface) shrank to a point inside the time window.
struct ExtinctionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CflViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PositivityLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rfpme
