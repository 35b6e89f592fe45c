#pragma once

#include <stdexcept>
#include <string>

namespace astcost {

/// Malformed or inconsistent input data (files, graphs, datasets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not line up for an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared during a numeric operation. Training runs
/// surface this as divergence.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A training run produced a non-finite loss or parameter.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace astcost
