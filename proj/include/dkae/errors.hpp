#pragma once

#include <stdexcept>
#include <string>

namespace dkae {

// Shape or size mismatch between operands.
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Input that must be symmetric is not, beyond tolerance.
struct SymmetryError : std::invalid_argument {
  explicit SymmetryError(const std::string& what) : std::invalid_argument(what) {}
};

// Cholesky pivot failure: the matrix is not positive definite.
struct DefinitenessError : std::runtime_error {
  explicit DefinitenessError(const std::string& what) : std::runtime_error(what) {}
};

// A quantity that must be nonzero (e.g. a matrix norm used for normalization)
// vanished, or there is not enough data to compute the requested statistic.
struct DegenerateInputError : std::runtime_error {
  explicit DegenerateInputError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed binary file; the message names the offending field.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative routine exhausted its iteration budget.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dkae
