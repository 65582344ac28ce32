#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sparselab {

using index_t = std::int64_t;

/// Raised when a ratio-style metric has an empty denominator
/// (fill ratio of a matrix with no stored blocks, and similar).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a format's index arrays are inconsistent with its shape.
class CorruptFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline index_t ceil_div(index_t a, index_t b) { return (a + b - 1) / b; }

}  // namespace sparselab
