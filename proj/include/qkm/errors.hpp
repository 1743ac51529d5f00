#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qkm {

// Raised on malformed tabular input; row/col are 1-based and refer to the
// physical file (a header line counts as row 1).
struct ParseError : std::runtime_error {
  std::size_t row;
  std::size_t col;
  ParseError(const std::string& msg, std::size_t row_, std::size_t col_)
      : std::runtime_error(msg + " (row " + std::to_string(row_) + ", column " +
                           std::to_string(col_) + ")"),
        row(row_),
        col(col_) {}
};

// Invalid combination of construction parameters (sizes, ratios, bounds).
struct ConstructionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Internal invariant broken while building a coreset; seeing this is a bug.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// A solver produced a partition with an empty side, so no centroid pair exists.
struct DegeneratePartitionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qkm
