#pragma once

#include <stdexcept>
#include <string>

namespace logicmix {

/// Shape or length disagreement between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated by the caller.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `line` is 1-based; 0 means "not line-addressable".
struct ParseError : std::runtime_error {
  ParseError(std::string msg, std::size_t line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg
                                       : std::move(msg)),
        line(line_no) {}
  std::size_t line;
};

/// Dataset too small to supply the requested companions.
struct InsufficientDataset : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace logicmix
