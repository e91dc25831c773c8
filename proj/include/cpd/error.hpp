#pragma once

#include <stdexcept>
#include <string>

namespace cpd {

// Bad shapes, out-of-range modes or ranks, malformed options.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An algorithm could not produce an answer for this input: zero-norm
// updates, rank-deficient systems, eigen-solver failures, degenerate probes.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File format and filesystem problems.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpd
