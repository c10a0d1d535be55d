#pragma once

#include <stdexcept>
#include <string>

namespace latentad {

// Bad user input: malformed data, out-of-range flags, schema mismatches.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inconsistent configuration, e.g. a frequency grid narrower than 1/b.
class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called before the arrays it reads were filled.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The computation ran but produced something unusable (zero variance,
// non-finite values, too many failed replications).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace latentad
