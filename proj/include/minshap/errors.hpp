#pragma once

#include <stdexcept>
#include <string>

namespace minshap {

/// Bad argument to a library call (wrong shape, out-of-range level, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Object used in a state that does not support the call.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed user configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data could not be read or violates the dataset invariants. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit or an evaluation failed numerically. CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace minshap
