#pragma once

#include <stdexcept>
#include <string>

namespace conslaw {

/// Precondition violated by caller-supplied input (bad dimension, bad
/// parameter, malformed manifest).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A state or argument left the range on which a model is valid.
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// Numerical breakdown during a run (NaN, stream gap).
class RunError : public std::runtime_error {
 public:
  explicit RunError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace conslaw
