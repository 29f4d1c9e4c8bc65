#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

/// Malformed or inconsistent user data (CSV rows, params files, argument values).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration or quadrature failure: non-finite state, step underflow, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown keys, conflicting flags, invalid option values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stefan
