#pragma once

#include <stdexcept>
#include <string>

namespace coaldetect {

/// A violated precondition on caller-supplied values (bad tree, out-of-range
/// parameter, mismatched sizes). The CLI maps it to exit code 65.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a calibration search cannot bracket its target.
class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coaldetect
