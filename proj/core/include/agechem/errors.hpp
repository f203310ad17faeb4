#pragma once

#include <stdexcept>
#include <string>

namespace agechem {

/// Raised when the model data or the requested computation is outside the
/// regime the analysis covers (washout, unstable scheme, infeasible
/// certificate, divergent weighted norm, ...).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for malformed inputs: bad configuration, wrong argument ranges.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace agechem
