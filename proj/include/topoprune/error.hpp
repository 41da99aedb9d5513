#pragma once

#include <stdexcept>
#include <string>

namespace topoprune {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad dimensions, non-finite values, malformed files,
/// out-of-range parameters. Maps to CLI exit code 2.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A pruning schedule that cannot be satisfied (e.g. T-IMP asked to keep
/// fewer weights than the spanning forest). Maps to CLI exit code 3.
class InfeasibleScheduleError : public Error {
public:
  using Error::Error;
};

} // namespace topoprune
