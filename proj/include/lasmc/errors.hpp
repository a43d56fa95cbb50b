#pragma once

#include <stdexcept>
#include <string>

namespace lasmc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Degenerate populations, improper trials, Kalman breakdown.
struct NumericalError : Error {
  using Error::Error;
};

// Exhaustive enumeration would exceed the library limit.
struct GuardError : Error {
  using Error::Error;
};

// Caller violated an operation precondition (horizon, dimensions, partition).
struct PreconditionError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

inline constexpr double kEnumerationGuard = 1e6;

}  // namespace lasmc
