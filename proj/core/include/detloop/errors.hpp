#pragma once

#include <stdexcept>
#include <string>

namespace detloop {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible matrix dimensions or tensor cardinalities.
struct DimensionError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// A result that should be real/normalized/PSD came out otherwise.
struct NumericalError : Error {
  using Error::Error;
};

struct SignalingError : Error {
  using Error::Error;
};

struct GuardError : Error {
  using Error::Error;
};

struct LpError : Error {
  using Error::Error;
};

struct NoCrossingError : Error {
  using Error::Error;
};

}  // namespace detloop
