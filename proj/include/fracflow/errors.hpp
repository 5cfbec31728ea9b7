#pragma once

#include <stdexcept>
#include <string>

namespace fracflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (z = 0, delta <= 0, empty contours).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or invalid configuration (bad alpha, delta < 2h, shape outside the grid).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or non-finite input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// A quadrature or refinement loop failed to reach its tolerance.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

// Operation called on an object that does not satisfy its requirements (odd kernel for an even-only path).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Non-finite state during time stepping.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fracflow
