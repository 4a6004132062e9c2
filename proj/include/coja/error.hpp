#pragma once

#include <stdexcept>
#include <string>

namespace coja {

/// Base class for everything this library throws on a broken contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on arguments or configuration was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input that cannot be processed numerically (zero vector, exhausted redraws).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// File could not be written or read; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace coja
