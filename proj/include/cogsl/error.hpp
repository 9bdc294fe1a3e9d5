#pragma once

#include <stdexcept>
#include <string>

namespace cogsl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required input file is missing or unreadable.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Data violates a structural invariant (bad index, overlapping splits, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A caller passed an argument outside the documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// NaN / divergence / singular system.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cogsl
