#pragma once

#include <stdexcept>
#include <string>

namespace vrft {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument or configuration value violates a precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input data (files, signals, regressors) cannot be processed.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace vrft
