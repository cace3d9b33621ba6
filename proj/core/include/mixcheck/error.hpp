#pragma once

#include <stdexcept>
#include <string>

namespace mixcheck {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, out-of-range arguments, invalid specs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation could not produce a trustworthy answer (degenerate
/// importance weights, failed sampler diagnostics, missing normalizer).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

/// Requested an operation the chosen model/prior combination does not support.
class UnsupportedError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace mixcheck
