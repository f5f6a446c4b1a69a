#pragma once

#include <stdexcept>
#include <string>

namespace nsm {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File missing, unreadable or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File readable but its content is malformed or truncated.
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

/// Container written by an incompatible format version.
class VersionMismatch : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Parameter or input violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A map or model was built with a different parameter set than the active one.
class FingerprintMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A pipeline stage could not produce a result.
class PipelineError : public Error {
 public:
  using Error::Error;
};

}  // namespace nsm
