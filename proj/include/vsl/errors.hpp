#pragma once

#include <stdexcept>
#include <string>

namespace vsl {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, inconsistent data, out-of-range parameters.
/// The CLI maps this family to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParameterShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Raised when rejection sampling cannot place an item.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// The criterion search found its maximum at a bracket end.
class BracketError : public Error {
 public:
  using Error::Error;
};

}  // namespace vsl
