#pragma once

#include <stdexcept>
#include <string>

namespace shadowbench {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid value for the math: bad severity, degenerate landmarks, empty region.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raster or tensor dimensions that do not line up.
class ShapeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class IoErrorKind { missing_file, unsupported_format, unsupported_bit_depth, corrupt_stream, write_failed };

class IoError : public Error {
 public:
  IoError(IoErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  IoErrorKind kind() const noexcept { return kind_; }

 private:
  IoErrorKind kind_;
};

}  // namespace shadowbench
