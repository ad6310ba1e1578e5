#pragma once

#include <stdexcept>
#include <string>

namespace imd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BoundsError : public Error { using Error::Error; };
class OrderingError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class LookupError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class CoverageError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class DegenerateFitError : public Error { using Error::Error; };
class SingularSystemError : public Error { using Error::Error; };

/// Wraps a failure inside one pipeline stage; what() reads "<stage>: <cause>".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace imd
