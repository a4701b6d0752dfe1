#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skewerg {

enum class ErrorKind {
  // input / configuration problems
  InvalidArgument,
  LengthMismatch,
  InsufficientPath,
  WindowTooShort,
  EmptyInterval,
  BlockTooLong,
  DimensionTooHigh,
  // numeric failures
  NonIntegrableDensity,
  QuadratureFailure,
  NonPositiveDensity,
  SingularToeplitz,
  EmbeddingFailure,
  Inconclusive,
};

std::string_view to_string(ErrorKind kind);

/// True for failures of a numeric rule, false for rejected inputs.
bool is_numeric(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InsufficientPath: return "InsufficientPath";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::EmptyInterval: return "EmptyInterval";
    case ErrorKind::BlockTooLong: return "BlockTooLong";
    case ErrorKind::DimensionTooHigh: return "DimensionTooHigh";
    case ErrorKind::NonIntegrableDensity: return "NonIntegrableDensity";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorKind::SingularToeplitz: return "SingularToeplitz";
    case ErrorKind::EmbeddingFailure: return "EmbeddingFailure";
    case ErrorKind::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

inline bool is_numeric(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonIntegrableDensity:
    case ErrorKind::QuadratureFailure:
    case ErrorKind::NonPositiveDensity:
    case ErrorKind::SingularToeplitz:
    case ErrorKind::EmbeddingFailure:
    case ErrorKind::Inconclusive:
      return true;
    default:
      return false;
  }
}

}  // namespace skewerg
