#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strcf {

enum class ErrorKind {
  DimMismatch,
  SymmetryViolation,
  EmptyRegion,
  DimNotDivisible,
  DegenerateRegularization,
  TooLarge,
  DegenerateBox,
  MissingGroundTruth,
  FrameCountMismatch,
  ParseError,
  EmptyInput,
  ImageDecode,
  Io,
  Config,
  Snapshot,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::SymmetryViolation: return "SymmetryViolation";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::DimNotDivisible: return "DimNotDivisible";
    case ErrorKind::DegenerateRegularization: return "DegenerateRegularization";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DegenerateBox: return "DegenerateBox";
    case ErrorKind::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorKind::FrameCountMismatch: return "FrameCountMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ImageDecode: return "ImageDecode";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Snapshot: return "Snapshot";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the ground-truth parser; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace strcf
