#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mispec {

enum class ErrorCode {
  ZeroMassCell,
  MixedRepresentation,
  UnsupportedPair,
  StateMismatch,
  HypothesisViolated,
  NoGrain,
  NonpositiveVariance,
  NegativeTheta,
  LadderViolation,
  SearchSpaceTooLarge,
  ParseError,
  ValidationError,
  HeterogeneousPriors,
  InvalidArgument,
  Internal,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroMassCell: return "ZeroMassCell";
    case ErrorCode::MixedRepresentation: return "MixedRepresentation";
    case ErrorCode::UnsupportedPair: return "UnsupportedPair";
    case ErrorCode::StateMismatch: return "StateMismatch";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NoGrain: return "NoGrain";
    case ErrorCode::NonpositiveVariance: return "NonpositiveVariance";
    case ErrorCode::NegativeTheta: return "NegativeTheta";
    case ErrorCode::LadderViolation: return "LadderViolation";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::HeterogeneousPriors: return "HeterogeneousPriors";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

/// Library-wide exception. `path` locates the offending field for
/// ValidationError raised while reading instance files.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {})
      : std::runtime_error(std::string(to_string(code)) + ": " +
                           (path.empty() ? message : path + ": " + message)),
        code_(code),
        message_(message),
        path_(std::move(path)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string path_;
};

}  // namespace mispec
