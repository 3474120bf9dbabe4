#pragma once

#include <stdexcept>
#include <string>

namespace deepemo {

enum class ErrorCode {
  Usage,
  Io,
  MalformedHeader,
  UnsupportedFormat,
  TruncatedFile,
  EmptyClip,
  NonPowerOfTwoLength,
  SignalShorterThanFrame,
  NegativeFrequency,
  InvalidBandRange,
  MalformedFilename,
  UnknownEmotionCode,
  MissingDirectory,
  EmptyDataset,
  EmptyInput,
  ShapeMismatch,
  TargetOutOfRange,
  NoFinalLinear,
  BadMagic,
  VersionMismatch,
  MissingParameter,
  ChecksumMismatch,
  EmptyTrainSet,
  NonFiniteLoss,
  EmptyEvalSet,
  Internal,
};

constexpr const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::EmptyClip: return "EmptyClip";
    case ErrorCode::NonPowerOfTwoLength: return "NonPowerOfTwoLength";
    case ErrorCode::SignalShorterThanFrame: return "SignalShorterThanFrame";
    case ErrorCode::NegativeFrequency: return "NegativeFrequency";
    case ErrorCode::InvalidBandRange: return "InvalidBandRange";
    case ErrorCode::MalformedFilename: return "MalformedFilename";
    case ErrorCode::UnknownEmotionCode: return "UnknownEmotionCode";
    case ErrorCode::MissingDirectory: return "MissingDirectory";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::NoFinalLinear: return "NoFinalLinear";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyEvalSet: return "EmptyEvalSet";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable error code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace deepemo
