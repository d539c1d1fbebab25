#pragma once

#include <stdexcept>
#include <string>

namespace fsiam {

enum class ErrorCode {
  kInvalidArgument,
  kBehindCamera,
  kSingularProjection,
  kDegenerateBox,
  kUnbounded,
  kZeroUnion,
  kEmptyResult,
  kLengthMismatch,
  kInvalidDistribution,
  kMissingKey,
  kMalformedMatrix,
  kMalformedLine,
  kTruncatedFile,
  kUnknownScene,
  kFrameMismatch,
  kMissingInitialGT,
  kEmptySeries,
  kIo,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kSingularProjection: return "SingularProjection";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kUnbounded: return "Unbounded";
    case ErrorCode::kZeroUnion: return "ZeroUnion";
    case ErrorCode::kEmptyResult: return "EmptyResult";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kMalformedMatrix: return "MalformedMatrix";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kUnknownScene: return "UnknownScene";
    case ErrorCode::kFrameMismatch: return "FrameMismatch";
    case ErrorCode::kMissingInitialGT: return "MissingInitialGT";
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace fsiam
