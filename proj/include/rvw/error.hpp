#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rvw {

enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  kUnsupportedFormat,
  kMalformedHeader,
  kDimensionMismatch,
  kRoiOutOfBounds,
  kRangeViolation,
  kInvalidSigma,
  kSolveFailure,
  kEigenFailure,
  kQpOutOfRange,
  kBadTemplate,
  kCorruptStream,
  kCrcMismatch,
  kUnsupportedVersion,
  kEncodeOverflow,
  kCapacityExceeded,
  kNoZeroBin,
  kNoCoverRegion,
  kReserveConflict,
  kBadVersion,
  kDivisionByZero,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRoiOutOfBounds: return "RoiOutOfBounds";
    case ErrorCode::kRangeViolation: return "RangeViolation";
    case ErrorCode::kInvalidSigma: return "InvalidSigma";
    case ErrorCode::kSolveFailure: return "SolveFailure";
    case ErrorCode::kEigenFailure: return "EigenFailure";
    case ErrorCode::kQpOutOfRange: return "QpOutOfRange";
    case ErrorCode::kBadTemplate: return "BadTemplate";
    case ErrorCode::kCorruptStream: return "CorruptStream";
    case ErrorCode::kCrcMismatch: return "CrcMismatch";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kEncodeOverflow: return "EncodeOverflow";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kNoZeroBin: return "NoZeroBin";
    case ErrorCode::kNoCoverRegion: return "NoCoverRegion";
    case ErrorCode::kReserveConflict: return "ReserveConflict";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception type; callers
// dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rvw
