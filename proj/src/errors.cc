#include "pcol/errors.h"

namespace pcol {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kZeroRelativeVelocity: return "ZeroRelativeVelocity";
    case ErrorCode::kDegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::kInvalidStep: return "InvalidStep";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kOverflow: return "Overflow";
    case ErrorCode::kNoiseOverflow: return "NoiseOverflow";
    case ErrorCode::kScaleMismatch: return "ScaleMismatch";
    case ErrorCode::kLevelMismatch: return "LevelMismatch";
    case ErrorCode::kOutOfLevels: return "OutOfLevels";
    case ErrorCode::kScaleOverflow: return "ScaleOverflow";
    case ErrorCode::kMissingRotationKey: return "MissingRotationKey";
    case ErrorCode::kMissingParty: return "MissingParty";
    case ErrorCode::kBadShare: return "BadShare";
    case ErrorCode::kProtocolOrder: return "ProtocolOrder";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kSerialization: return "Serialization";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kInvalidStep:
    case ErrorCode::kInvalidParams:
    case ErrorCode::kSerialization:
      return ErrorCategory::kUsage;
    case ErrorCode::kZeroRelativeVelocity:
    case ErrorCode::kDegenerateCovariance:
    case ErrorCode::kNonConvergence:
    case ErrorCode::kGridMismatch:
    case ErrorCode::kEmptyStore:
      return ErrorCategory::kDomain;
    case ErrorCode::kMissingParty:
    case ErrorCode::kBadShare:
    case ErrorCode::kProtocolOrder:
      return ErrorCategory::kProtocol;
    default:
      return ErrorCategory::kInternal;
  }
}

}  // namespace pcol
