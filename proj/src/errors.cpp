#include "crossplit/errors.hpp"

namespace crossplit {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kScanTooCoarse: return "ScanTooCoarse";
    case ErrorCode::kNoWell: return "NoWell";
    case ErrorCode::kMultipleRoots: return "MultipleRoots";
    case ErrorCode::kOutsideAllowedRegion: return "OutsideAllowedRegion";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kWindowOutsideI0: return "WindowOutsideI0";
    case ErrorCode::kInvalidCrossingData: return "InvalidCrossingData";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kAtCrossing: return "AtCrossing";
    case ErrorCode::kVanishingXiDerivative: return "VanishingXiDerivative";
    case ErrorCode::kTruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::kStepUnderflow: return "StepUnderflow";
    case ErrorCode::kGridTooCoarse: return "GridTooCoarse";
    case ErrorCode::kFactorizationBreakdown: return "FactorizationBreakdown";
    case ErrorCode::kResolutionCapExceeded: return "ResolutionCapExceeded";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kPairNotFound: return "PairNotFound";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace crossplit
