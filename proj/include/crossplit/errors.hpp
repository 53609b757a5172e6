#pragma once

#include <stdexcept>
#include <string>

namespace crossplit {

enum class ErrorCode {
  kInvalidModel,
  kInvalidArgument,
  kScanTooCoarse,
  kNoWell,
  kMultipleRoots,
  kOutsideAllowedRegion,
  kNotSymmetric,
  kWindowOutsideI0,
  kInvalidCrossingData,
  kNoConvergence,
  kAtCrossing,
  kVanishingXiDerivative,
  kTruncationTooSmall,
  kStepUnderflow,
  kGridTooCoarse,
  kFactorizationBreakdown,
  kResolutionCapExceeded,
  kInsufficientData,
  kPairNotFound,
};

const char* to_string(ErrorCode code) noexcept;

/// All library failures are reported through this exception; `code()` names
/// the failure class so callers (and the CLI exit-status mapping) can branch.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crossplit
