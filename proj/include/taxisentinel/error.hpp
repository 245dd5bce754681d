#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taxisentinel {

// Every failure the library reports. The CLI maps each code to exactly one
// process exit code (see tools/cli_errors.hpp).
enum class ErrorCode {
  kMalformedFile,
  kIo,
  kBadPattern,
  kDuplicateId,
  kWrongLabel,
  kOverlappingInput,
  kLengthMismatch,
  kUnknownNode,
  kDuplicateNode,
  kEmptyQuery,
  kInvalidArgument,
  kNonMonotoneTime,
  kNegativeOffset,
  kNonpositiveMoment,
  kNonpositiveDistance,
  kNonpositiveTime,
  kNonpositiveSpeed,
  kEmptyRoute,
  kEmptyPlan,
  kSpotNotShared,
  kNoPath,
  kUnresolvedDestination,
  kEmptyOverlap,
  kTooFewSamples,
  kZeroVariance,
  kDegenerateGroups,
  kAllTied,
  kInvariantViolation,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, std::string detail);

}  // namespace taxisentinel
