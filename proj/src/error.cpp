#include "taxisentinel/error.hpp"

namespace taxisentinel {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedFile: return "MALFORMED_FILE";
    case ErrorCode::kIo: return "IO_ERROR";
    case ErrorCode::kBadPattern: return "BAD_PATTERN";
    case ErrorCode::kDuplicateId: return "DUPLICATE_ID";
    case ErrorCode::kWrongLabel: return "WRONG_LABEL";
    case ErrorCode::kOverlappingInput: return "OVERLAPPING_INPUT";
    case ErrorCode::kLengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::kUnknownNode: return "UNKNOWN_NODE";
    case ErrorCode::kDuplicateNode: return "DUPLICATE_NODE";
    case ErrorCode::kEmptyQuery: return "EMPTY_QUERY";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kNonMonotoneTime: return "NON_MONOTONE_TIME";
    case ErrorCode::kNegativeOffset: return "NEGATIVE_OFFSET";
    case ErrorCode::kNonpositiveMoment: return "NONPOSITIVE_MOMENT";
    case ErrorCode::kNonpositiveDistance: return "NONPOSITIVE_DISTANCE";
    case ErrorCode::kNonpositiveTime: return "NONPOSITIVE_TIME";
    case ErrorCode::kNonpositiveSpeed: return "NONPOSITIVE_SPEED";
    case ErrorCode::kEmptyRoute: return "EMPTY_ROUTE";
    case ErrorCode::kEmptyPlan: return "EMPTY_PLAN";
    case ErrorCode::kSpotNotShared: return "SPOT_NOT_SHARED";
    case ErrorCode::kNoPath: return "NO_PATH";
    case ErrorCode::kUnresolvedDestination: return "UNRESOLVED_DESTINATION";
    case ErrorCode::kEmptyOverlap: return "EMPTY_OVERLAP";
    case ErrorCode::kTooFewSamples: return "TOO_FEW_SAMPLES";
    case ErrorCode::kZeroVariance: return "ZERO_VARIANCE";
    case ErrorCode::kDegenerateGroups: return "DEGENERATE_GROUPS";
    case ErrorCode::kAllTied: return "ALL_TIED";
    case ErrorCode::kInvariantViolation: return "INVARIANT_VIOLATION";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(std::move(detail)) {}

void fail(ErrorCode code, std::string detail) {
  throw Error(code, std::move(detail));
}

}  // namespace taxisentinel
