#pragma once

#include <exception>
#include <iostream>
#include <string>

#include <json.hpp>

#include "taxisentinel/error.hpp"

namespace taxisentinel::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,
  kExitComputation = 2,
  kExitInvariant = 3,
};

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedFile:
    case ErrorCode::kIo:
    case ErrorCode::kBadPattern:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kWrongLabel:
    case ErrorCode::kOverlappingInput:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kUnknownNode:
    case ErrorCode::kDuplicateNode:
    case ErrorCode::kEmptyQuery:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kNonMonotoneTime:
    case ErrorCode::kNegativeOffset:
    case ErrorCode::kNonpositiveMoment:
    case ErrorCode::kNonpositiveDistance:
    case ErrorCode::kNonpositiveTime:
    case ErrorCode::kNonpositiveSpeed:
      return kExitInput;
    case ErrorCode::kEmptyRoute:
    case ErrorCode::kEmptyPlan:
    case ErrorCode::kSpotNotShared:
    case ErrorCode::kNoPath:
    case ErrorCode::kUnresolvedDestination:
    case ErrorCode::kEmptyOverlap:
    case ErrorCode::kTooFewSamples:
    case ErrorCode::kZeroVariance:
    case ErrorCode::kDegenerateGroups:
    case ErrorCode::kAllTied:
      return kExitComputation;
    case ErrorCode::kInvariantViolation:
      return kExitInvariant;
  }
  return kExitInvariant;
}

inline void report_error(std::string_view code, std::string_view detail) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["detail"] = detail;
  std::cerr << j.dump() << '\n';
}

inline void report_warning(std::string_view message) {
  nlohmann::ordered_json j;
  j["warning"] = message;
  std::cerr << j.dump() << '\n';
}

}  // namespace taxisentinel::cli
