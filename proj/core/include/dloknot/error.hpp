#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dloknot {

enum class ErrorCode {
  kOutOfRange,
  kInsufficientControlPoints,
  kNonFinite,
  kInvalidLength,
  kLengthMismatch,
  kDegenerateSegment,
  kDegenerateCrossing,
  kAmbiguousTopology,
  kNoCrossingFound,
  kDegenerateTangent,
  kNegativeHeight,
  kPreconditionFailed,
  kInvalidArc,
  kInvalidPlan,
  kNumericalBlowup,
  kGraspMiss,
  kGateFailed,
  kConfigError,
  kParseError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so callers
// (the trial harness in particular) can bucket failures without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dloknot
