#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sise {

enum class ErrorCode {
  kMonotonicityViolation,
  kNegativeTime,
  kInvalidRecord,
  kEmptyData,
  kEmptyFrame,
  kNoFeasibleSupport,
  kNegativeBandwidth,
  kTooFewBins,
  kZeroLikelihoodObservation,
  kDegenerateDensity,
  kEmptyInterval,
  kZeroPrevalence,
  kLengthMismatch,
  kInvalidConfig,
  kInvalidArgument,
  kParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` is stable,
// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sise
