#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace survadj {

enum class ErrorCode {
  InvalidArgument,
  InvalidInterval,
  EmptyGroup,
  NonPositiveTime,
  NonBinaryStatus,
  NonBinaryGroup,
  NonFiniteCovariate,
  AllWeightsZero,
  NoEvents,
  NoEventsInGroup,
  Separation,
  MonotoneLikelihood,
  RankDeficient,
  NoConvergence,
  DimensionMismatch,
  MissingCovariateSet,
  NoMatches,
  HullViolation,
  CensoringSupport,
  SampleTooLarge,
  DegenerateTreatedFraction,
};

const char* error_code_name(ErrorCode code);

class SurvError : public std::runtime_error {
 public:
  SurvError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by validate_dataset; carries one entry per violated invariant so a
// caller can report all problems at once.  code() is the first violation.
class ValidationError : public SurvError {
 public:
  ValidationError(std::vector<std::pair<ErrorCode, std::string>> violations, const std::string& message)
      : SurvError(violations.front().first, message), violations_(std::move(violations)) {}

  const std::vector<std::pair<ErrorCode, std::string>>& violations() const { return violations_; }

 private:
  std::vector<std::pair<ErrorCode, std::string>> violations_;
};

}  // namespace survadj
