#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adapt {

enum class ErrorCode {
  InvalidConfig,
  IncompatibleMetric,
  IoError,
  EmptyFile,
  MissingColumn,
  UnparseableCell,
  CorruptModelFile,
  DimensionMismatch,
  NonFiniteInput,
  MissingTargetLabels,
  LengthMismatch,
  NonPositiveGamma,
  DegenerateData,
  NotSymmetric,
  SingularSystem,
  Infeasible,
  SeparableWithoutPenalty,
  AllWeightsZero,
  TooFewTargets,
  SamplingStalled,
  InvalidLabels,
  InvalidArgument,
  EmptyEnsemble,
};

std::string_view error_code_name(ErrorCode code);

class AdaptError : public std::runtime_error {
 public:
  AdaptError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace adapt
