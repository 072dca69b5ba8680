#include "adapt/errors.hpp"

namespace adapt {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IncompatibleMetric: return "IncompatibleMetric";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableCell: return "UnparseableCell";
    case ErrorCode::CorruptModelFile: return "CorruptModelFile";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::MissingTargetLabels: return "MissingTargetLabels";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SeparableWithoutPenalty: return "SeparableWithoutPenalty";
    case ErrorCode::AllWeightsZero: return "AllWeightsZero";
    case ErrorCode::TooFewTargets: return "TooFewTargets";
    case ErrorCode::SamplingStalled: return "SamplingStalled";
    case ErrorCode::InvalidLabels: return "InvalidLabels";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
  }
  return "Unknown";
}

}  // namespace adapt
