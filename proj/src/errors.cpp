#include "survadj/errors.hpp"

namespace survadj {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::NonBinaryStatus: return "NonBinaryStatus";
    case ErrorCode::NonBinaryGroup: return "NonBinaryGroup";
    case ErrorCode::NonFiniteCovariate: return "NonFiniteCovariate";
    case ErrorCode::AllWeightsZero: return "AllWeightsZero";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::NoEventsInGroup: return "NoEventsInGroup";
    case ErrorCode::Separation: return "Separation";
    case ErrorCode::MonotoneLikelihood: return "MonotoneLikelihood";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingCovariateSet: return "MissingCovariateSet";
    case ErrorCode::NoMatches: return "NoMatches";
    case ErrorCode::HullViolation: return "HullViolation";
    case ErrorCode::CensoringSupport: return "CensoringSupport";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::DegenerateTreatedFraction: return "DegenerateTreatedFraction";
  }
  return "UnknownError";
}

}  // namespace survadj
