#include "core/common.hpp"

namespace raptor {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InsufficientClassCount: return "InsufficientClassCount";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::ZeroWeightVector: return "ZeroWeightVector";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::MisalignedDirection: return "MisalignedDirection";
        case ErrorCode::MissingLayer: return "MissingLayer";
        case ErrorCode::EmptyEvaluationSet: return "EmptyEvaluationSet";
        case ErrorCode::NotUnitNorm: return "NotUnitNorm";
        case ErrorCode::DegenerateAblation: return "DegenerateAblation";
        case ErrorCode::InvalidRegime: return "InvalidRegime";
        case ErrorCode::DegenerateZeroEstimator: return "DegenerateZeroEstimator";
        case ErrorCode::EmptyOracleSamples: return "EmptyOracleSamples";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Format: return "Format";
    }
    return "Unknown";
}

}  // namespace raptor
