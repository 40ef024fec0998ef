#include "billiards/error.hpp"

namespace billiards {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonConvex: return "NonConvex";
        case ErrorCode::NotClosed: return "NotClosed";
        case ErrorCode::ResamplingFailure: return "ResamplingFailure";
        case ErrorCode::SolveFailure: return "SolveFailure";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Continuum: return "Continuum";
        case ErrorCode::NotElliptic: return "NotElliptic";
        case ErrorCode::Resonant: return "Resonant";
        case ErrorCode::NotResonant: return "NotResonant";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::Inadmissible: return "Inadmissible";
        case ErrorCode::NotDiffeo: return "NotDiffeo";
        case ErrorCode::MarginUnreachable: return "MarginUnreachable";
        case ErrorCode::SeriesSolveFailure: return "SeriesSolveFailure";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace billiards
