#include "mcqa/error.hpp"

namespace mcqa {

std::string_view error_code_name(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::RowCountMismatch: return "RowCountMismatch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroProjection: return "ZeroProjection";
    case ErrorCode::DegenerateEmbedding: return "DegenerateEmbedding";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateToken: return "DuplicateToken";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::NoKnownTokens: return "NoKnownTokens";
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::DuplicateImageId: return "DuplicateImageId";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BadGoldIndex: return "BadGoldIndex";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::EmptyRegionList: return "EmptyRegionList";
    case ErrorCode::CueOrderMismatch: return "CueOrderMismatch";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::MissingGold: return "MissingGold";
    case ErrorCode::BadGridStep: return "BadGridStep";
    case ErrorCode::UnknownQtype: return "UnknownQtype";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonFiniteInput:
    case ErrorCode::RankDeficient:
    case ErrorCode::ZeroProjection:
    case ErrorCode::DegenerateEmbedding:
        return ErrorCategory::Numeric;
    case ErrorCode::BadK:
    case ErrorCode::BadGridStep:
    case ErrorCode::InvalidArgument:
        return ErrorCategory::Usage;
    default:
        return ErrorCategory::Data;
    }
}

} // namespace mcqa
