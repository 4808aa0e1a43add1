#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcqa {

enum class ErrorCode {
    // numeric
    RowCountMismatch,
    InsufficientSamples,
    NonFiniteInput,
    RankDeficient,
    BadK,
    DimMismatch,
    ZeroProjection,
    DegenerateEmbedding,
    // text
    ParseError,
    DuplicateToken,
    EmptyFile,
    NoKnownTokens,
    // dataset
    MagicMismatch,
    UnsupportedVersion,
    TruncatedFile,
    DuplicateImageId,
    MissingField,
    BadGoldIndex,
    MissingFeatures,
    // scoring / fusion / eval
    EmptyRegionList,
    CueOrderMismatch,
    EmptyCandidates,
    MissingGold,
    BadGridStep,
    UnknownQtype,
    // plumbing
    IoError,
    InvalidArgument,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Failure category, used by the CLI to pick an exit status.
enum class ErrorCategory { Usage, Data, Numeric };

ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mcqa
