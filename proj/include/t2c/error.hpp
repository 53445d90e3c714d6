#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace t2c {

enum class ErrorCode {
    ParseError,
    IllegalState,
    IllegalAction,
    UnknownField,
    LimitExceeded,
    EmptyCorpus,
    EmptySplit,
    EmptyTruth,
    TooFewSchemas,
    TooManyFields,
    DimensionMismatch,
    NoRecordedGraph,
    KeyMismatch,
    NoLegalSeed,
    UnsatisfiableConstraints,
    MissingType,
    InvalidArgument,
    IoError,
    NotFound,
};

std::string_view error_code_name(ErrorCode code);

/// Every module error is an `Error` carrying a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace t2c
