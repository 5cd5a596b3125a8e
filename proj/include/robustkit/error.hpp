#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robustkit {

enum class ErrorCode {
    InvalidBounds,
    DimensionMismatch,
    NominalOutsideSet,
    UnknownUncParam,
    EmptyDeps,
    UncertainEquality,
    MalformedExpr,
    MissingAssignment,
    EmptySet,
    UnboundedSet,
    NotPositiveDefinite,
    NotSymmetric,
    AlphaOutOfRange,
    MissingNominal,
    NotAffineInXi,
    NonAffineAfterSubstitution,
    NoApplicableReformulation,
    SeparationUnavailable,
    ParseError,
    ValidationError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidBounds: return "InvalidBounds";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NominalOutsideSet: return "NominalOutsideSet";
        case ErrorCode::UnknownUncParam: return "UnknownUncParam";
        case ErrorCode::EmptyDeps: return "EmptyDeps";
        case ErrorCode::UncertainEquality: return "UncertainEquality";
        case ErrorCode::MalformedExpr: return "MalformedExpr";
        case ErrorCode::MissingAssignment: return "MissingAssignment";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::UnboundedSet: return "UnboundedSet";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorCode::MissingNominal: return "MissingNominal";
        case ErrorCode::NotAffineInXi: return "NotAffineInXi";
        case ErrorCode::NonAffineAfterSubstitution: return "NonAffineAfterSubstitution";
        case ErrorCode::NoApplicableReformulation: return "NoApplicableReformulation";
        case ErrorCode::SeparationUnavailable: return "SeparationUnavailable";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Error raised while reading a document; path is a JSON-pointer-like
/// location such as `unc_groups[0].nominal`.
class DocumentError : public Error {
public:
    DocumentError(ErrorCode code, std::string path, const std::string& reason)
        : Error(code, path + ": " + reason), path_(std::move(path)), reason_(reason) {}

    const std::string& path() const noexcept { return path_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string path_;
    std::string reason_;
};

}  // namespace robustkit
