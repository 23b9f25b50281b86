#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtlkit {

/// Broad failure class. Maps one-to-one onto CLI exit codes.
enum class ErrorCategory {
    Domain = 1,          // bad input data, rejected model output, failed precondition
    Usage = 2,           // bad flags / config shape
    Infrastructure = 3,  // missing tool, timeout, network, unreadable file
};

/// Specific failure kinds the pipeline distinguishes.
enum class ErrorKind {
    Precondition,
    InvalidInput,
    ParseError,
    ContentDrift,
    MalformedResponse,
    QueryLeak,
    UnclassifiableOutput,
    Classification,
    MissingStage,
    NumericError,
    ToolNotFound,
    Timeout,
    ClientFailure,
    Io,
    Usage,
};

inline ErrorCategory category_of(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ToolNotFound:
    case ErrorKind::Timeout:
    case ErrorKind::ClientFailure:
    case ErrorKind::Io:
        return ErrorCategory::Infrastructure;
    case ErrorKind::Usage:
        return ErrorCategory::Usage;
    default:
        return ErrorCategory::Domain;
    }
}

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ContentDrift: return "ContentDrift";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::QueryLeak: return "QueryLeak";
    case ErrorKind::UnclassifiableOutput: return "UnclassifiableOutput";
    case ErrorKind::Classification: return "Classification";
    case ErrorKind::MissingStage: return "MissingStage";
    case ErrorKind::NumericError: return "NumericError";
    case ErrorKind::ToolNotFound: return "ToolNotFound";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::ClientFailure: return "ClientFailure";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Usage: return "Usage";
    }
    return "Unknown";
}

inline constexpr ErrorKind kAllErrorKinds[] = {
    ErrorKind::Precondition,      ErrorKind::InvalidInput, ErrorKind::ParseError,   ErrorKind::ContentDrift,
    ErrorKind::MalformedResponse, ErrorKind::QueryLeak,    ErrorKind::UnclassifiableOutput,
    ErrorKind::Classification,    ErrorKind::MissingStage, ErrorKind::NumericError, ErrorKind::ToolNotFound,
    ErrorKind::Timeout,           ErrorKind::ClientFailure, ErrorKind::Io,          ErrorKind::Usage,
};

/// Inverse of to_string; unknown names map to nothing.
inline bool error_kind_from_string(std::string_view name, ErrorKind& out) {
    for (auto k : kAllErrorKinds)
        if (to_string(k) == name) {
            out = k;
            return true;
        }
    return false;
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_of(kind_); }
    bool is_infrastructure() const noexcept {
        return category() == ErrorCategory::Infrastructure;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

} // namespace rtlkit
