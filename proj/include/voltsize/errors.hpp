#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voltsize {

/// Error categories surfaced on the command line as `error[<category>]: ...`.
enum class ErrorKind {
    NoConvergence,
    StabilityViolation,
    ParseError,
    EmptyTrace,
    InsufficientData,
    ConfigError,
    NoFeasibleSizes,
    IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NoConvergence: return "no-convergence";
        case ErrorKind::StabilityViolation: return "stability-violation";
        case ErrorKind::ParseError: return "parse-error";
        case ErrorKind::EmptyTrace: return "empty-trace";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::ConfigError: return "config-error";
        case ErrorKind::NoFeasibleSizes: return "no-feasible-sizes";
        case ErrorKind::IoError: return "io-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define VOLTSIZE_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& what) : Error(ErrorKind::Name, what) {} \
    }

VOLTSIZE_DEFINE_ERROR(NoConvergence);
VOLTSIZE_DEFINE_ERROR(StabilityViolation);
VOLTSIZE_DEFINE_ERROR(ParseError);
VOLTSIZE_DEFINE_ERROR(EmptyTrace);
VOLTSIZE_DEFINE_ERROR(InsufficientData);
VOLTSIZE_DEFINE_ERROR(ConfigError);
VOLTSIZE_DEFINE_ERROR(NoFeasibleSizes);
VOLTSIZE_DEFINE_ERROR(IoError);

#undef VOLTSIZE_DEFINE_ERROR

}  // namespace voltsize
