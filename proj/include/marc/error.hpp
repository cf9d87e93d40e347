#pragma once

#include <stdexcept>
#include <string>

namespace marc {

enum class ErrorKind {
    NotHermitian,
    NotFinite,
    ZeroVector,
    ShapeMismatch,
    InvalidDimensions,
    InvalidArgument,
    InfeasibleCovariance,
    InvalidAllocation,
    GridTooLarge,
    StepOutOfRange,
    IoError,
    MalformedFile,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NotFinite: return "NotFinite";
        case ErrorKind::ZeroVector: return "ZeroVector";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::InvalidDimensions: return "InvalidDimensions";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InfeasibleCovariance: return "InfeasibleCovariance";
        case ErrorKind::InvalidAllocation: return "InvalidAllocation";
        case ErrorKind::GridTooLarge: return "GridTooLarge";
        case ErrorKind::StepOutOfRange: return "StepOutOfRange";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::MalformedFile: return "MalformedFile";
    }
    return "Unknown";
}

/// Single exception type for the library; `kind()` says which contract was broken.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace marc
