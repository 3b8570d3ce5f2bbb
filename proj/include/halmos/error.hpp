#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace halmos {

enum class ErrorKind {
    NonFinite,
    NotSquare,
    SizeMismatch,
    NotHermitian,
    NotIdempotent,
    NotOrthonormal,
    NoConvergence,
    NegativeEigenvalue,
    SingularInput,
    NotContained,
    NotAPair,
    ToleranceViolation,
    InvalidSpec,
    DecompositionMismatch,
    SingularElement,
    NoIntertwiner,
    InvalidParams,
    Condition000Violated,
    NotUnimodular,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotIdempotent: return "NotIdempotent";
    case ErrorKind::NotOrthonormal: return "NotOrthonormal";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::SingularInput: return "SingularInput";
    case ErrorKind::NotContained: return "NotContained";
    case ErrorKind::NotAPair: return "NotAPair";
    case ErrorKind::ToleranceViolation: return "ToleranceViolation";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::DecompositionMismatch: return "DecompositionMismatch";
    case ErrorKind::SingularElement: return "SingularElement";
    case ErrorKind::NoIntertwiner: return "NoIntertwiner";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::Condition000Violated: return "Condition000Violated";
    case ErrorKind::NotUnimodular: return "NotUnimodular";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

/// Short scientific rendering for diagnostics ("1.2e-09", not "0.000000").
inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace halmos
