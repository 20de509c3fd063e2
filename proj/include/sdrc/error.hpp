#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdrc {

enum class ErrorKind {
    InvalidArgument,
    GridMismatch,
    DegenerateSpectrum,
    SeriesTooShort,
    LagTooLarge,
    DegenerateDraw,
    UnstableProcess,
    EmptyCollection,
    Parse,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorKind::SeriesTooShort: return "SeriesTooShort";
        case ErrorKind::LagTooLarge: return "LagTooLarge";
        case ErrorKind::DegenerateDraw: return "DegenerateDraw";
        case ErrorKind::UnstableProcess: return "UnstableProcess";
        case ErrorKind::EmptyCollection: return "EmptyCollection";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a kind, so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// True for failures caused by the data itself rather than by usage. A
    /// series too short to estimate from counts as degenerate input.
    [[nodiscard]] bool is_numerical() const noexcept {
        return kind_ == ErrorKind::GridMismatch || kind_ == ErrorKind::DegenerateSpectrum ||
               kind_ == ErrorKind::SeriesTooShort ||
               kind_ == ErrorKind::DegenerateDraw || kind_ == ErrorKind::UnstableProcess;
    }

private:
    ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) throw Error(kind, what);
}

}  // namespace detail

}  // namespace sdrc
