#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gesture_forge {

enum class ErrorKind {
    DegenerateFrame,
    DegenerateAngle,
    KeyMismatch,
    EmptyMask,
    NoBackground,
    ZeroBaseline,
    UnknownGesture,
    NumericUnderflow,
    Divergence,
    InvalidArgument,
    EmptyClass,
    MissingSource,
    InsufficientFrames,
    RefusedTooOccluded,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

}  // namespace gesture_forge
