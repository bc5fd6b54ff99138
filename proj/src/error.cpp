#include "gesture_forge/error.hpp"

namespace gesture_forge {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateFrame: return "DegenerateFrame";
        case ErrorKind::DegenerateAngle: return "DegenerateAngle";
        case ErrorKind::KeyMismatch: return "KeyMismatch";
        case ErrorKind::EmptyMask: return "EmptyMask";
        case ErrorKind::NoBackground: return "NoBackground";
        case ErrorKind::ZeroBaseline: return "ZeroBaseline";
        case ErrorKind::UnknownGesture: return "UnknownGesture";
        case ErrorKind::NumericUnderflow: return "NumericUnderflow";
        case ErrorKind::Divergence: return "Divergence";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptyClass: return "EmptyClass";
        case ErrorKind::MissingSource: return "MissingSource";
        case ErrorKind::InsufficientFrames: return "InsufficientFrames";
        case ErrorKind::RefusedTooOccluded: return "RefusedTooOccluded";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace gesture_forge
