#include "gesture_forge/gesture_registry.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "gesture_forge/error.hpp"
#include "gesture_forge/rng.hpp"

namespace gesture_forge {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

constexpr std::array<std::string_view, kGestureCount> kNames{
    "push",        "pull",       "hold",        "swipe-left",   "swipe-right", "swipe-up",
    "swipe-down",  "rotate-left", "rotate-right", "click",      "pick"};

enum Gesture {
    kPush, kPull, kHold, kSwipeLeft, kSwipeRight, kSwipeUp, kSwipeDown,
    kRotateLeft, kRotateRight, kClick, kPick
};

struct Finger {
    Vec3 base;            // k3 (A2 for the thumb), hand-local
    double spread_deg;    // in-plane direction measured from +y, positive toward -x
    std::array<double, 3> lengths;  // base outward
};

// A, B, C, D, E. The thumb uses the first two lengths only.
const std::array<Finger, 5> kFingers{{
    {{0.34, 0.86, 0.05}, -50.0, {0.22, 0.18, 0.0}},
    {{0.26, 1.40, 0.0}, -8.0, {0.27, 0.17, 0.14}},
    {{0.06, 1.45, 0.0}, 0.0, {0.30, 0.19, 0.15}},
    {{-0.14, 1.41, 0.0}, 6.0, {0.28, 0.18, 0.14}},
    {{-0.32, 1.32, 0.0}, 14.0, {0.21, 0.14, 0.12}},
}};

const Vec3 kWrist{0.0, 0.62, 0.0};

constexpr double kReach = 18.0;  // arm travel of the translating gestures, baseline units
constexpr double kTurn = 270.0;  // arm roll of the rotations, degrees
const Vec3 kPalm{0.0, 1.0, 0.0};

double ease(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return 0.5 * (1.0 - std::cos(kPi * s));
}

Eigen::Matrix3d about_x(double deg) { return Eigen::AngleAxisd(deg * kDegToRad, Vec3::UnitX()).matrix(); }
Eigen::Matrix3d about_z(double deg) { return Eigen::AngleAxisd(deg * kDegToRad, Vec3::UnitZ()).matrix(); }

struct Placement {
    Eigen::Matrix3d wrist;
    Eigen::Matrix3d arm;
    Vec3 translation;

    Vec3 hand_point(const Vec3& local) const { return arm * (kWrist + wrist * (local - kWrist)) + translation; }
};

Placement placement(const PoseParams& p) {
    return {about_z(p.wrist_yaw) * about_x(p.wrist_pitch), about_z(p.arm_roll), p.translation};
}

}  // namespace

const std::array<std::string_view, kGestureCount>& gesture_names() { return kNames; }

int gesture_index(std::string_view name) {
    for (int i = 0; i < kGestureCount; ++i)
        if (kNames[i] == name) return i;
    throw Error(ErrorKind::UnknownGesture, "unknown gesture '" + std::string(name) + "'");
}

KeypointPositions pose_positions(const PoseParams& p) {
    const Placement place = placement(p);
    KeypointPositions out;
    for (int f = 0; f < 5; ++f) {
        const Finger& finger = kFingers[f];
        const auto cls = static_cast<KeypointClass>(f);
        const int n = class_size(cls);
        double spread = finger.spread_deg;
        if (f == 0) spread += p.thumb_adduction;
        const Vec3 dir(-std::sin(spread * kDegToRad), std::cos(spread * kDegToRad), 0.0);
        Vec3 joint = finger.base;
        out[KeypointId{cls, n - 1}.flat()] = place.hand_point(joint);
        for (int seg = 0; seg + 1 < n; ++seg) {
            const double phi = (seg + 1) * p.curl[f] * kDegToRad;
            const Vec3 d = std::cos(phi) * dir + std::sin(phi) * Vec3::UnitZ();
            joint += finger.lengths[seg] * d;
            out[KeypointId{cls, n - 2 - seg}.flat()] = place.hand_point(joint);
        }
    }
    out[kElbow.flat()] = place.arm * Vec3::Zero() + place.translation;
    return out;
}

Vec3 palm_center(const PoseParams& p) { return placement(p).hand_point(kPalm); }

const PoseParams& rest_params() {
    static const PoseParams rest{};
    return rest;
}

const KeypointPositions& rest_pose() {
    static const KeypointPositions pose = pose_positions(rest_params());
    return pose;
}

const CoordinateFrame& reference_frame() {
    static const CoordinateFrame frame = [] {
        const auto& pose = rest_pose();
        const KeypointId c3{KeypointClass::C, 3};
        const KeypointId b3{KeypointClass::B, 3};
        return build_coordinate_frame(pose[kElbow.flat()], pose[c3.flat()], pose[b3.flat()]);
    }();
    return frame;
}

PoseParams gesture_params(int gesture, double phase) {
    require(gesture >= 0 && gesture < kGestureCount, ErrorKind::UnknownGesture,
            "gesture index out of range: " + std::to_string(gesture));
    const double u = ease(phase);
    PoseParams p = rest_params();
    // Every gesture pairs a large arm motion with its own finger articulation
    // so both the coordinate and the angle channels tell gestures apart.
    const double tap = std::sin(kPi * std::clamp(phase, 0.0, 1.0));
    switch (gesture) {
        case kPush:
            p.translation = {0.0, 0.0, kReach * u};
            p.wrist_pitch = -50.0 * u;
            for (int f = 1; f < 5; ++f) p.curl[f] += 50.0 * tap * tap;
            break;
        case kPull:
            p.translation = {0.0, 0.0, -kReach * u};
            p.wrist_pitch = 30.0 * u;
            for (int f = 1; f < 5; ++f) p.curl[f] += 60.0 * u;
            break;
        case kHold:
            break;
        case kSwipeLeft:
            p.translation = {-kReach * u, 0.0, 0.0};
            p.wrist_yaw = 50.0 * u;
            p.curl[0] += 50.0 * u;
            break;
        case kSwipeRight:
            p.translation = {kReach * u, 0.0, 0.0};
            p.wrist_yaw = -50.0 * u;
            p.curl[4] += 60.0 * u;
            break;
        case kSwipeUp:
            p.translation = {0.0, kReach * u, 0.0};
            p.curl[3] += 60.0 * u;
            p.curl[4] += 60.0 * u;
            break;
        case kSwipeDown:
            p.translation = {0.0, -kReach * u, 0.0};
            p.curl[1] += 60.0 * u;
            p.curl[2] += 60.0 * u;
            break;
        case kRotateLeft:
            p.arm_roll = kTurn * u;
            p.curl[0] += 70.0 * tap * tap;
            break;
        case kRotateRight:
            p.arm_roll = -kTurn * u;
            p.curl[3] += 70.0 * tap * tap;
            p.curl[4] += 70.0 * tap * tap;
            break;
        case kClick: {
            const double taps = std::sin(2.0 * kPi * std::clamp(phase, 0.0, 1.0));
            p.curl[1] += 75.0 * taps * taps;
            p.translation = {0.0, 0.0, 3.0 * taps * taps};
            break;
        }
        case kPick: {
            const double pinch = ease(phase / 0.5);
            const double lift = ease((phase - 0.5) / 0.5);
            p.curl[0] += 40.0 * pinch;
            p.curl[1] += 50.0 * pinch;
            p.thumb_adduction = 35.0 * pinch;
            p.wrist_pitch = 40.0 * lift;
            p.translation = {0.0, 0.75 * kReach * lift, 0.5 * kReach * pinch};
            break;
        }
    }
    return p;
}

namespace {

std::vector<HandFrame> synth_frames(std::string_view label, std::uint64_t seed, NoiseSpec jitter, int frames) {
    const int g = gesture_index(label);
    require(frames >= 1, ErrorKind::InvalidArgument, "frame count must be >= 1");
    require(jitter.amplitude >= 0.0, ErrorKind::InvalidArgument, "jitter amplitude must be >= 0");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(g)));
    std::vector<HandFrame> out;
    out.reserve(frames + 1);
    for (int t = 0; t <= frames; ++t) {
        KeypointPositions pos = pose_positions(gesture_params(g, static_cast<double>(t) / frames));
        if (jitter.amplitude > 0.0)
            for (Vec3& p : pos)
                for (int a = 0; a < 3; ++a) p[a] += rng.uniform(-jitter.amplitude, jitter.amplitude);
        out.push_back(hand_frame_from_positions(pos, reference_frame(), 1.0, full_confidence(), t - 1));
    }
    return out;
}

}  // namespace

std::vector<HandFrame> synth_gesture(std::string_view label, std::uint64_t seed, NoiseSpec jitter, int frames) {
    std::vector<HandFrame> all = synth_frames(label, seed, jitter, frames);
    all.erase(all.begin());
    return all;
}

HandFrame synth_start_frame(std::string_view label, std::uint64_t seed, NoiseSpec jitter) {
    return synth_frames(label, seed, jitter, 1).front();
}

std::vector<DeltaFrame> synth_deltas(std::string_view label, std::uint64_t seed, NoiseSpec jitter, int frames) {
    std::vector<HandFrame> all = synth_frames(label, seed, jitter, frames);
    const HandFrame start = all.front();
    all.erase(all.begin());
    return to_deltas(start, all);
}

std::vector<DeltaFrame> to_deltas(const HandFrame& start, const std::vector<HandFrame>& frames) {
    std::vector<DeltaFrame> out;
    out.reserve(frames.size());
    const HandFrame* prev = &start;
    for (const HandFrame& f : frames) {
        out.push_back(frame_delta(f, *prev));
        prev = &f;
    }
    return out;
}

}  // namespace gesture_forge
