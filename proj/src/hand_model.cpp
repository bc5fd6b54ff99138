#include "gesture_forge/hand_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "gesture_forge/error.hpp"

namespace gesture_forge {

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

constexpr std::array<char, 6> kClassLetters{'A', 'B', 'C', 'D', 'E', 'F'};

constexpr KeypointId kp(KeypointClass c, int i) { return KeypointId{c, i}; }

constexpr std::array<AngleTriple, kAngleChannels> make_triples() {
    using enum KeypointClass;
    std::array<AngleTriple, kAngleChannels> t{};
    int n = 0;
    t[n++] = {kp(A, 0), kp(A, 1), kp(A, 2)};
    t[n++] = {kp(A, 1), kp(A, 2), kElbow};
    for (KeypointClass c : {B, C, D, E}) {
        t[n++] = {kp(c, 0), kp(c, 1), kp(c, 2)};
        t[n++] = {kp(c, 1), kp(c, 2), kp(c, 3)};
        t[n++] = {kp(c, 2), kp(c, 3), kElbow};
    }
    return t;
}

constexpr std::array<AngleTriple, kAngleChannels> kTriples = make_triples();

}  // namespace

KeypointId KeypointId::from_flat(int flat) {
    require(flat >= 0 && flat < kKeypointCount, ErrorKind::InvalidArgument,
            "keypoint index out of range: " + std::to_string(flat));
    constexpr std::array<int, 6> offsets{0, 3, 7, 11, 15, 19};
    int cls = 5;
    while (offsets[cls] > flat) --cls;
    return KeypointId{static_cast<KeypointClass>(cls), flat - offsets[cls]};
}

KeypointId KeypointId::parse(const std::string& name) {
    if (name.size() == 2 && name[0] >= 'A' && name[0] <= 'F' && name[1] >= '0' && name[1] <= '9') {
        auto cls = static_cast<KeypointClass>(name[0] - 'A');
        int index = name[1] - '0';
        if (valid(cls, index)) return KeypointId{cls, index};
    }
    throw Error(ErrorKind::InvalidArgument, "not a keypoint name: '" + name + "'");
}

std::string KeypointId::name() const {
    return std::string{kClassLetters[static_cast<int>(cls)], static_cast<char>('0' + index)};
}

Vec3 CoordinateFrame::to_local(const Vec3& world) const {
    const Vec3 d = world - origin;
    return {d.dot(axis_x), d.dot(axis_y), d.dot(axis_z)};
}

Vec3 CoordinateFrame::to_world(const Vec3& local) const {
    return origin + local.x() * axis_x + local.y() * axis_y + local.z() * axis_z;
}

CoordinateFrame build_coordinate_frame(const Vec3& f0, const Vec3& c3, const Vec3& b3) {
    const Vec3 along = c3 - f0;
    const Vec3 normal = along.cross(b3 - f0);
    // Triangle area is half the cross-product norm.
    require(0.5 * normal.norm() > 1e-12 && along.norm() > 1e-12, ErrorKind::DegenerateFrame,
            "F0, C3 and B3 are collinear or coincident");
    CoordinateFrame frame;
    frame.origin = f0;
    frame.axis_y = along.normalized();
    frame.axis_z = normal.normalized();
    frame.axis_x = frame.axis_y.cross(frame.axis_z);
    return frame;
}

double wrap_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w <= -180.0) w += 360.0;
    if (w > 180.0) w -= 360.0;
    return w;
}

DeltaFrame frame_delta(const HandFrame& curr, const HandFrame& prev) {
    DeltaFrame d;
    for (int k = 0; k < kVectorKeypoints; ++k) d.set_dvector(k, curr.vectors[k] - prev.vectors[k]);
    for (int i = 0; i < kAngleChannels; ++i) d.dangle(i) = wrap_degrees(curr.angles[i] - prev.angles[i]);
    return d;
}

double joint_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 u = a - b;
    const Vec3 v = c - b;
    const double nu = u.norm();
    const double nv = v.norm();
    require(nu > 1e-12 && nv > 1e-12, ErrorKind::DegenerateAngle, "joint arm has near-zero length");
    // atan2 of |u x v| and u.v stays accurate near 0 and 180 degrees, where acos loses digits.
    return std::atan2(u.cross(v).norm(), u.dot(v)) * kRadToDeg;
}

const std::array<AngleTriple, kAngleChannels>& angle_triples() { return kTriples; }

KeypointClass angle_class(int angle_index) { return kTriples[angle_index].a.cls; }

AngleSet angle_set(const KeypointPositions& positions) {
    AngleSet out;
    for (int i = 0; i < kAngleChannels; ++i) {
        const auto& t = kTriples[i];
        try {
            out.degrees[i] = joint_angle(positions[t.a.flat()], positions[t.b.flat()], positions[t.c.flat()]);
        } catch (const Error&) {
            out.degrees[i] = std::numeric_limits<double>::quiet_NaN();
            out.degenerate.set(i);
        }
    }
    return out;
}

HandFrame hand_frame_from_positions(const KeypointPositions& positions,
                                    const CoordinateFrame& reference, double baseline,
                                    const KeypointConfidence& confidence, long timestamp) {
    require(baseline > 0.0, ErrorKind::ZeroBaseline, "baseline length must be positive");
    const AngleSet angles = angle_set(positions);
    if (!angles.ok()) {
        std::string which;
        for (int i = 0; i < kAngleChannels; ++i)
            if (angles.degenerate.test(i)) which += " " + std::to_string(i);
        throw Error(ErrorKind::DegenerateAngle, "degenerate angle entries:" + which);
    }
    HandFrame frame;
    for (int k = 0; k < kVectorKeypoints; ++k) frame.vectors[k] = reference.to_local(positions[k]) / baseline;
    frame.angles = angles.degrees;
    frame.confidence = confidence;
    frame.timestamp = timestamp;
    return frame;
}

double channel_confidence(const KeypointConfidence& confidence, int channel) {
    if (!is_angle_channel(channel)) return confidence[channel / 3];
    const auto& t = kTriples[channel - kVectorChannels];
    return std::min({confidence[t.a.flat()], confidence[t.b.flat()], confidence[t.c.flat()]});
}

std::array<double, kChannels> channel_confidences(const KeypointConfidence& confidence) {
    std::array<double, kChannels> out{};
    for (int c = 0; c < kChannels; ++c) out[c] = channel_confidence(confidence, c);
    return out;
}

}  // namespace gesture_forge
