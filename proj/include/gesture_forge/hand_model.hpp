#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace gesture_forge {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Keypoint classes: A is the thumb, B..E the four fingers, F the elbow.
enum class KeypointClass : std::uint8_t { A, B, C, D, E, F };

inline constexpr int kKeypointCount = 20;
inline constexpr int kVectorKeypoints = 19;  // every keypoint except F0
inline constexpr int kVectorChannels = kVectorKeypoints * 3;
inline constexpr int kAngleChannels = 14;
inline constexpr int kChannels = kVectorChannels + kAngleChannels;

constexpr int class_size(KeypointClass cls) {
    switch (cls) {
        case KeypointClass::A: return 3;
        case KeypointClass::F: return 1;
        default: return 4;
    }
}

/// Index 0 is the fingertip, increasing toward the palm.
struct KeypointId {
    KeypointClass cls = KeypointClass::A;
    int index = 0;

    static constexpr bool valid(KeypointClass c, int i) { return i >= 0 && i < class_size(c); }

    /// Dense position in A0..A2, B0..B3, C0..C3, D0..D3, E0..E3, F0 order.
    constexpr int flat() const {
        constexpr std::array<int, 6> offsets{0, 3, 7, 11, 15, 19};
        return offsets[static_cast<int>(cls)] + index;
    }

    static KeypointId from_flat(int flat);
    static KeypointId parse(const std::string& name);
    std::string name() const;

    friend constexpr bool operator==(KeypointId a, KeypointId b) {
        return a.cls == b.cls && a.index == b.index;
    }
    friend constexpr bool operator<(KeypointId a, KeypointId b) { return a.flat() < b.flat(); }
};

inline constexpr KeypointId kElbow{KeypointClass::F, 0};

/// Right-handed orthonormal frame anchored at the elbow F0, with Y along
/// F0->C3 and Z normal to the plane through F0, C3 and B3.
struct CoordinateFrame {
    Vec3 origin = Vec3::Zero();
    Vec3 axis_x = Vec3::UnitX();
    Vec3 axis_y = Vec3::UnitY();
    Vec3 axis_z = Vec3::UnitZ();

    Vec3 to_local(const Vec3& world) const;
    Vec3 to_world(const Vec3& local) const;
};

/// Throws ErrorKind::DegenerateFrame when the three points are (nearly) collinear.
CoordinateFrame build_coordinate_frame(const Vec3& f0, const Vec3& c3, const Vec3& b3);

using KeypointPositions = std::array<Vec3, kKeypointCount>;
using KeypointConfidence = std::array<double, kKeypointCount>;

inline KeypointConfidence full_confidence() {
    KeypointConfidence c;
    c.fill(1.0);
    return c;
}

/// Eigen leaves fixed-size vectors uninitialized; frames start at zero.
inline std::array<Vec3, kVectorKeypoints> zero_vectors() {
    std::array<Vec3, kVectorKeypoints> v;
    v.fill(Vec3::Zero());
    return v;
}

/// One time step of a tracked hand. Vectors are indexed by flat keypoint id
/// (0..18); F0 is the origin and has no vector.
struct HandFrame {
    std::array<Vec3, kVectorKeypoints> vectors = zero_vectors();
    std::array<double, kAngleChannels> angles{};
    KeypointConfidence confidence = full_confidence();
    long timestamp = 0;
};

/// Change between two consecutive frames, stored as the flat 71-channel
/// layout used everywhere downstream: channel 3k+axis holds the delta of
/// keypoint k's vector, channels 57..70 hold the 14 angle deltas in degrees.
struct DeltaFrame {
    std::array<double, kChannels> values{};

    Vec3 dvector(int keypoint) const {
        return {values[3 * keypoint], values[3 * keypoint + 1], values[3 * keypoint + 2]};
    }
    void set_dvector(int keypoint, const Vec3& v) {
        for (int a = 0; a < 3; ++a) values[3 * keypoint + a] = v[a];
    }
    double dangle(int i) const { return values[kVectorChannels + i]; }
    double& dangle(int i) { return values[kVectorChannels + i]; }
};

/// Wraps an angle in degrees into (-180, 180].
double wrap_degrees(double deg);

DeltaFrame frame_delta(const HandFrame& curr, const HandFrame& prev);

/// Angle at b between the arms b->a and b->c, in degrees within [0, 180].
double joint_angle(const Vec3& a, const Vec3& b, const Vec3& c);

struct AngleTriple {
    KeypointId a, b, c;
};

/// Canonical 14 triples: thumb (A0,A1,A2),(A1,A2,F0); then for B..E
/// (k0,k1,k2),(k1,k2,k3),(k2,k3,F0).
const std::array<AngleTriple, kAngleChannels>& angle_triples();

/// Class owning each angle channel (the finger of its triple).
KeypointClass angle_class(int angle_index);

struct AngleSet {
    std::array<double, kAngleChannels> degrees{};
    std::bitset<kAngleChannels> degenerate;

    bool ok() const { return degenerate.none(); }
};

/// Degenerate triples are flagged and carry NaN rather than a fabricated value.
AngleSet angle_set(const KeypointPositions& positions);

/// Expresses world positions in `reference`, scaled by 1/baseline. Throws
/// DegenerateAngle if any of the 14 angles is undefined.
HandFrame hand_frame_from_positions(const KeypointPositions& positions,
                                    const CoordinateFrame& reference, double baseline,
                                    const KeypointConfidence& confidence, long timestamp);

constexpr int vector_channel(int keypoint, int axis) { return 3 * keypoint + axis; }
constexpr int angle_channel(int angle_index) { return kVectorChannels + angle_index; }
constexpr bool is_angle_channel(int channel) { return channel >= kVectorChannels; }

/// Vector channels inherit their keypoint's confidence; an angle channel is
/// only as observable as the least observable keypoint of its triple.
double channel_confidence(const KeypointConfidence& confidence, int channel);

std::array<double, kChannels> channel_confidences(const KeypointConfidence& confidence);

}  // namespace gesture_forge
