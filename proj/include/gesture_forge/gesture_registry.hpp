#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_forge/hand_model.hpp"

namespace gesture_forge {

inline constexpr int kDefaultFrames = 30;  // M
inline constexpr int kGestureCount = 11;

/// Registry order; also the final tie-break order of the recognizer.
const std::array<std::string_view, kGestureCount>& gesture_names();

/// Throws ErrorKind::UnknownGesture.
int gesture_index(std::string_view name);

/// Uniform noise on [-amplitude, +amplitude].
struct NoiseSpec {
    double amplitude = 1.0;

    static NoiseSpec vector_default() { return {1.0}; }
    static NoiseSpec angle_default() { return {5.0}; }
};

/// Joint-level description of a hand configuration. All angles in degrees.
struct PoseParams {
    std::array<double, 5> curl{8, 8, 8, 8, 8};  // per-joint flexion for A..E
    double thumb_adduction = 0.0;
    double wrist_pitch = 0.0;  // about x through the wrist, positive flexes toward the camera
    double wrist_yaw = 0.0;    // about z through the wrist
    double arm_roll = 0.0;     // about z through the elbow, moves the whole hand
    Vec3 translation = Vec3::Zero();  // whole arm, elbow included
};

/// World positions (baseline units, y up, z toward the camera, elbow at the
/// origin for the rest pose, palm centre one unit above it).
KeypointPositions pose_positions(const PoseParams& params);
Vec3 palm_center(const PoseParams& params);

const PoseParams& rest_params();
const KeypointPositions& rest_pose();

/// Fixed reference frame built from the rest pose; every synthetic HandFrame
/// is expressed in it so arm motion shows up in the keypoint vectors.
const CoordinateFrame& reference_frame();

/// Pose of gesture `gesture` at phase in [0, 1]; phase 0 is the rest pose.
PoseParams gesture_params(int gesture, double phase);

/// M frames at phases (t+1)/M. Each keypoint coordinate gets independent
/// uniform jitter of the given amplitude; zero jitter is exact.
std::vector<HandFrame> synth_gesture(std::string_view label, std::uint64_t seed, NoiseSpec jitter,
                                     int frames = kDefaultFrames);

/// The frame preceding synth_gesture's first frame (phase 0), with the same
/// jitter stream continued, so deltas can be formed for all M frames.
HandFrame synth_start_frame(std::string_view label, std::uint64_t seed, NoiseSpec jitter);

/// M delta frames: synth_start_frame followed by synth_gesture, differenced.
std::vector<DeltaFrame> synth_deltas(std::string_view label, std::uint64_t seed, NoiseSpec jitter,
                                     int frames = kDefaultFrames);

/// Consecutive differences; `start` is the frame before frames[0].
std::vector<DeltaFrame> to_deltas(const HandFrame& start, const std::vector<HandFrame>& frames);

}  // namespace gesture_forge
