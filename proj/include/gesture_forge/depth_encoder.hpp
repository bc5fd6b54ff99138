#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gesture_forge/hand_model.hpp"

namespace gesture_forge {

/// Depth image where 0 marks background. Binary masks use any nonzero level
/// for foreground. Pixel coordinates are (x = column, y = row).
class DepthMask {
public:
    DepthMask() = default;
    DepthMask(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint16_t depth(int x, int y) const { return cells_[index(x, y)]; }
    void set_depth(int x, int y, std::uint16_t d) { cells_[index(x, y)] = d; }
    bool foreground(int x, int y) const { return depth(x, y) != 0; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }
    const std::vector<std::uint16_t>& cells() const { return cells_; }

    /// Nearest-neighbour upscale by an integer factor.
    DepthMask upscaled(int factor) const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint16_t> cells_;
};

/// Squared Euclidean distance from every cell to the nearest background cell,
/// treating everything outside the image as background. Exact (separable
/// lower-envelope transform), not a chamfer approximation.
std::vector<double> squared_distance_to_background(const DepthMask& mask);

/// Palm centre: the foreground pixel farthest from the background. Ties go
/// to the smallest row-major index.
Vec2 gravity_center(const DepthMask& mask);

struct Baseline {
    Vec2 center = Vec2::Zero();
    double length = 0.0;
};

Baseline baseline_from(const Vec2& center, const Vec2& elbow);

/// 1 - d / (4 * baseline length), clamped to [0, 1].
double keypoint_confidence(double d_euc, const Baseline& baseline);

struct ProspectRegion {
    std::vector<Eigen::Vector2i> cells;
    Vec2 centroid = Vec2::Zero();
    std::optional<KeypointId> class_hint;
};

/// 4-connected components of {0 < depth <= depth_threshold}, ordered by
/// their first cell in row-major order.
std::vector<ProspectRegion> segment_prospects(const DepthMask& mask, double depth_threshold);

/// Reference pixel position for each of the 20 keypoints.
using SkeletonPose = std::array<Vec2, kKeypointCount>;

/// Places a hand pose given in baseline units (y up, palm centre at
/// `palm_center`) into image pixels around `baseline.center`.
SkeletonPose skeleton_from_pose(const KeypointPositions& pose, const Vec3& palm_center,
                                const Baseline& baseline);

/// Assigns regions to keypoints greedily by ascending centroid distance and
/// returns the scale-free frame. Vectors are (position - H_center) / baseline
/// with the image y axis flipped to point up; z comes from `depth` when given.
HandFrame encode_frame(std::vector<ProspectRegion> regions, const Baseline& baseline,
                       const SkeletonPose& skeleton, const DepthMask* depth = nullptr,
                       long timestamp = 0);

/// Rasterised synthetic hand for exercising the encoder without a sensor:
/// forearm, palm disc and finger bones at `far_depth`, keypoint discs at
/// `near_depth`.
struct HandRenderOptions {
    double scale = 40.0;  // pixels per baseline unit
    int margin = 4;
    std::uint16_t far_depth = 200;
    std::uint16_t near_depth = 100;
    double palm_radius = 0.45;
    double forearm_halfwidth = 0.16;
    double bone_halfwidth = 0.06;
    double keypoint_radius = 0.07;
};

struct RenderedHand {
    DepthMask mask;
    SkeletonPose keypoints_px;
    Vec2 palm_center_px;
};

RenderedHand render_hand(const KeypointPositions& pose, const Vec3& palm_center,
                         const HandRenderOptions& options = {});

/// Zeroes (makes background) every pixel in [x0, x1) x [y0, y1).
void occlude_rect(DepthMask& mask, int x0, int y0, int x1, int y1);

DepthMask read_pgm(const std::string& path);
DepthMask parse_pgm(const std::string& bytes);
/// Binary P5 unless `ascii` is set.
std::string format_pgm(const DepthMask& mask, bool ascii = false);
void write_pgm(const std::string& path, const DepthMask& mask, bool ascii = false);

}  // namespace gesture_forge
