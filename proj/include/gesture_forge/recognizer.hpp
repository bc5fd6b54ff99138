#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gesture_forge/hand_model.hpp"
#include "gesture_forge/sequence_codec.hpp"

namespace gesture_forge {

using ChannelConfidence = std::array<double, kChannels>;

struct BufferedFrame {
    DeltaFrame delta;
    ChannelConfidence confidence{};
    bool fully_occluded = false;  // every keypoint had confidence 0 when captured
};

/// Ring of the newest ceil(1.5 M) frames.
class FrameBuffer {
public:
    explicit FrameBuffer(int frames_per_gesture = 30);

    int frames_per_gesture() const { return m_; }
    int capacity() const { return static_cast<int>(ring_.size()); }
    int fill() const { return fill_; }

    void push(BufferedFrame frame);
    void clear();

    /// i = 0 is the oldest retained frame.
    const BufferedFrame& at(int i) const;
    /// back = 0 is the newest frame.
    const BufferedFrame& from_newest(int back) const { return at(fill_ - 1 - back); }

private:
    int m_;
    std::vector<BufferedFrame> ring_;
    int head_ = 0;  // slot of the oldest frame
    int fill_ = 0;
};

/// Channel confidences derived from keypoint confidences; the frame counts as
/// fully occluded when every keypoint confidence is 0.
void push_frame(FrameBuffer& buffer, const DeltaFrame& frame,
                const KeypointConfidence& confidence = full_confidence());

enum class Strategy { Coordinate, Angle };

const char* to_string(Strategy strategy);
int channel_count(Strategy strategy);  // N_dim
int first_channel(Strategy strategy);

/// Window length at a cursor: 1.5 M + cursor for -M <= cursor <= -0.5 M, else M.
int window_length(int m, int cursor);

struct WindowError {
    double e = 0.0;
    double me = 0.0;
    int k = 0;
};

/// The K buffer frames ending `-cursor` frames before the newest, against the
/// template's last K frames. Throws InsufficientFrames when the buffer does
/// not reach back that far.
WindowError window_error(const FrameBuffer& buffer, const GestureTemplate& templ, int cursor,
                         Strategy strategy);

/// Same with an explicit window length.
WindowError window_error(const FrameBuffer& buffer, const GestureTemplate& templ, int cursor,
                         Strategy strategy, int k);

struct CandidateEntry {
    int cursor = 0;
    int gesture = 0;  // index into the template list
    double mean_error = 0.0;
    double relative_error = 0.0;
};

struct CandidateMap {
    Strategy strategy = Strategy::Coordinate;
    std::vector<CandidateEntry> entries;
};

/// RE = ME / sum(ME); an all-zero map gets RE 0 everywhere.
void assign_relative_errors(CandidateMap& map);

/// One entry per cursor with the best template. `buffers` holds one buffer
/// per template (normalized streams) or a single shared buffer. Cursors whose
/// window would reach past the oldest buffered frame are shortened to what is
/// available and skipped once shorter than ceil(0.5 M).
CandidateMap candidate_map(std::span<const FrameBuffer* const> buffers,
                           std::span<const GestureTemplate> templates, Strategy strategy);

struct MatchRow {
    std::string gesture;
    std::optional<double> re_coord;
    std::optional<double> re_angle;
};

struct MatchResult {
    std::string gesture;
    double relative_error = 0.0;
    Strategy strategy = Strategy::Coordinate;
    int cursor = 0;
    std::vector<MatchRow> table;  // per template: lowest RE it reached in each map
    CandidateMap coordinate;
    CandidateMap angle;
};

/// Needs at least ceil(0.5 M) frames (InsufficientFrames) and refuses with
/// RefusedTooOccluded when more than 15 of the newest M frames are fully
/// occluded. The winner is the lowest RE over both maps; ties go to the
/// coordinate map, then to template order.
/// `only` restricts the decision to one map; both maps are still reported.
MatchResult recognize(const FrameBuffer& buffer, std::span<const GestureTemplate> templates,
                      std::optional<Strategy> only = std::nullopt);

/// Per-template buffers, aligned with `templates`. Occlusion is not checked
/// here; the buffers may be resampled views of a stream checked upstream.
MatchResult recognize(std::span<const FrameBuffer* const> buffers,
                      std::span<const GestureTemplate> templates, std::optional<Strategy> only = std::nullopt);

inline constexpr int kMaxOccludedFrames = 15;

/// Throws RefusedTooOccluded when more than 15 of the newest M frames are
/// fully occluded.
void check_occlusion(const FrameBuffer& buffer);

}  // namespace gesture_forge
