#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gesture_forge/datagen.hpp"
#include "gesture_forge/predictor.hpp"
#include "gesture_forge/recognizer.hpp"
#include "gesture_forge/sequence_codec.hpp"

namespace gesture_forge {

struct RunConfig {
    int m = kDefaultFrames;
    int n_sample = 50;
    int gan_samples = 5000;
    double angle_noise = 5.0;
    double vector_noise = 1.0;
    int occlusion = 0;
    int frames_min = 21;
    int frames_max = 35;
    int trials = 100;
    double jitter = 0.0;  // positional jitter of each trial recording
    std::uint64_t seed = 1;

    /// Counts >= 1, occlusion in [0, 15], 2 <= frames_min <= frames_max.
    void check() const;
};

/// A captured stream: delta frames plus the keypoint confidences seen with them.
struct Recording {
    std::vector<DeltaFrame> frames;
    std::vector<KeypointConfidence> confidence;
};

/// Linear interpolation onto target_len evenly spaced points spanning the
/// same interval; endpoints are kept exactly.
std::vector<HandFrame> retime_sequence(std::span<const HandFrame> frames, int target_len);

/// The same on delta frames; confidences follow the nearer source frame.
Recording retime_sequence(const Recording& rec, int target_len);

/// Sets confidence 0 for `affected` keypoints (all when empty) in k distinct
/// uniformly chosen frames. Values are untouched.
Recording inject_occlusion(const Recording& rec, int k, std::span<const KeypointId> affected, std::uint64_t seed);

/// Templates from per-label means, in registry order.
std::vector<GestureTemplate> build_templates(const SampleSet& data);

/// Noise-free recordings of every gesture at M frames.
std::vector<GestureTemplate> reference_templates(int m = kDefaultFrames);

/// Symbol-guided resampling of a stream onto each template's length, one
/// buffer per template. Positions where no symbol has matched yet take the
/// template value with confidence 0.
std::vector<FrameBuffer> normalize_stream(const Recording& rec, std::span<const GestureTemplate> templates, int m);

struct PipelineOptions {
    bool normalize = true;
    const PredictorModel* predictor = nullptr;  // infill when set
    std::optional<Strategy> strategy;           // joint when empty
};

/// Noise-free gesture retimed to `frames` frames, then perturbed with the
/// configured vector and angle noise.
Recording trial_recording(std::string_view label, int frames, const RunConfig& config, std::uint64_t seed);

/// Infill, buffer, optionally normalize, recognize. Normalization only runs
/// when the stream length differs from M. Throws RefusedTooOccluded.
MatchResult recognize_recording(const Recording& rec, std::span<const GestureTemplate> templates,
                                const PipelineOptions& options, int m);

struct SweepRow {
    std::string condition;
    std::string gesture;
    int trials = 0;
    int correct = 0;
    int refused = 0;

    double accuracy() const { return trials ? static_cast<double>(correct) / trials : 0.0; }
};

struct SweepReport {
    std::vector<SweepRow> rows;

    const SweepRow* find(std::string_view condition, std::string_view gesture) const;
};

/// condition,gesture,trials,correct,accuracy
void write_sweep_csv(std::ostream& out, const SweepReport& report);

/// `config.trials` trials per gesture at M frames with `config.occlusion`
/// fully occluded frames.
SweepReport run_accuracy(const RunConfig& config, const PipelineOptions& options,
                         std::span<const GestureTemplate> templates, std::span<const std::string> gestures);

/// Conditions "frames=L" for L in [frames_min, frames_max].
SweepReport sweep_frames(const RunConfig& config, const PipelineOptions& options,
                         std::span<const GestureTemplate> templates, std::span<const std::string> gestures);

/// Conditions "occlusion=k" for k in [0, max_occlusion]; refusals count as wrong.
SweepReport sweep_occlusion(const RunConfig& config, const PipelineOptions& options,
                            std::span<const GestureTemplate> templates, std::span<const std::string> gestures,
                            int max_occlusion = kMaxOccludedFrames);

std::vector<std::string> all_gestures();

}  // namespace gesture_forge
