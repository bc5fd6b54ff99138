#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gesture_forge/gesture_registry.hpp"
#include "gesture_forge/hand_model.hpp"

namespace gesture_forge {

/// Which channel family a GAN or the validator works on.
enum class DataMode { Vector, Angle };

const char* to_string(DataMode mode);
DataMode parse_data_mode(std::string_view text);

struct ChannelRange {
    int first = 0;
    int count = kChannels;

    int end() const { return first + count; }
};

ChannelRange mode_channels(DataMode mode);

struct Sample {
    std::string label;
    std::vector<DeltaFrame> frames;
    std::vector<KeypointConfidence> confidence;  // one per frame
};

struct SampleSet {
    std::vector<Sample> samples;
    DataMode mode = DataMode::Vector;

    /// Every sequence has `frames` frames and a registry label.
    void check(int frames) const;
};

/// `per_label` jittered recordings of each listed gesture, all at full confidence.
SampleSet synth_sample_set(std::span<const std::string> labels, int per_label, std::uint64_t seed,
                           NoiseSpec jitter, int frames = kDefaultFrames);

/// Adds independent U(-a, a) noise to every value in `channels`.
std::vector<DeltaFrame> perturb(std::span<const DeltaFrame> frames, NoiseSpec spec, std::uint64_t seed,
                                ChannelRange channels = {});

/// One row per frame: label, sample_id, frame_idx, 57 vector deltas, 14 angle
/// deltas, 20 confidences. A header row names the columns.
void write_sample_csv(std::ostream& out, const SampleSet& set);
SampleSet read_sample_csv(std::istream& in, DataMode mode = DataMode::Vector);

std::vector<std::string> sample_csv_header();

/// Per-label mean of every frame value; labels in registry order, absent labels skipped.
std::vector<std::pair<std::string, std::vector<DeltaFrame>>> label_means(const SampleSet& set);

struct Relabel {
    std::size_t sample = 0;
    std::string from;
    std::string to;
};

struct ValidationReport {
    std::vector<Relabel> relabels;
    std::array<int, kGestureCount> moved_out{};  // per registry gesture
    std::array<int, kGestureCount> moved_in{};
};

struct ValidationResult {
    SampleSet data;
    ValidationReport report;
};

/// Nearest-centre relabelling over the mode's channels, flattened across
/// frames. Centres start as per-label means and are updated as running means
/// while samples are visited once in stored order. Throws EmptyClass when a
/// registry gesture has no samples.
ValidationResult validate_dataset(const SampleSet& data);

}  // namespace gesture_forge
