#include "gesture_forge/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "gesture_forge/error.hpp"
#include "gesture_forge/rng.hpp"

namespace gesture_forge {

void RunConfig::check() const {
    require(m >= 1 && n_sample >= 1 && gan_samples >= 1 && trials >= 1, ErrorKind::InvalidArgument,
            "M, N_sample, gan_samples and trials must be >= 1");
    require(occlusion >= 0 && occlusion <= kMaxOccludedFrames, ErrorKind::InvalidArgument,
            "occlusion frames must be in [0, 15]");
    require(frames_min >= 2 && frames_min <= frames_max, ErrorKind::InvalidArgument,
            "frame range must satisfy 2 <= min <= max");
    require(angle_noise >= 0.0 && vector_noise >= 0.0 && jitter >= 0.0, ErrorKind::InvalidArgument,
            "noise amplitudes must be >= 0");
}

namespace {

// Source position of output sample i when n samples are stretched onto target.
std::pair<std::size_t, double> source_position(std::size_t i, std::size_t n, int target) {
    if (n == 1 || target == 1) return {0, 0.0};
    const double u = static_cast<double>(i) * static_cast<double>(n - 1) / (target - 1);
    const std::size_t lo = std::min(static_cast<std::size_t>(std::floor(u)), n - 2);
    return {lo, u - static_cast<double>(lo)};
}

template <typename Lerp>
void retime_into(std::size_t n, int target_len, Lerp&& lerp) {
    for (int i = 0; i < target_len; ++i) {
        const auto [lo, frac] = source_position(i, n, target_len);
        lerp(i, lo, std::min(lo + 1, n - 1), frac);
    }
}

}  // namespace

std::vector<HandFrame> retime_sequence(std::span<const HandFrame> frames, int target_len) {
    require(target_len >= 2 && !frames.empty(), ErrorKind::InvalidArgument,
            "retiming needs a non-empty sequence and target length >= 2");
    std::vector<HandFrame> out(target_len);
    retime_into(frames.size(), target_len, [&](int i, std::size_t lo, std::size_t hi, double f) {
        const HandFrame& a = frames[lo];
        const HandFrame& b = frames[hi];
        HandFrame& o = out[i];
        // Endpoints copy exactly; (1 - f) a + f b can be off by an ulp.
        if (f == 0.0) {
            o = a;
        } else if (f == 1.0) {
            o = b;
        } else {
            for (int k = 0; k < kVectorKeypoints; ++k) o.vectors[k] = (1.0 - f) * a.vectors[k] + f * b.vectors[k];
            for (int j = 0; j < kAngleChannels; ++j) o.angles[j] = (1.0 - f) * a.angles[j] + f * b.angles[j];
            o.confidence = f < 0.5 ? a.confidence : b.confidence;
        }
        o.timestamp = i;
    });
    return out;
}

Recording retime_sequence(const Recording& rec, int target_len) {
    require(target_len >= 2 && !rec.frames.empty() && rec.frames.size() == rec.confidence.size(),
            ErrorKind::InvalidArgument, "retiming needs a non-empty recording and target length >= 2");
    Recording out;
    out.frames.resize(target_len);
    out.confidence.resize(target_len);
    retime_into(rec.frames.size(), target_len, [&](int i, std::size_t lo, std::size_t hi, double f) {
        const DeltaFrame& a = rec.frames[lo];
        const DeltaFrame& b = rec.frames[hi];
        if (f == 0.0) {
            out.frames[i] = a;
        } else if (f == 1.0) {
            out.frames[i] = b;
        } else {
            for (int c = 0; c < kChannels; ++c) out.frames[i].values[c] = (1.0 - f) * a.values[c] + f * b.values[c];
        }
        out.confidence[i] = rec.confidence[f < 0.5 ? lo : hi];
    });
    return out;
}

Recording inject_occlusion(const Recording& rec, int k, std::span<const KeypointId> affected, std::uint64_t seed) {
    const int n = static_cast<int>(rec.frames.size());
    require(k >= 0 && k <= n, ErrorKind::InvalidArgument,
            "occluded frame count " + std::to_string(k) + " outside [0, " + std::to_string(n) + "]");
    Recording out = rec;
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    // Partial Fisher-Yates: the first k slots are a uniform k-subset.
    for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
    for (int i = 0; i < k; ++i) {
        KeypointConfidence& conf = out.confidence[idx[i]];
        if (affected.empty()) {
            conf.fill(0.0);
        } else {
            for (const KeypointId& id : affected) conf[id.flat()] = 0.0;
        }
    }
    return out;
}

std::vector<GestureTemplate> build_templates(const SampleSet& data) {
    std::vector<GestureTemplate> out;
    for (auto& [label, mean] : label_means(data)) out.push_back(make_template(label, std::move(mean)));
    require(!out.empty(), ErrorKind::InvalidArgument, "no samples to build templates from");
    return out;
}

std::vector<GestureTemplate> reference_templates(int m) {
    std::vector<GestureTemplate> out;
    for (std::string_view name : gesture_names())
        out.push_back(make_template(std::string(name), synth_deltas(name, 0, NoiseSpec{0.0}, m)));
    return out;
}

std::vector<FrameBuffer> normalize_stream(const Recording& rec, std::span<const GestureTemplate> templates, int m) {
    require(!rec.frames.empty() && rec.frames.size() == rec.confidence.size(), ErrorKind::InvalidArgument,
            "normalization needs a non-empty recording");
    const auto actual = split_channels(encode_sequence(rec.frames));
    std::vector<ChannelConfidence> conf;
    conf.reserve(rec.confidence.size());
    for (const auto& c : rec.confidence) conf.push_back(channel_confidences(c));

    std::vector<FrameBuffer> out;
    out.reserve(templates.size());
    for (const GestureTemplate& templ : templates) {
        const auto target = split_channels(templ.symbolic);
        const int len = templ.length();
        std::vector<BufferedFrame> frames(len);
        for (int c = 0; c < kChannels; ++c) {
            const std::vector<int> idx = normalize_indices(actual[c], target[c]);
            for (int t = 0; t < len; ++t) {
                if (idx[t] >= 0) {
                    frames[t].delta.values[c] = rec.frames[idx[t]].values[c];
                    frames[t].confidence[c] = conf[idx[t]][c];
                } else {
                    frames[t].delta.values[c] = templ.numeric[t].values[c];
                    frames[t].confidence[c] = 0.0;
                }
            }
        }
        FrameBuffer buffer(m);
        for (BufferedFrame& f : frames) buffer.push(std::move(f));
        out.push_back(std::move(buffer));
    }
    return out;
}

Recording trial_recording(std::string_view label, int frames, const RunConfig& config, std::uint64_t seed) {
    const NoiseSpec jitter{config.jitter};
    const std::uint64_t capture_seed = derive_seed(seed, 0);
    std::vector<HandFrame> hand;
    hand.push_back(synth_start_frame(label, capture_seed, jitter));
    for (HandFrame& f : synth_gesture(label, capture_seed, jitter, config.m)) hand.push_back(std::move(f));
    if (frames != config.m) hand = retime_sequence(hand, frames + 1);
    const HandFrame start = hand.front();
    hand.erase(hand.begin());

    Recording rec;
    rec.frames = to_deltas(start, hand);
    rec.frames = perturb(rec.frames, NoiseSpec{config.vector_noise}, derive_seed(seed, 1), mode_channels(DataMode::Vector));
    rec.frames = perturb(rec.frames, NoiseSpec{config.angle_noise}, derive_seed(seed, 2), mode_channels(DataMode::Angle));
    rec.confidence.assign(rec.frames.size(), full_confidence());
    return rec;
}

MatchResult recognize_recording(const Recording& input, std::span<const GestureTemplate> templates,
                                const PipelineOptions& options, int m) {
    require(input.frames.size() == input.confidence.size(), ErrorKind::InvalidArgument,
            "one confidence set per frame");
    FrameBuffer raw(m);
    // Older frames would fall out of the ring anyway.
    const std::size_t keep = std::min<std::size_t>(input.frames.size(), raw.capacity());
    Recording rec;
    rec.frames.assign(input.frames.end() - keep, input.frames.end());
    rec.confidence.assign(input.confidence.end() - keep, input.confidence.end());

    std::vector<bool> occluded(keep);
    for (std::size_t t = 0; t < keep; ++t)
        occluded[t] = std::all_of(rec.confidence[t].begin(), rec.confidence[t].end(), [](double c) { return c == 0.0; });
    if (options.predictor) rec = [&] {
        InfilledSequence filled = infill_missing(*options.predictor, rec.frames, rec.confidence);
        return Recording{std::move(filled.frames), std::move(filled.confidence)};
    }();

    for (std::size_t t = 0; t < keep; ++t)
        raw.push(BufferedFrame{rec.frames[t], channel_confidences(rec.confidence[t]), occluded[t]});
    check_occlusion(raw);

    if (options.normalize && static_cast<int>(keep) != m) {
        const std::vector<FrameBuffer> buffers = normalize_stream(rec, templates, m);
        std::vector<const FrameBuffer*> views;
        for (const FrameBuffer& b : buffers) views.push_back(&b);
        return recognize(std::span<const FrameBuffer* const>(views), templates, options.strategy);
    }
    const FrameBuffer* single[] = {&raw};
    return recognize(std::span<const FrameBuffer* const>(single), templates, options.strategy);
}

const SweepRow* SweepReport::find(std::string_view condition, std::string_view gesture) const {
    for (const SweepRow& r : rows)
        if (r.condition == condition && r.gesture == gesture) return &r;
    return nullptr;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
    out << "condition,gesture,trials,correct,accuracy\n";
    for (const SweepRow& r : report.rows) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, r.accuracy());
        out << r.condition << ',' << r.gesture << ',' << r.trials << ',' << r.correct << ',';
        out.write(buf, res.ptr - buf);
        out << '\n';
    }
}

std::vector<std::string> all_gestures() {
    std::vector<std::string> out;
    for (std::string_view name : gesture_names()) out.emplace_back(name);
    return out;
}

namespace {

// Recording noise depends only on (gesture, trial) so conditions compare like with like.
std::uint64_t trial_seed(std::uint64_t base, std::string_view gesture, int trial) {
    return derive_seed(derive_seed(base, static_cast<std::uint64_t>(gesture_index(gesture))),
                       static_cast<std::uint64_t>(trial));
}

SweepRow run_condition(const RunConfig& config, const PipelineOptions& options,
                       std::span<const GestureTemplate> templates, const std::string& gesture, int frames,
                       int occlusion, std::string condition) {
    SweepRow row{std::move(condition), gesture, config.trials, 0, 0};
    for (int i = 0; i < config.trials; ++i) {
        const std::uint64_t seed = trial_seed(config.seed, gesture, i);
        Recording rec = trial_recording(gesture, frames, config, seed);
        if (occlusion > 0)
            rec = inject_occlusion(rec, occlusion, {}, derive_seed(seed, 100 + static_cast<std::uint64_t>(occlusion)));
        try {
            row.correct += recognize_recording(rec, templates, options, config.m).gesture == gesture;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RefusedTooOccluded) throw;
            ++row.refused;
        }
    }
    return row;
}

}  // namespace

SweepReport run_accuracy(const RunConfig& config, const PipelineOptions& options,
                         std::span<const GestureTemplate> templates, std::span<const std::string> gestures) {
    config.check();
    SweepReport report;
    for (const std::string& g : gestures)
        report.rows.push_back(run_condition(config, options, templates, g, config.m, config.occlusion,
                                            "occlusion=" + std::to_string(config.occlusion)));
    return report;
}

SweepReport sweep_frames(const RunConfig& config, const PipelineOptions& options,
                         std::span<const GestureTemplate> templates, std::span<const std::string> gestures) {
    config.check();
    SweepReport report;
    for (int frames = config.frames_min; frames <= config.frames_max; ++frames)
        for (const std::string& g : gestures)
            report.rows.push_back(run_condition(config, options, templates, g, frames, config.occlusion,
                                                "frames=" + std::to_string(frames)));
    return report;
}

SweepReport sweep_occlusion(const RunConfig& config, const PipelineOptions& options,
                            std::span<const GestureTemplate> templates, std::span<const std::string> gestures,
                            int max_occlusion) {
    config.check();
    require(max_occlusion >= 0 && max_occlusion <= config.m, ErrorKind::InvalidArgument,
            "occlusion sweep limit outside [0, M]");
    SweepReport report;
    for (int k = 0; k <= max_occlusion; ++k)
        for (const std::string& g : gestures)
            report.rows.push_back(
                run_condition(config, options, templates, g, config.m, k, "occlusion=" + std::to_string(k)));
    return report;
}

}  // namespace gesture_forge
