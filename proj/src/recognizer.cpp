#include "gesture_forge/recognizer.hpp"

#include <algorithm>
#include <cmath>

#include "gesture_forge/error.hpp"

namespace gesture_forge {

namespace {

int ceil_half(int n) { return (n + 1) / 2; }
int ceil_three_halves(int n) { return (3 * n + 1) / 2; }

}  // namespace

FrameBuffer::FrameBuffer(int frames_per_gesture) : m_(frames_per_gesture) {
    require(frames_per_gesture >= 1, ErrorKind::InvalidArgument, "M must be >= 1");
    ring_.resize(ceil_three_halves(frames_per_gesture));
}

void FrameBuffer::push(BufferedFrame frame) {
    const int cap = capacity();
    if (fill_ < cap) {
        ring_[(head_ + fill_) % cap] = std::move(frame);
        ++fill_;
    } else {
        ring_[head_] = std::move(frame);
        head_ = (head_ + 1) % cap;
    }
}

void FrameBuffer::clear() {
    head_ = 0;
    fill_ = 0;
}

const BufferedFrame& FrameBuffer::at(int i) const {
    require(i >= 0 && i < fill_, ErrorKind::InsufficientFrames,
            "frame " + std::to_string(i) + " not buffered (fill " + std::to_string(fill_) + ")");
    return ring_[(head_ + i) % capacity()];
}

void push_frame(FrameBuffer& buffer, const DeltaFrame& frame, const KeypointConfidence& confidence) {
    BufferedFrame b;
    b.delta = frame;
    b.confidence = channel_confidences(confidence);
    b.fully_occluded = std::all_of(confidence.begin(), confidence.end(), [](double c) { return c == 0.0; });
    buffer.push(std::move(b));
}

const char* to_string(Strategy strategy) {
    return strategy == Strategy::Coordinate ? "coordinate" : "angle";
}

int channel_count(Strategy strategy) {
    return strategy == Strategy::Coordinate ? kVectorChannels : kAngleChannels;
}

int first_channel(Strategy strategy) { return strategy == Strategy::Coordinate ? 0 : kVectorChannels; }

int window_length(int m, int cursor) {
    require(cursor >= -m && cursor <= 0, ErrorKind::InvalidArgument,
            "cursor " + std::to_string(cursor) + " outside [-M, 0]");
    return 2 * cursor <= -m ? ceil_three_halves(m) + cursor : m;
}

WindowError window_error(const FrameBuffer& buffer, const GestureTemplate& templ, int cursor,
                         Strategy strategy) {
    return window_error(buffer, templ, cursor, strategy, window_length(buffer.frames_per_gesture(), cursor));
}

WindowError window_error(const FrameBuffer& buffer, const GestureTemplate& templ, int cursor,
                         Strategy strategy, int k) {
    require(cursor <= 0, ErrorKind::InvalidArgument, "cursor must be <= 0");
    require(k >= 1 && k <= templ.length(), ErrorKind::InvalidArgument,
            "window length " + std::to_string(k) + " outside [1, template length]");
    require(buffer.fill() >= k - cursor, ErrorKind::InsufficientFrames,
            "window of " + std::to_string(k) + " frames at cursor " + std::to_string(cursor) +
                " needs " + std::to_string(k - cursor) + " frames, have " + std::to_string(buffer.fill()));
    const int c0 = first_channel(strategy);
    const int n = channel_count(strategy);
    const int t0 = templ.length() - k;
    double e = 0.0;
    for (int j = 0; j < k; ++j) {
        const BufferedFrame& f = buffer.from_newest(-cursor + (k - 1 - j));
        const DeltaFrame& t = templ.numeric[t0 + j];
        for (int c = c0; c < c0 + n; ++c) e += f.confidence[c] * std::abs(f.delta.values[c] - t.values[c]);
    }
    return {e, e / (static_cast<double>(k) * n), k};
}

void assign_relative_errors(CandidateMap& map) {
    double total = 0.0;
    for (const auto& entry : map.entries) total += entry.mean_error;
    for (auto& entry : map.entries) entry.relative_error = total > 0.0 ? entry.mean_error / total : 0.0;
}

CandidateMap candidate_map(std::span<const FrameBuffer* const> buffers,
                           std::span<const GestureTemplate> templates, Strategy strategy) {
    require(!buffers.empty() && (buffers.size() == 1 || buffers.size() == templates.size()),
            ErrorKind::InvalidArgument, "need one buffer or one per template");
    const int m = buffers.front()->frames_per_gesture();
    const int min_k = ceil_half(m);
    CandidateMap map;
    map.strategy = strategy;
    for (int cursor = -m; cursor <= 0; ++cursor) {
        const int k_full = window_length(m, cursor);
        std::optional<CandidateEntry> best;
        for (std::size_t g = 0; g < templates.size(); ++g) {
            const FrameBuffer& buffer = *buffers[buffers.size() == 1 ? 0 : g];
            const int k = std::min({k_full, buffer.fill() + cursor, templates[g].length()});
            if (k < min_k) continue;
            const double me = window_error(buffer, templates[g], cursor, strategy, k).me;
            if (!best || me < best->mean_error) best = CandidateEntry{cursor, static_cast<int>(g), me, 0.0};
        }
        if (best) map.entries.push_back(*best);
    }
    assign_relative_errors(map);
    return map;
}

void check_occlusion(const FrameBuffer& buffer) {
    const int m = buffer.frames_per_gesture();
    int occluded = 0;
    for (int back = 0; back < std::min(m, buffer.fill()); ++back) occluded += buffer.from_newest(back).fully_occluded;
    require(occluded <= kMaxOccludedFrames, ErrorKind::RefusedTooOccluded,
            std::to_string(occluded) + " of the newest " + std::to_string(m) + " frames are fully occluded");
}

MatchResult recognize(const FrameBuffer& buffer, std::span<const GestureTemplate> templates,
                      std::optional<Strategy> only) {
    check_occlusion(buffer);
    const FrameBuffer* single[] = {&buffer};
    return recognize(std::span<const FrameBuffer* const>(single), templates, only);
}

MatchResult recognize(std::span<const FrameBuffer* const> buffers,
                      std::span<const GestureTemplate> templates, std::optional<Strategy> only) {
    require(!templates.empty(), ErrorKind::InvalidArgument, "no templates");
    require(!buffers.empty(), ErrorKind::InvalidArgument, "no buffers");
    const FrameBuffer& first = *buffers.front();
    const int m = first.frames_per_gesture();
    for (const FrameBuffer* b : buffers)
        require(b->fill() >= ceil_half(m), ErrorKind::InsufficientFrames,
                "recognition needs at least " + std::to_string(ceil_half(m)) + " frames, have " +
                    std::to_string(b->fill()));

    MatchResult result;
    result.coordinate = candidate_map(buffers, templates, Strategy::Coordinate);
    result.angle = candidate_map(buffers, templates, Strategy::Angle);

    const CandidateEntry* best = nullptr;
    Strategy best_strategy = Strategy::Coordinate;
    for (const CandidateMap* map : {&result.coordinate, &result.angle}) {
        if (only && map->strategy != *only) continue;
        for (const auto& entry : map->entries) {
            const bool better = !best || entry.relative_error < best->relative_error ||
                                (entry.relative_error == best->relative_error && map->strategy == best_strategy &&
                                 entry.gesture < best->gesture);
            if (better) {
                best = &entry;
                best_strategy = map->strategy;
            }
        }
    }
    require(best != nullptr, ErrorKind::InsufficientFrames, "no cursor produced a candidate");
    result.gesture = templates[best->gesture].label;
    result.relative_error = best->relative_error;
    result.strategy = best_strategy;
    result.cursor = best->cursor;

    result.table.resize(templates.size());
    for (std::size_t g = 0; g < templates.size(); ++g) result.table[g].gesture = templates[g].label;
    auto fold = [&](const CandidateMap& map, auto member) {
        for (const auto& entry : map.entries) {
            std::optional<double>& slot = result.table[entry.gesture].*member;
            if (!slot || entry.relative_error < *slot) slot = entry.relative_error;
        }
    };
    fold(result.coordinate, &MatchRow::re_coord);
    fold(result.angle, &MatchRow::re_angle);
    return result;
}

}  // namespace gesture_forge
