#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_forge/hand_model.hpp"

namespace gesture_forge {

enum class SymbolKind { Vector, Angle };

/// Letter A..J of the ten-bin quantizer: bins are 0.2 wide for vector
/// components and 20 degrees wide for angles, half-open, top bin open-ended.
struct EncodedSymbol {
    char letter = 'A';
    SymbolKind kind = SymbolKind::Vector;

    int bin() const { return letter - 'A'; }
};

inline constexpr int kSymbolBins = 10;

/// Magnitude encoding: the sign of `value` is dropped.
EncodedSymbol encode_value(double value, SymbolKind kind);

constexpr SymbolKind channel_kind(int channel) {
    return is_angle_channel(channel) ? SymbolKind::Angle : SymbolKind::Vector;
}

using SymbolFrame = std::array<char, kChannels>;
using SymbolSequence = std::vector<SymbolFrame>;

SymbolSequence encode_sequence(std::span<const DeltaFrame> frames);

/// Greedy template-guided alignment of one symbol channel. Returns, for each
/// template position, the index into `actual` that supplies the output
/// symbol, or -1 where nothing has been matched yet and the template symbol
/// itself is emitted.
std::vector<int> normalize_indices(std::string_view actual, std::string_view templ);

/// Symbol-level view of normalize_indices; the result has templ.size() letters.
std::string normalize_sequence(std::string_view actual, std::string_view templ);

/// One string per channel, frame order preserved.
std::array<std::string, kChannels> split_channels(const SymbolSequence& seq);
SymbolSequence merge_channels(const std::array<std::string, kChannels>& channels);

/// One frame per line, 71 letters separated by single spaces.
std::string format_symbol_grid(const SymbolSequence& seq);
SymbolSequence parse_symbol_grid(std::string_view text);

struct GestureTemplate {
    std::string label;
    std::vector<DeltaFrame> numeric;
    SymbolSequence symbolic;

    int length() const { return static_cast<int>(numeric.size()); }
};

GestureTemplate make_template(std::string label, std::vector<DeltaFrame> numeric);

}  // namespace gesture_forge
