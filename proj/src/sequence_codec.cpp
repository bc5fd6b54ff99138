#include "gesture_forge/sequence_codec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gesture_forge/error.hpp"

namespace gesture_forge {

EncodedSymbol encode_value(double value, SymbolKind kind) {
    const double magnitude = std::abs(value);
    // Multiplying by 5 instead of dividing by 0.2 keeps decimal boundaries such as 0.6 in the upper bin.
    const double scaled = kind == SymbolKind::Vector ? magnitude * 5.0 : magnitude / 20.0;
    int bin = std::isfinite(scaled) ? static_cast<int>(std::min(std::floor(scaled), 9.0)) : 9;
    if (std::isnan(value)) bin = 0;
    return EncodedSymbol{static_cast<char>('A' + bin), kind};
}

SymbolSequence encode_sequence(std::span<const DeltaFrame> frames) {
    SymbolSequence out;
    out.reserve(frames.size());
    for (const DeltaFrame& f : frames) {
        SymbolFrame s{};
        for (int c = 0; c < kChannels; ++c) s[c] = encode_value(f.values[c], channel_kind(c)).letter;
        out.push_back(s);
    }
    return out;
}

std::vector<int> normalize_indices(std::string_view actual, std::string_view templ) {
    const int n = static_cast<int>(actual.size());
    std::vector<int> out;
    out.reserve(templ.size());
    int cursor = -1;
    for (int i = 0; i < static_cast<int>(templ.size()); ++i) {
        if (i < n && actual[i] == templ[i]) {
            cursor = i;
            out.push_back(i);
            continue;
        }
        // The scan starts at the cursor itself so a repeated template symbol can re-hit it.
        int hit = -1;
        for (int j = std::max(cursor, 0); j < n; ++j) {
            if (actual[j] == templ[i]) {
                hit = j;
                break;
            }
        }
        if (hit >= 0) cursor = hit;
        out.push_back(hit >= 0 ? hit : cursor);
    }
    return out;
}

std::string normalize_sequence(std::string_view actual, std::string_view templ) {
    const std::vector<int> idx = normalize_indices(actual, templ);
    std::string out(templ.size(), ' ');
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = idx[i] >= 0 ? actual[idx[i]] : templ[i];
    return out;
}

std::array<std::string, kChannels> split_channels(const SymbolSequence& seq) {
    std::array<std::string, kChannels> out;
    for (auto& s : out) s.reserve(seq.size());
    for (const SymbolFrame& f : seq)
        for (int c = 0; c < kChannels; ++c) out[c].push_back(f[c]);
    return out;
}

SymbolSequence merge_channels(const std::array<std::string, kChannels>& channels) {
    const std::size_t len = channels[0].size();
    for (const auto& ch : channels)
        require(ch.size() == len, ErrorKind::InvalidArgument, "channel lengths differ");
    SymbolSequence out(len);
    for (std::size_t t = 0; t < len; ++t)
        for (int c = 0; c < kChannels; ++c) out[t][c] = channels[c][t];
    return out;
}

std::string format_symbol_grid(const SymbolSequence& seq) {
    std::string out;
    out.reserve(seq.size() * kChannels * 2);
    for (const SymbolFrame& f : seq) {
        for (int c = 0; c < kChannels; ++c) {
            if (c) out.push_back(' ');
            out.push_back(f[c]);
        }
        out.push_back('\n');
    }
    return out;
}

SymbolSequence parse_symbol_grid(std::string_view text) {
    SymbolSequence out;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        SymbolFrame f{};
        int c = 0;
        std::string tok;
        while (fields >> tok) {
            require(tok.size() == 1 && tok[0] >= 'A' && tok[0] <= 'J' && c < kChannels, ErrorKind::ParseError,
                    "bad symbol on line " + std::to_string(line_no));
            f[c++] = tok[0];
        }
        require(c == kChannels, ErrorKind::ParseError,
                "expected 71 symbols on line " + std::to_string(line_no) + ", got " + std::to_string(c));
        out.push_back(f);
    }
    return out;
}

GestureTemplate make_template(std::string label, std::vector<DeltaFrame> numeric) {
    require(!numeric.empty(), ErrorKind::InvalidArgument, "template needs at least one frame");
    GestureTemplate t;
    t.label = std::move(label);
    t.symbolic = encode_sequence(numeric);
    t.numeric = std::move(numeric);
    return t;
}

}  // namespace gesture_forge
