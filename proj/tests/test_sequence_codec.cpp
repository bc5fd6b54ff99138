#include <doctest.h>

#include "gesture_forge/error.hpp"
#include "gesture_forge/gesture_registry.hpp"
#include "gesture_forge/rng.hpp"
#include "gesture_forge/sequence_codec.hpp"

using namespace gesture_forge;

namespace {

char vec(double v) { return encode_value(v, SymbolKind::Vector).letter; }
char ang(double v) { return encode_value(v, SymbolKind::Angle).letter; }

std::string random_symbols(Rng& rng, int len, int alphabet) {
    std::string s(len, 'A');
    for (char& c : s) c = static_cast<char>('A' + rng.index(alphabet));
    return s;
}

}  // namespace

TEST_CASE("table examples") {
    CHECK(vec(0.18) == 'A');
    CHECK(vec(1.06) == 'F');
    CHECK(vec(0.92) == 'E');
    CHECK(ang(144.0) == 'H');
}

TEST_CASE("bins are half-open and clamp at the top") {
    CHECK(vec(0.0) == 'A');
    CHECK(vec(0.2) == 'B');
    CHECK(vec(0.6) == 'D');
    CHECK(vec(1.8) == 'J');
    CHECK(vec(1.9999) == 'J');
    CHECK(vec(7.5) == 'J');
    CHECK(vec(-1.06) == 'F');
    CHECK(ang(0.0) == 'A');
    CHECK(ang(20.0) == 'B');
    CHECK(ang(199.0) == 'J');
    CHECK(ang(500.0) == 'J');
    for (int i = 0; i < 10; ++i) {
        CHECK(vec(0.2 * i) == 'A' + i);
        CHECK(ang(20.0 * i) == 'A' + i);
    }
}

TEST_CASE("encoding is monotone in magnitude") {
    Rng rng(6);
    for (int i = 0; i < 2000; ++i) {
        double a = rng.uniform(0, 2.5), b = rng.uniform(0, 2.5);
        if (a > b) std::swap(a, b);
        CHECK(vec(a) <= vec(b));
        CHECK(ang(a * 90) <= ang(b * 90));
    }
}

TEST_CASE("sequence encoding is element-wise") {
    CHECK(encode_sequence(std::vector<DeltaFrame>(4)).size() == 4);
    for (const SymbolFrame& f : encode_sequence(std::vector<DeltaFrame>(3)))
        for (char c : f) CHECK(c == 'A');

    Rng rng(2);
    DeltaFrame d;
    for (int c = 0; c < kChannels; ++c) d.values[c] = is_angle_channel(c) ? rng.uniform(-200, 200) : rng.uniform(-2, 2);
    const SymbolSequence s = encode_sequence(std::vector<DeltaFrame>{d});
    for (int c = 0; c < kChannels; ++c) {
        const double mag = std::abs(d.values[c]);
        const int bin = std::min(9, static_cast<int>(is_angle_channel(c) ? mag / 20.0 : mag * 5.0));
        CHECK(s[0][c] == 'A' + bin);
    }
}

TEST_CASE("normalizer reproduces the hand traces") {
    CHECK(normalize_sequence("AABBDDE", "ABDG") == "ABDD");
    CHECK(normalize_sequence("ABD", "ABBD") == "ABBD");
    CHECK(normalize_indices("AABBDDE", "ABDG") == std::vector<int>{0, 2, 4, 4});
    CHECK(normalize_indices("ABD", "ABBD") == std::vector<int>{0, 1, 1, 2});
}

TEST_CASE("normalizer cold start emits the template symbol") {
    CHECK(normalize_indices("CCC", "ABC") == std::vector<int>{-1, -1, 2});
    CHECK(normalize_sequence("CCC", "ABC") == "ABC");
    CHECK(normalize_sequence("XY", "AB") == "AB");
}

TEST_CASE("normalizer output length, idempotence and provenance") {
    Rng rng(31);
    const int m = kDefaultFrames;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::string templ = random_symbols(rng, m, 4);
        const std::string actual = random_symbols(rng, 1 + static_cast<int>(rng.index(3 * m)), 4);
        const std::string out = normalize_sequence(actual, templ);
        CHECK(out.size() == templ.size());
        const std::vector<int> idx = normalize_indices(actual, templ);
        for (int i = 0; i < m; ++i) {
            if (idx[i] < 0) {
                CHECK(out[i] == templ[i]);
            } else {
                CHECK(idx[i] < static_cast<int>(actual.size()));
                CHECK(out[i] == actual[idx[i]]);
            }
        }
        CHECK(normalize_sequence(templ, templ) == templ);
    }
}

TEST_CASE("split and merge are inverse") {
    Rng rng(7);
    SymbolSequence seq(5);
    for (auto& f : seq)
        for (char& c : f) c = static_cast<char>('A' + rng.index(10));
    const auto channels = split_channels(seq);
    for (int c = 0; c < kChannels; ++c)
        for (int t = 0; t < 5; ++t) CHECK(channels[c][t] == seq[t][c]);
    CHECK(merge_channels(channels) == seq);

    const auto single = split_channels(SymbolSequence(1));
    for (const auto& ch : single) CHECK(ch.size() == 1);
}

TEST_CASE("symbol grid round trip") {
    Rng rng(8);
    SymbolSequence seq(3);
    for (auto& f : seq)
        for (char& c : f) c = static_cast<char>('A' + rng.index(10));
    const std::string text = format_symbol_grid(seq);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(parse_symbol_grid(text) == seq);
    CHECK_THROWS_AS(parse_symbol_grid("A B C\n"), Error);
    CHECK_THROWS_AS(parse_symbol_grid(std::string(141, 'K')), Error);
}

TEST_CASE("templates carry matching numeric and symbolic forms") {
    const GestureTemplate t = make_template("push", synth_deltas("push", 0, NoiseSpec{0.0}));
    CHECK(t.length() == kDefaultFrames);
    CHECK(t.symbolic.size() == t.numeric.size());
    CHECK(t.symbolic == encode_sequence(t.numeric));
    CHECK_THROWS_AS(make_template("empty", {}), Error);
}
