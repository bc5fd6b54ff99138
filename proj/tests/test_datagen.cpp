#include <doctest.h>

#include <sstream>

#include "gesture_forge/datagen.hpp"
#include "gesture_forge/error.hpp"
#include "gesture_forge/gesture_registry.hpp"
#include "gesture_forge/pipeline.hpp"
#include "gesture_forge/rng.hpp"

using namespace gesture_forge;

TEST_CASE("registry holds eleven gestures") {
    CHECK(gesture_names().size() == 11);
    CHECK(gesture_index("push") == 0);
    CHECK(gesture_index("pick") == 10);
    CHECK_THROWS_AS(gesture_index("wave"), Error);
    try {
        synth_gesture("wave", 1, NoiseSpec{0.0});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownGesture);
    }
}

TEST_CASE("synthesis is deterministic and M frames long") {
    for (std::string_view name : gesture_names()) {
        const auto a = synth_deltas(name, 42, NoiseSpec{0.02});
        const auto b = synth_deltas(name, 42, NoiseSpec{0.02});
        REQUIRE(a.size() == 30);
        for (std::size_t t = 0; t < a.size(); ++t) CHECK(a[t].values == b[t].values);
        CHECK(synth_gesture(name, 1, NoiseSpec{0.0}, 17).size() == 17);
    }
}

TEST_CASE("hold without jitter is static") {
    for (const DeltaFrame& d : synth_deltas("hold", 5, NoiseSpec{0.0}))
        for (double v : d.values) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("encoded deltas stay inside the symbol range") {
    for (std::string_view name : gesture_names())
        for (const DeltaFrame& d : synth_deltas(name, 0, NoiseSpec{0.0}))
            for (int c = 0; c < kChannels; ++c) CHECK(std::abs(d.values[c]) < (is_angle_channel(c) ? 200.0 : 2.0));
}

TEST_CASE("every gesture template differs from every other") {
    const auto templates = reference_templates();
    for (std::size_t i = 0; i < templates.size(); ++i)
        for (std::size_t j = i + 1; j < templates.size(); ++j) {
            double diff = 0.0;
            for (int t = 0; t < 30; ++t)
                for (int c = 0; c < kChannels; ++c)
                    diff += std::abs(templates[i].numeric[t].values[c] - templates[j].numeric[t].values[c]);
            CHECK(diff > 1.0);
        }
}

TEST_CASE("perturbation bounds and mean") {
    const auto base = synth_deltas("swipe-up", 1, NoiseSpec{0.0});
    CHECK(perturb(base, NoiseSpec{0.0}, 9)[3].values == base[3].values);

    const auto angle = perturb(base, NoiseSpec{5.0}, 9, mode_channels(DataMode::Angle));
    for (std::size_t t = 0; t < base.size(); ++t)
        for (int c = 0; c < kChannels; ++c) {
            const double d = angle[t].values[c] - base[t].values[c];
            if (is_angle_channel(c)) {
                CHECK(std::abs(d) <= 5.0);
            } else {
                CHECK(d == 0.0);
            }
        }

    // 1e5 draws: 1408 frames x 71 channels.
    std::vector<DeltaFrame> zeros(1409);
    const auto noisy = perturb(zeros, NoiseSpec{1.0}, 3);
    double sum = 0.0, worst = 0.0;
    std::size_t n = 0;
    for (const DeltaFrame& f : noisy)
        for (double v : f.values) {
            sum += v;
            worst = std::max(worst, std::abs(v));
            ++n;
        }
    CHECK(n >= 100000);
    CHECK(std::abs(sum / n) <= 0.05);
    CHECK(worst <= 1.0);
    CHECK(perturb(zeros, NoiseSpec{1.0}, 3)[100].values == noisy[100].values);
}

TEST_CASE("sample CSV round trip") {
    std::vector<std::string> labels{"push", "pick"};
    SampleSet set = synth_sample_set(labels, 2, 7, NoiseSpec{0.02});
    set.samples[1].confidence[4][3] = 0.25;
    std::stringstream buf;
    write_sample_csv(buf, set);
    const std::string text = buf.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4 * 30);
    CHECK(text.rfind("label,sample_id,frame_idx,dA0_x,dA0_y,dA0_z,", 0) == 0);
    const SampleSet back = read_sample_csv(buf);
    REQUIRE(back.samples.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(back.samples[i].label == set.samples[i].label);
        for (int t = 0; t < 30; ++t) {
            CHECK(back.samples[i].frames[t].values == set.samples[i].frames[t].values);
            CHECK(back.samples[i].confidence[t] == set.samples[i].confidence[t]);
        }
    }
    CHECK(sample_csv_header().size() == 3 + 57 + 14 + 20);
}

TEST_CASE("sample CSV rejects malformed rows") {
    std::stringstream short_row("push,0,0,1,2\n");
    CHECK_THROWS_AS(read_sample_csv(short_row), Error);

    std::vector<std::string> labels{"hold"};
    std::stringstream buf;
    write_sample_csv(buf, synth_sample_set(labels, 1, 1, NoiseSpec{0.0}, 2));
    std::string text = buf.str();
    std::string bad = text;
    bad.replace(bad.rfind(",1\n"), 3, ",7\n");  // confidence above 1
    std::stringstream bad_conf(bad);
    CHECK_THROWS_AS(read_sample_csv(bad_conf), Error);
}

TEST_CASE("validation leaves clean data alone") {
    SampleSet set;
    for (std::string_view name : gesture_names())
        for (int i = 0; i < 3; ++i) {
            Sample s;
            s.label = std::string(name);
            s.frames = synth_deltas(name, 0, NoiseSpec{0.0});
            s.confidence.assign(30, full_confidence());
            set.samples.push_back(s);
        }
    const ValidationResult r = validate_dataset(set);
    CHECK(r.report.relabels.empty());
    for (std::size_t i = 0; i < set.samples.size(); ++i) CHECK(r.data.samples[i].label == set.samples[i].label);
}

TEST_CASE("validation relabels a sample planted at another centre") {
    SampleSet set = synth_sample_set(all_gestures(), 4, 3, NoiseSpec{0.02});
    Sample planted = set.samples[0];  // a push
    planted.frames = synth_deltas("swipe-left", 0, NoiseSpec{0.0});
    set.samples.push_back(planted);
    const ValidationResult r = validate_dataset(set);
    REQUIRE(r.report.relabels.size() == 1);
    CHECK(r.report.relabels[0].sample == set.samples.size() - 1);
    CHECK(r.report.relabels[0].from == "push");
    CHECK(r.report.relabels[0].to == "swipe-left");
    CHECK(r.report.moved_out[0] == 1);
    CHECK(r.report.moved_in[gesture_index("swipe-left")] == 1);
}

TEST_CASE("validation never changes values, only labels") {
    SampleSet set = synth_sample_set(all_gestures(), 3, 5, NoiseSpec{0.05});
    set.samples[4].label = "pick";
    const ValidationResult r = validate_dataset(set);
    REQUIRE(r.data.samples.size() == set.samples.size());
    for (std::size_t i = 0; i < set.samples.size(); ++i)
        for (int t = 0; t < 30; ++t) CHECK(r.data.samples[i].frames[t].values == set.samples[i].frames[t].values);
}

TEST_CASE("validation improves label accuracy on a mislabeled set") {
    SampleSet set = synth_sample_set(all_gestures(), 10, 21, NoiseSpec{0.02});
    std::vector<std::string> truth;
    for (const Sample& s : set.samples) truth.push_back(s.label);
    Rng rng(77);
    const std::size_t wrong = set.samples.size() / 10;
    for (std::size_t k = 0; k < wrong; ++k) {
        Sample& s = set.samples[rng.index(set.samples.size())];
        std::string other;
        do {
            other = std::string(gesture_names()[rng.index(kGestureCount)]);
        } while (other == s.label);
        s.label = other;
    }
    auto accuracy = [&](const SampleSet& d) {
        int ok = 0;
        for (std::size_t i = 0; i < d.samples.size(); ++i) ok += d.samples[i].label == truth[i];
        return static_cast<double>(ok) / d.samples.size();
    };
    const double before = accuracy(set);
    const double after = accuracy(validate_dataset(set).data);
    CHECK(before < 1.0);
    CHECK(after >= before);
}

TEST_CASE("validation needs every gesture") {
    std::vector<std::string> labels{"push", "pull"};
    try {
        validate_dataset(synth_sample_set(labels, 2, 1, NoiseSpec{0.0}));
        FAIL("expected EmptyClass");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyClass);
    }
}
