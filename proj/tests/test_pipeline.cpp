#include <doctest.h>

#include <sstream>

#include "gesture_forge/error.hpp"
#include "gesture_forge/pipeline.hpp"

using namespace gesture_forge;

namespace {

HandFrame frame_at(double v) {
    HandFrame f;
    for (Vec3& p : f.vectors) p = Vec3(v, -v, 2 * v);
    f.angles.fill(v);
    return f;
}

}  // namespace

TEST_CASE("retiming a ramp") {
    const std::vector<HandFrame> two{frame_at(0.0), frame_at(1.0)};
    const auto five = retime_sequence(two, 5);
    REQUIRE(five.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(five[i].angles[3] == doctest::Approx(0.25 * i).epsilon(1e-15));
        CHECK(five[i].vectors[7].y() == doctest::Approx(-0.25 * i).epsilon(1e-15));
    }
}

TEST_CASE("retiming keeps endpoints exactly and is the identity at equal length") {
    std::vector<HandFrame> seq;
    for (int i = 0; i < 23; ++i) seq.push_back(frame_at(std::sin(0.3 * i) + 0.1 * i));
    for (int len : {2, 7, 23, 30, 35}) {
        const auto out = retime_sequence(seq, len);
        REQUIRE(static_cast<int>(out.size()) == len);
        CHECK(out.front().angles == seq.front().angles);
        CHECK(out.back().angles == seq.back().angles);
    }
    const auto same = retime_sequence(seq, 23);
    for (int i = 0; i < 23; ++i) CHECK(same[i].angles == seq[i].angles);

    std::vector<HandFrame> flat(9, frame_at(0.7));
    for (const HandFrame& f : retime_sequence(flat, 31)) CHECK(f.angles[0] == doctest::Approx(0.7).epsilon(1e-15));
    for (const HandFrame& f : retime_sequence(std::vector<HandFrame>{frame_at(0.4)}, 5)) CHECK(f.angles[0] == 0.4);
    CHECK_THROWS_AS(retime_sequence(std::vector<HandFrame>{}, 5), Error);
    CHECK_THROWS_AS(retime_sequence(seq, 1), Error);
}

TEST_CASE("occlusion injection hides exactly k frames") {
    const Recording rec = trial_recording("pull", 30, RunConfig{}, 3);
    for (int k : {0, 1, 7, 15, 30}) {
        const Recording out = inject_occlusion(rec, k, {}, 11);
        int hidden = 0;
        for (std::size_t t = 0; t < out.frames.size(); ++t) {
            CHECK(out.frames[t].values == rec.frames[t].values);
            const bool all_zero = std::all_of(out.confidence[t].begin(), out.confidence[t].end(),
                                              [](double c) { return c == 0.0; });
            hidden += all_zero;
        }
        CHECK(hidden == k);
    }
    const KeypointId thumb[] = {KeypointId{KeypointClass::A, 0}};
    const Recording partial = inject_occlusion(rec, 4, thumb, 2);
    int zeros = 0;
    for (const auto& c : partial.confidence) {
        zeros += c[0] == 0.0;
        CHECK(c[1] == 1.0);
    }
    CHECK(zeros == 4);
    CHECK_THROWS_AS(inject_occlusion(rec, 31, {}, 1), Error);
}

TEST_CASE("noise-free trials are recognized perfectly") {
    RunConfig cfg;
    cfg.trials = 3;
    cfg.angle_noise = 0.0;
    cfg.vector_noise = 0.0;
    const auto templates = reference_templates();
    const auto gestures = all_gestures();
    const SweepReport r = run_accuracy(cfg, PipelineOptions{}, templates, gestures);
    REQUIRE(r.rows.size() == gestures.size());
    for (const SweepRow& row : r.rows) CHECK(row.accuracy() == 1.0);
}

TEST_CASE("normalization yields one template-length buffer per template") {
    const auto templates = reference_templates();
    for (int len : {21, 30, 35}) {
        const Recording rec = trial_recording("swipe-right", len, RunConfig{}, 5);
        CHECK(static_cast<int>(rec.frames.size()) == len);
        const auto buffers = normalize_stream(rec, templates, 30);
        REQUIRE(buffers.size() == templates.size());
        for (const FrameBuffer& b : buffers) CHECK(b.fill() == 30);
    }
}

TEST_CASE("sweeps are deterministic") {
    RunConfig cfg;
    cfg.trials = 2;
    cfg.frames_min = 28;
    cfg.frames_max = 31;
    const auto templates = reference_templates();
    const std::vector<std::string> gestures{"push", "hold"};
    auto csv = [&] {
        std::ostringstream out;
        write_sweep_csv(out, sweep_frames(cfg, PipelineOptions{}, templates, gestures));
        return out.str();
    };
    const std::string a = csv();
    CHECK(a == csv());
    CHECK(a.rfind("condition,gesture,trials,correct,accuracy\n", 0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 1 + 4 * 2);

    const SweepReport occ = sweep_occlusion(cfg, PipelineOptions{}, templates, gestures, 3);
    CHECK(occ.rows.size() == 4 * 2);
    CHECK(occ.find("occlusion=2", "hold") != nullptr);
}

TEST_CASE("run configuration checks") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.check());
    cfg.occlusion = 16;
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg = RunConfig{};
    cfg.frames_min = 40;
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg = RunConfig{};
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.check(), Error);
}
