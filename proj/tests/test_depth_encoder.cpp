#include <doctest.h>

#include "gesture_forge/depth_encoder.hpp"
#include "gesture_forge/error.hpp"
#include "gesture_forge/gesture_registry.hpp"
#include "oracles.hpp"

using namespace gesture_forge;

namespace {

DepthMask square(int size, int x0, int y0, int side, std::uint16_t depth = 1) {
    DepthMask m(size, size);
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) m.set_depth(x, y, depth);
    return m;
}

}  // namespace

TEST_CASE("gravity center examples") {
    CHECK(gravity_center(square(7, 1, 1, 5)) == Vec2(3, 3));
    DepthMask single(8, 8);
    single.set_depth(2, 5, 9);
    CHECK(gravity_center(single) == Vec2(2, 5));

    DepthMask disk(33, 33);
    for (int y = 0; y < 33; ++y)
        for (int x = 0; x < 33; ++x)
            if ((x - 16) * (x - 16) + (y - 16) * (y - 16) <= 100) disk.set_depth(x, y, 1);
    CHECK(gravity_center(disk) == Vec2(16, 16));
    CHECK(gravity_center(disk) == oracle::brute_force_gravity_center(disk));
}

TEST_CASE("gravity center agrees with brute force on random masks") {
    Rng rng(2024);
    for (int i = 0; i < 10; ++i) {
        const DepthMask m = oracle::random_blob_mask(rng, 64, 64, 6);
        CHECK(gravity_center(m) == oracle::brute_force_gravity_center(m));
    }
}

TEST_CASE("distance transform is exact, not chamfer") {
    Rng rng(8);
    const DepthMask m = oracle::random_blob_mask(rng, 24, 24, 4);
    const std::vector<double> d = squared_distance_to_background(m);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
            double best = std::numeric_limits<double>::infinity();
            for (int qy = -1; qy <= 24; ++qy)
                for (int qx = -1; qx <= 24; ++qx)
                    if (!m.contains(qx, qy) || !m.foreground(qx, qy))
                        best = std::min(best, double((qx - x) * (qx - x) + (qy - y) * (qy - y)));
            CHECK(d[m.index(x, y)] == best);
        }
}

TEST_CASE("gravity center errors") {
    CHECK_THROWS_AS(gravity_center(DepthMask(4, 4)), Error);
    try {
        gravity_center(DepthMask(4, 4));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyMask);
    }
}

TEST_CASE("baseline and confidence") {
    CHECK(baseline_from({3, 4}, {0, 0}).length == 5.0);
    CHECK(baseline_from({7.5, 2}, {0.5, 2}).length == 7.0);
    CHECK_THROWS_AS(baseline_from({1, 1}, {1, 1}), Error);
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const Vec2 a(rng.uniform(-50, 50), rng.uniform(-50, 50)), b(rng.uniform(-50, 50), rng.uniform(-50, 50));
        const double dx = a.x() - b.x(), dy = a.y() - b.y();
        CHECK(baseline_from(a, b).length == doctest::Approx(std::sqrt(dx * dx + dy * dy)).epsilon(1e-14));
    }

    const Baseline base{{0, 0}, 12.5};
    CHECK(std::abs(keypoint_confidence(0.0, base) - 1.0) < 1e-12);
    CHECK(std::abs(keypoint_confidence(4 * 12.5, base) - 0.0) < 1e-12);
    CHECK(std::abs(keypoint_confidence(2 * 12.5, base) - 0.5) < 1e-12);
    CHECK(keypoint_confidence(1000.0, base) == 0.0);
    double prev = 2.0;
    for (double d = 0.0; d < 80.0; d += 0.7) {
        const double c = keypoint_confidence(d, base);
        CHECK((c >= 0.0 && c <= 1.0 && c <= prev));
        prev = c;
    }
}

TEST_CASE("prospect segmentation") {
    DepthMask two(12, 8);
    for (int y = 1; y < 4; ++y)
        for (int x = 1; x < 4; ++x) two.set_depth(x, y, 50);
    for (int y = 4; y < 7; ++y)
        for (int x = 7; x < 10; ++x) two.set_depth(x, y, 50);
    const auto regions = segment_prospects(two, 100);
    REQUIRE(regions.size() == 2);
    CHECK(regions[0].centroid == Vec2(2, 2));
    CHECK(regions[1].centroid == Vec2(8, 5));
    CHECK(segment_prospects(two, 10).empty());
    CHECK(segment_prospects(DepthMask(5, 5), 100).empty());

    Rng rng(99);
    for (int i = 0; i < 20; ++i) {
        const DepthMask m = oracle::random_blob_mask(rng, 40, 40, 8);
        for (double threshold : {60.0, 128.0, 255.0}) {
            const auto found = segment_prospects(m, threshold);
            CHECK(static_cast<int>(found.size()) == oracle::component_count(m, threshold));
            for (const auto& r : found) CHECK_FALSE(r.cells.empty());
        }
    }
}

TEST_CASE("encode frame with every keypoint visible") {
    const RenderedHand hand = render_hand(rest_pose(), palm_center(rest_params()));
    const Vec2 center = gravity_center(hand.mask);
    const Baseline base = baseline_from(center, hand.keypoints_px[kElbow.flat()]);
    const SkeletonPose skeleton = skeleton_from_pose(rest_pose(), palm_center(rest_params()), base);
    auto regions = segment_prospects(hand.mask, 150);
    // Neighbouring joints of one finger touch and merge, so there are fewer regions than keypoints.
    CHECK(regions.size() >= 10);
    CHECK(regions.size() <= 20);
    const HandFrame f = encode_frame(regions, base, skeleton);
    for (double c : f.confidence) CHECK(c > 0.99);
    for (int k = 0; k < kVectorKeypoints; ++k) {
        // Vectors are (centroid - center) / baseline; a merged region's centroid sits between its joints.
        const Vec2 px = hand.keypoints_px[k];
        CHECK(std::abs(f.vectors[k].x() - (px.x() - center.x()) / base.length) < 0.1);
        CHECK(std::abs(f.vectors[k].y() + (px.y() - center.y()) / base.length) < 0.1);
        CHECK(f.vectors[k].z() == 0.0);
    }
}

TEST_CASE("encode frame with no regions falls back to the skeleton") {
    const Baseline base{{40, 40}, 20};
    const SkeletonPose skeleton = skeleton_from_pose(rest_pose(), palm_center(rest_params()), base);
    const HandFrame f = encode_frame({}, base, skeleton);
    for (double c : f.confidence) CHECK(c == 0.0);
    for (int k = 0; k < kVectorKeypoints; ++k) {
        const Vec3 expected = rest_pose()[k] - palm_center(rest_params());
        CHECK(std::abs(f.vectors[k].x() - expected.x()) < 1e-12);
        CHECK(std::abs(f.vectors[k].y() - expected.y()) < 1e-12);
        CHECK(f.vectors[k].z() == 0.0);
    }
}

TEST_CASE("encoded vectors are scale invariant under occlusion") {
    const RenderedHand hand = render_hand(rest_pose(), palm_center(rest_params()));
    DepthMask base_mask = hand.mask;
    // Hide the right half of the fingers.
    occlude_rect(base_mask, base_mask.width() / 2 + 4, 0, base_mask.width(), base_mask.height() / 3);
    auto encode = [&](int factor) {
        const DepthMask m = base_mask.upscaled(factor);
        const Vec2 elbow = (hand.keypoints_px[kElbow.flat()] + Vec2(0.5, 0.5)) * factor - Vec2(0.5, 0.5);
        const Baseline b = baseline_from(gravity_center(m), elbow);
        return encode_frame(segment_prospects(m, 150), b, skeleton_from_pose(rest_pose(), palm_center(rest_params()), b));
    };
    const HandFrame one = encode(1);
    int hidden = 0;
    for (double c : one.confidence) hidden += c < 0.99;
    CHECK(hidden > 0);
    for (int factor : {2, 3}) {
        const HandFrame s = encode(factor);
        for (int k = 0; k < kVectorKeypoints; ++k)
            for (int a = 0; a < 2; ++a) CHECK(std::abs(s.vectors[k][a] - one.vectors[k][a]) < 0.05);
        for (int k = 0; k < kKeypointCount; ++k) CHECK(std::abs(s.confidence[k] - one.confidence[k]) < 0.05);
    }
}

TEST_CASE("PGM round trip in both encodings") {
    Rng rng(1);
    const DepthMask m = oracle::random_blob_mask(rng, 17, 9, 3, 1000);
    for (bool ascii : {true, false}) {
        const DepthMask back = parse_pgm(format_pgm(m, ascii));
        CHECK(back.width() == 17);
        CHECK(back.height() == 9);
        CHECK(back.cells() == m.cells());
    }
    const DepthMask p2 = parse_pgm("P2\n# comment\n3 2\n255\n0 1 2\n3 4 255\n");
    CHECK(p2.depth(2, 1) == 255);
    CHECK(p2.depth(1, 0) == 1);
    CHECK_THROWS_AS(parse_pgm("P3\n1 1\n255\n0\n"), Error);
    CHECK_THROWS_AS(parse_pgm("P5\n4 4\n255\nab"), Error);
    CHECK_THROWS_AS(read_pgm("/nonexistent/file.pgm"), Error);
}
