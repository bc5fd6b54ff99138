#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "gesture_forge/depth_encoder.hpp"
#include "gesture_forge/gesture_registry.hpp"

using namespace gesture_forge;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "gesture_forge");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gesture_forge_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("synth writes one row per frame") {
    const Run r = run({"synth", "--gesture", "push", "--n", "50"});
    CHECK(r.code == kExitOk);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 50 * 30);
    CHECK(run({"synth", "--gesture", "wave"}).code == kExitUsage);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"bogus"}).code == kExitUsage);
    CHECK(run({"synth", "--n", "zero"}).code == kExitUsage);
    CHECK(run({"sweep-occlusion", "--max-occlusion", "16"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("recognize names the gesture of a clean stream") {
    const fs::path csv = scratch("swipe.csv");
    REQUIRE(run({"synth", "--gesture", "swipe-left", "--n", "1", "--jitter", "0", "-o", csv.string()}).code == 0);
    const Run r = run({"recognize", "--in", csv.string()});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["gesture"] == "swipe-left");
    CHECK(j["table"].size() == 11);
}

TEST_CASE("bad data exits 2") {
    const fs::path csv = scratch("broken.csv");
    std::ofstream(csv) << "label,sample_id\npush,0\n";
    CHECK(run({"recognize", "--in", csv.string()}).code == kExitData);
    CHECK(run({"validate", "--in", csv.string()}).code == kExitData);
}

TEST_CASE("GESTURE_FORGE_SEED overrides --seed") {
    const auto a = run({"synth", "--gesture", "pick", "--n", "2", "--seed", "5"});
    const auto b = run({"synth", "--gesture", "pick", "--n", "2", "--seed", "6"});
    CHECK(a.out != b.out);
    ::setenv("GESTURE_FORGE_SEED", "5", 1);
    const auto c = run({"synth", "--gesture", "pick", "--n", "2", "--seed", "6"});
    ::setenv("GESTURE_FORGE_SEED", "nope", 1);
    const auto d = run({"synth", "--gesture", "pick", "--n", "2"});
    ::unsetenv("GESTURE_FORGE_SEED");
    CHECK(c.out == a.out);
    CHECK(d.code == kExitUsage);
}

TEST_CASE("gan and predictor commands write loadable models") {
    const fs::path seeds = scratch("seeds.csv"), gan = scratch("gan.json"), gen = scratch("gen.csv"),
                   gru = scratch("gru.json"), occ = scratch("occ.csv");
    REQUIRE(run({"synth", "--n", "2", "-o", seeds.string()}).code == 0);
    const Run t = run({"gan-train", "--seeds", seeds.string(), "--epochs", "1", "-o", gan.string()});
    REQUIRE(t.code == kExitOk);
    CHECK(t.err.find("epoch") != std::string::npos);
    REQUIRE(run({"gan-gen", "--model", gan.string(), "--seeds", seeds.string(), "--n", "20", "-o", gen.string()}).code ==
            0);
    const std::string generated = slurp(gen);
    CHECK(std::count(generated.begin(), generated.end(), '\n') == 1 + 20 * 30);

    const Run v = run({"validate", "--in", gen.string()});
    REQUIRE(v.code == kExitOk);
    CHECK(nlohmann::json::parse(v.out)["samples"] == 20);

    REQUIRE(run({"gru-train", "--in", seeds.string(), "--epochs", "1", "--hidden", "4", "-o", gru.string()}).code == 0);
    REQUIRE(run({"occlude", "--in", seeds.string(), "--k", "3", "-o", occ.string()}).code == 0);
    CHECK(run({"occlude", "--in", seeds.string(), "--k", "3", "--keypoints", "Z9"}).code == kExitUsage);
    const Run r = run({"recognize", "--in", occ.string(), "--model", gru.string()});
    CHECK(r.code == kExitOk);
}

TEST_CASE("encode-depth turns rendered frames into a frame CSV") {
    std::vector<std::string> args{"encode-depth"};
    Vec2 elbow;
    for (int i = 0; i < 4; ++i) {
        const PoseParams p = gesture_params(gesture_index("push"), i / 29.0);
        const RenderedHand hand = render_hand(pose_positions(p), palm_center(p));
        elbow = hand.keypoints_px[kElbow.flat()];
        const fs::path pgm = scratch("frame" + std::to_string(i) + ".pgm");
        write_pgm(pgm.string(), hand.mask);
        args.push_back(pgm.string());
    }
    args.insert(args.end(), {"--elbow", std::to_string(elbow.x()), std::to_string(elbow.y()), "--label", "push"});
    const Run r = run(args);
    REQUIRE(r.code == kExitOk);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 3);
    CHECK(r.out.find("\npush,0,0,") != std::string::npos);
}
