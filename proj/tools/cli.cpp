#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "gesture_forge/depth_encoder.hpp"
#include "gesture_forge/error.hpp"
#include "gesture_forge/gan.hpp"
#include "gesture_forge/pipeline.hpp"
#include "gesture_forge/rng.hpp"
#include "gesture_forge/serialization.hpp"

namespace gesture_forge {

namespace {

// Usage problems found after CLI11 has accepted the arguments.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
    if (path.empty() || path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    require(file.good(), ErrorKind::IoError, "cannot write " + path);
    write(file);
    require(file.good(), ErrorKind::IoError, "write to " + path + " failed");
}

SampleSet load_samples(const std::string& path, DataMode mode) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::IoError, "cannot open " + path);
    return read_sample_csv(in, mode);
}

std::vector<std::string> expand_gestures(const std::vector<std::string>& names) {
    if (names.empty() || std::find(names.begin(), names.end(), "all") != names.end()) return all_gestures();
    return names;
}

CLI::Validator gesture_name() {
    return CLI::Validator(
        [](const std::string& s) -> std::string {
            if (s == "all") return {};
            for (std::string_view n : gesture_names())
                if (n == s) return {};
            return "unknown gesture '" + s + "'";
        },
        "GESTURE", "gesture name");
}

const CLI::Validator kModeName = CLI::IsMember({"vector", "angle"});

std::optional<Strategy> parse_strategy(const std::string& s) {
    if (s == "coordinate") return Strategy::Coordinate;
    if (s == "angle") return Strategy::Angle;
    return std::nullopt;
}

double default_noise(DataMode mode) {
    return (mode == DataMode::Vector ? NoiseSpec::vector_default() : NoiseSpec::angle_default()).amplitude;
}

std::vector<GestureTemplate> load_templates(const std::string& path, int m) {
    if (path.empty()) return reference_templates(m);
    return build_templates(load_samples(path, DataMode::Vector));
}

struct Options {
    std::uint64_t seed = 1;
    std::string out;
    std::string in;
    std::string mode = "vector";
    std::vector<std::string> gestures;
    int n = 50;
    int frames = kDefaultFrames;
    double jitter = 0.02;
    std::optional<double> noise;
    std::string model;
    std::string seeds;
    std::string templates;
    std::string strategy = "joint";
    bool no_normalize = false;
    GanConfig gan;
    PredictorConfig gru;
    RunConfig run;
    int max_occlusion = kMaxOccludedFrames;
    int k = 0;
    std::vector<std::string> keypoints;
    std::vector<std::string> pgm;
    std::vector<double> elbow;
    double threshold = 150.0;
    std::string pose = "hold";
    std::string label = "stream";
};

void run_synth(const Options& o, std::ostream& out) {
    SampleSet set = synth_sample_set(expand_gestures(o.gestures), o.n, o.seed, NoiseSpec{o.jitter}, o.frames);
    emit(o.out, out, [&](std::ostream& s) { write_sample_csv(s, set); });
}

void run_gan_train(const Options& o, std::ostream& out, std::ostream& err) {
    const DataMode mode = parse_data_mode(o.mode);
    SampleSet seeds = load_samples(o.seeds, mode);
    GanConfig config = o.gan;
    config.rng_seed = o.seed;
    GanTrainLog log;
    const GanModel model = gan_train(seeds, NoiseSpec{o.noise.value_or(default_noise(mode))}, config, &log);
    for (std::size_t e = 0; e < log.discriminator_loss.size(); ++e)
        err << "epoch " << e + 1 << " discriminator " << log.discriminator_loss[e] << " generator "
            << log.generator_loss[e] << '\n';
    emit(o.out, out, [&](std::ostream& s) { s << gan_to_json(model).dump(1) << '\n'; });
}

void run_gan_gen(const Options& o, std::ostream& out) {
    const GanModel model = gan_from_json(read_json_file(o.model));
    SampleSet seeds = load_samples(o.seeds, model.mode);
    require(!seeds.samples.empty() && static_cast<int>(seeds.samples.front().frames.size()) == model.frames,
            ErrorKind::InvalidArgument, "seed sequences do not match the model's frame count");
    const SampleSet set =
        gan_sample(model, seeds, NoiseSpec{o.noise.value_or(default_noise(model.mode))}, o.n, o.seed);
    emit(o.out, out, [&](std::ostream& s) { write_sample_csv(s, set); });
}

void run_validate(const Options& o, std::ostream& out) {
    const ValidationResult result = validate_dataset(load_samples(o.in, parse_data_mode(o.mode)));
    Json relabels = Json::array();
    for (const Relabel& r : result.report.relabels)
        relabels.push_back(Json{{"sample", r.sample}, {"from", r.from}, {"to", r.to}});
    Json per_gesture = Json::array();
    for (int g = 0; g < kGestureCount; ++g)
        per_gesture.push_back(Json{{"gesture", gesture_names()[g]},
                                   {"moved_out", result.report.moved_out[g]},
                                   {"moved_in", result.report.moved_in[g]}});
    const Json report{{"samples", result.data.samples.size()},
                      {"relabels", std::move(relabels)},
                      {"per_gesture", std::move(per_gesture)}};
    out << report.dump(1) << '\n';
    if (!o.out.empty()) emit(o.out, out, [&](std::ostream& s) { write_sample_csv(s, result.data); });
}

void run_gru_train(const Options& o, std::ostream& out, std::ostream& err) {
    const SampleSet data = load_samples(o.in, DataMode::Vector);
    PredictorConfig config = o.gru;
    config.rng_seed = o.seed;
    const PredictorModel model = train_predictor(data, config);
    double total = 0.0;
    for (int c = 0; c < kChannels; ++c) total += channel_mse(model, c, data);
    err << "mean one-step mse " << total / kChannels << '\n';
    emit(o.out, out, [&](std::ostream& s) { s << predictor_to_json(model).dump(1) << '\n'; });
}

void run_encode_depth(const Options& o, std::ostream& out) {
    const Vec2 elbow(o.elbow[0], o.elbow[1]);
    const int g = gesture_index(o.pose);
    std::vector<HandFrame> hands;
    for (std::size_t i = 0; i < o.pgm.size(); ++i) {
        const DepthMask mask = read_pgm(o.pgm[i]);
        const Baseline base = baseline_from(gravity_center(mask), elbow);
        // The skeleton follows the named gesture's pose at this frame's phase.
        const PoseParams params = gesture_params(g, std::min(1.0, static_cast<double>(i) / o.frames));
        const SkeletonPose skeleton = skeleton_from_pose(pose_positions(params), palm_center(params), base);
        hands.push_back(encode_frame(segment_prospects(mask, o.threshold), base, skeleton, &mask,
                                     static_cast<long>(i)));
    }
    Sample s;
    s.label = o.label;
    s.frames = to_deltas(hands.front(), std::vector<HandFrame>(hands.begin() + 1, hands.end()));
    for (std::size_t t = 1; t < hands.size(); ++t) {
        // A delta is only as trustworthy as the worse of its two frames.
        KeypointConfidence c;
        for (int k = 0; k < kKeypointCount; ++k)
            c[k] = std::min(hands[t - 1].confidence[k], hands[t].confidence[k]);
        s.confidence.push_back(c);
    }
    SampleSet set;
    set.samples.push_back(std::move(s));
    emit(o.out, out, [&](std::ostream& os) { write_sample_csv(os, set); });
}

Recording load_stream(const std::string& path) {
    const SampleSet set = load_samples(path, DataMode::Vector);
    Recording rec;
    for (const Sample& s : set.samples) {
        rec.frames.insert(rec.frames.end(), s.frames.begin(), s.frames.end());
        rec.confidence.insert(rec.confidence.end(), s.confidence.begin(), s.confidence.end());
    }
    require(!rec.frames.empty(), ErrorKind::ParseError, path + " holds no frames");
    return rec;
}

void run_occlude(const Options& o, std::ostream& out) {
    SampleSet set = load_samples(o.in, DataMode::Vector);
    std::vector<KeypointId> affected;
    for (const std::string& name : o.keypoints) {
        try {
            affected.push_back(KeypointId::parse(name));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
        Sample& s = set.samples[i];
        if (o.k > static_cast<int>(s.frames.size()))
            throw UsageError("--k exceeds the length of sample " + std::to_string(i));
        const Recording rec = inject_occlusion(Recording{s.frames, s.confidence}, o.k, affected, derive_seed(o.seed, i));
        s.confidence = rec.confidence;
    }
    emit(o.out, out, [&](std::ostream& s) { write_sample_csv(s, set); });
}

struct Pipeline {
    std::vector<GestureTemplate> templates;
    std::optional<PredictorModel> predictor;
    PipelineOptions options;
};

Pipeline load_pipeline(const Options& o, int m) {
    Pipeline p;
    p.templates = load_templates(o.templates, m);
    if (!o.model.empty()) p.predictor = predictor_from_json(read_json_file(o.model));
    p.options.normalize = !o.no_normalize;
    p.options.strategy = parse_strategy(o.strategy);
    return p;
}

void run_recognize(const Options& o, std::ostream& out) {
    Pipeline p = load_pipeline(o, o.frames);
    if (p.predictor) p.options.predictor = &*p.predictor;
    const MatchResult result = recognize_recording(load_stream(o.in), p.templates, p.options, o.frames);
    emit(o.out, out, [&](std::ostream& s) { s << match_result_to_json(result).dump(2) << '\n'; });
}

void run_sweep(const Options& o, std::ostream& out, bool occlusion) {
    RunConfig config = o.run;
    config.seed = o.seed;
    config.m = o.frames;
    try {
        config.check();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    Pipeline p = load_pipeline(o, config.m);
    if (p.predictor) p.options.predictor = &*p.predictor;
    const std::vector<std::string> gestures = expand_gestures(o.gestures);
    const SweepReport report = occlusion ? sweep_occlusion(config, p.options, p.templates, gestures, o.max_occlusion)
                                         : sweep_frames(config, p.options, p.templates, gestures);
    emit(o.out, out, [&](std::ostream& s) { write_sweep_csv(s, report); });
}

void add_seed(CLI::App* sub, Options& o) {
    sub->add_option("--seed", o.seed, "RNG seed (GESTURE_FORGE_SEED overrides)")->capture_default_str();
}

void add_out(CLI::App* sub, Options& o, const std::string& what) {
    sub->add_option("-o,--out", o.out, what + " (default standard output)");
}

void add_pipeline(CLI::App* sub, Options& o) {
    sub->add_option("--templates", o.templates, "sample CSV whose per-label means become templates")
        ->check(CLI::ExistingFile);
    sub->add_option("--model", o.model, "predictor JSON; enables occlusion infill")->check(CLI::ExistingFile);
    sub->add_flag("--no-normalize", o.no_normalize, "skip symbol-guided normalization");
    sub->add_option("--strategy", o.strategy, "joint, coordinate or angle")
        ->check(CLI::IsMember({"joint", "coordinate", "angle"}))
        ->capture_default_str();
    sub->add_option("--frames", o.frames, "frames per gesture (M)")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_run(CLI::App* sub, Options& o) {
    add_pipeline(sub, o);
    add_seed(sub, o);
    add_out(sub, o, "sweep CSV");
    sub->add_option("--gesture", o.gestures, "gestures to sweep, or all")->check(gesture_name());
    sub->add_option("--trials", o.run.trials, "trials per gesture and condition")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--vector-noise", o.run.vector_noise, "uniform noise on vector deltas")->capture_default_str();
    sub->add_option("--angle-noise", o.run.angle_noise, "uniform noise on angle deltas (degrees)")
        ->capture_default_str();
    sub->add_option("--jitter", o.run.jitter, "positional jitter of each recording")->capture_default_str();
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("GESTURE_FORGE_SEED");
    if (!v) return std::nullopt;
    std::uint64_t seed = 0;
    const std::string_view s(v);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
        throw UsageError("GESTURE_FORGE_SEED is not an unsigned integer: '" + std::string(s) + "'");
    return seed;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic gesture data, GAN and GRU training, recognition and sweeps", "gesture_forge"};
    app.require_subcommand(1);
    Options o;

    auto* synth = app.add_subcommand("synth", "emit a synthetic sample CSV");
    synth->add_option("--gesture", o.gestures, "gestures to synthesize, or all")->check(gesture_name());
    synth->add_option("--n", o.n, "samples per gesture")->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--jitter", o.jitter, "per-coordinate positional jitter")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->add_option("--frames", o.frames, "frames per sample (M)")->check(CLI::PositiveNumber)->capture_default_str();
    add_seed(synth, o);
    add_out(synth, o, "sample CSV");

    auto* gan_train_cmd = app.add_subcommand("gan-train", "train a GAN on seed samples");
    gan_train_cmd->add_option("--seeds", o.seeds, "seed sample CSV")->required()->check(CLI::ExistingFile);
    gan_train_cmd->add_option("--mode", o.mode, "vector or angle")->check(kModeName)->capture_default_str();
    gan_train_cmd->add_option("--noise", o.noise, "perturbation amplitude (default 1 vector, 5 angle)")
        ->check(CLI::PositiveNumber);
    gan_train_cmd->add_option("--epochs", o.gan.epochs)->check(CLI::PositiveNumber)->capture_default_str();
    gan_train_cmd->add_option("--lr", o.gan.lr)->check(CLI::PositiveNumber)->capture_default_str();
    gan_train_cmd->add_option("--batch", o.gan.batch)->check(CLI::PositiveNumber)->capture_default_str();
    gan_train_cmd->add_option("--hidden", o.gan.hidden)->check(CLI::PositiveNumber)->capture_default_str();
    add_seed(gan_train_cmd, o);
    add_out(gan_train_cmd, o, "model JSON");

    auto* gan_gen = app.add_subcommand("gan-gen", "generate samples from a trained GAN");
    gan_gen->add_option("--model", o.model, "GAN JSON")->required()->check(CLI::ExistingFile);
    gan_gen->add_option("--seeds", o.seeds, "seed sample CSV")->required()->check(CLI::ExistingFile);
    gan_gen->add_option("--n", o.run.gan_samples, "samples to generate")->check(CLI::PositiveNumber)->capture_default_str();
    gan_gen->add_option("--noise", o.noise, "perturbation amplitude (default per mode)")->check(CLI::NonNegativeNumber);
    add_seed(gan_gen, o);
    add_out(gan_gen, o, "sample CSV");

    auto* validate = app.add_subcommand("validate", "nearest-centre relabelling of a sample CSV");
    validate->add_option("--in", o.in, "sample CSV")->required()->check(CLI::ExistingFile);
    validate->add_option("--mode", o.mode, "channels compared: vector or angle")->check(kModeName)->capture_default_str();
    validate->add_option("-o,--out", o.out, "relabelled sample CSV (the JSON report always goes to standard output)");

    auto* gru = app.add_subcommand("gru-train", "train the occlusion infill predictor");
    gru->add_option("--in", o.in, "training sample CSV")->required()->check(CLI::ExistingFile);
    gru->add_option("--epochs", o.gru.epochs)->check(CLI::PositiveNumber)->capture_default_str();
    gru->add_option("--lr", o.gru.lr)->check(CLI::PositiveNumber)->capture_default_str();
    gru->add_option("--hidden", o.gru.hidden)->check(CLI::PositiveNumber)->capture_default_str();
    gru->add_option("--batch", o.gru.batch)->check(CLI::PositiveNumber)->capture_default_str();
    add_seed(gru, o);
    add_out(gru, o, "model JSON");

    auto* encode = app.add_subcommand("encode-depth", "encode a sequence of PGM depth frames as a frame CSV");
    encode->add_option("pgm", o.pgm, "PGM frames in time order")->required()->expected(2, -1)->check(CLI::ExistingFile);
    encode->add_option("--elbow", o.elbow, "elbow pixel position x y")->required()->expected(2);
    encode->add_option("--threshold", o.threshold, "largest depth counted as a prospect region")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    encode->add_option("--pose", o.pose, "gesture whose pose seeds the skeleton")
        ->check(gesture_name())
        ->capture_default_str();
    encode->add_option("--label", o.label, "label written to the CSV")->capture_default_str();
    encode->add_option("--frames", o.frames, "frames per gesture (M), sets the skeleton phase")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_out(encode, o, "frame CSV");

    auto* occlude = app.add_subcommand("occlude", "zero keypoint confidences in k random frames per sample");
    occlude->add_option("--in", o.in, "sample or frame CSV")->required()->check(CLI::ExistingFile);
    occlude->add_option("--k", o.k, "occluded frames per sample")->required()->check(CLI::NonNegativeNumber);
    occlude->add_option("--keypoints", o.keypoints, "affected keypoints such as B0 C1 (default all)");
    add_seed(occlude, o);
    add_out(occlude, o, "sample CSV");

    auto* recognize_cmd = app.add_subcommand("recognize", "recognize the gesture in a frame CSV stream");
    recognize_cmd->add_option("--in", o.in, "frame CSV; rows of all samples form one stream")
        ->required()
        ->check(CLI::ExistingFile);
    add_pipeline(recognize_cmd, o);
    add_out(recognize_cmd, o, "MatchResult JSON");

    auto* sweep_frames_cmd = app.add_subcommand("sweep-frames", "accuracy over actual frame counts");
    add_run(sweep_frames_cmd, o);
    sweep_frames_cmd->add_option("--frames-min", o.run.frames_min)->capture_default_str();
    sweep_frames_cmd->add_option("--frames-max", o.run.frames_max)->capture_default_str();

    auto* sweep_occ = app.add_subcommand("sweep-occlusion", "accuracy over fully occluded frame counts");
    add_run(sweep_occ, o);
    sweep_occ->add_option("--max-occlusion", o.max_occlusion, "largest occluded-frame count")
        ->check(CLI::Range(0, kMaxOccludedFrames))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const auto used = app.get_subcommands();
        err << "error: " << e.what() << "\n\n" << (used.empty() ? app.help() : used.front()->help());
        return kExitUsage;
    }

    try {
        if (const auto s = env_seed()) o.seed = *s;
        if (synth->parsed()) {
            run_synth(o, out);
        } else if (gan_train_cmd->parsed()) {
            run_gan_train(o, out, err);
        } else if (gan_gen->parsed()) {
            o.n = o.run.gan_samples;
            run_gan_gen(o, out);
        } else if (validate->parsed()) {
            run_validate(o, out);
        } else if (gru->parsed()) {
            run_gru_train(o, out, err);
        } else if (encode->parsed()) {
            run_encode_depth(o, out);
        } else if (occlude->parsed()) {
            run_occlude(o, out);
        } else if (recognize_cmd->parsed()) {
            run_recognize(o, out);
        } else if (sweep_frames_cmd->parsed()) {
            run_sweep(o, out, false);
        } else if (sweep_occ->parsed()) {
            run_sweep(o, out, true);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace gesture_forge
