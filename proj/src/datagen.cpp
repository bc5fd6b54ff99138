#include "gesture_forge/datagen.hpp"

#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gesture_forge/error.hpp"
#include "gesture_forge/rng.hpp"

namespace gesture_forge {

const char* to_string(DataMode mode) { return mode == DataMode::Vector ? "vector" : "angle"; }

DataMode parse_data_mode(std::string_view text) {
    if (text == "vector") return DataMode::Vector;
    if (text == "angle") return DataMode::Angle;
    throw Error(ErrorKind::InvalidArgument, "mode must be 'vector' or 'angle', got '" + std::string(text) + "'");
}

ChannelRange mode_channels(DataMode mode) {
    return mode == DataMode::Vector ? ChannelRange{0, kVectorChannels} : ChannelRange{kVectorChannels, kAngleChannels};
}

void SampleSet::check(int frames) const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        gesture_index(s.label);
        require(static_cast<int>(s.frames.size()) == frames && s.confidence.size() == s.frames.size(),
                ErrorKind::InvalidArgument,
                "sample " + std::to_string(i) + " has " + std::to_string(s.frames.size()) + " frames, expected " +
                    std::to_string(frames));
    }
}

SampleSet synth_sample_set(std::span<const std::string> labels, int per_label, std::uint64_t seed,
                           NoiseSpec jitter, int frames) {
    require(per_label >= 1, ErrorKind::InvalidArgument, "need at least one sample per label");
    SampleSet set;
    for (const std::string& label : labels) {
        for (int i = 0; i < per_label; ++i) {
            Sample s;
            s.label = label;
            s.frames = synth_deltas(label, derive_seed(seed, static_cast<std::uint64_t>(i)), jitter, frames);
            s.confidence.assign(s.frames.size(), full_confidence());
            set.samples.push_back(std::move(s));
        }
    }
    return set;
}

std::vector<DeltaFrame> perturb(std::span<const DeltaFrame> frames, NoiseSpec spec, std::uint64_t seed,
                                ChannelRange channels) {
    require(spec.amplitude >= 0.0, ErrorKind::InvalidArgument, "noise amplitude must be >= 0");
    require(channels.first >= 0 && channels.end() <= kChannels, ErrorKind::InvalidArgument, "bad channel range");
    Rng rng(seed);
    std::vector<DeltaFrame> out(frames.begin(), frames.end());
    for (DeltaFrame& f : out)
        for (int c = channels.first; c < channels.end(); ++c) f.values[c] += rng.uniform(-spec.amplitude, spec.amplitude);
    return out;
}

std::vector<std::string> sample_csv_header() {
    std::vector<std::string> cols{"label", "sample_id", "frame_idx"};
    static constexpr char kAxes[] = "xyz";
    for (int k = 0; k < kVectorKeypoints; ++k)
        for (int a = 0; a < 3; ++a) cols.push_back("d" + KeypointId::from_flat(k).name() + "_" + kAxes[a]);
    for (int i = 0; i < kAngleChannels; ++i) cols.push_back("dangle" + std::to_string(i));
    for (int k = 0; k < kKeypointCount; ++k) cols.push_back("conf_" + KeypointId::from_flat(k).name());
    return cols;
}

namespace {

void put_double(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

double parse_double(std::string_view field, int line) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    require(res.ec == std::errc() && res.ptr == field.data() + field.size(), ErrorKind::ParseError,
            "line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

void write_sample_csv(std::ostream& out, const SampleSet& set) {
    const auto header = sample_csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (std::size_t id = 0; id < set.samples.size(); ++id) {
        const Sample& s = set.samples[id];
        for (std::size_t t = 0; t < s.frames.size(); ++t) {
            out << s.label << ',' << id << ',' << t;
            for (double v : s.frames[t].values) {
                out << ',';
                put_double(out, v);
            }
            for (double c : s.confidence[t]) {
                out << ',';
                put_double(out, c);
            }
            out << '\n';
        }
    }
}

SampleSet read_sample_csv(std::istream& in, DataMode mode) {
    constexpr std::size_t kColumns = 3 + kChannels + kKeypointCount;
    SampleSet set;
    set.mode = mode;
    std::string line;
    int line_no = 0;
    long current_id = std::numeric_limits<long>::min();
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (line_no == 1 && line.rfind("label,", 0) == 0)) continue;
        const auto fields = split_commas(line);
        require(fields.size() == kColumns, ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": expected " + std::to_string(kColumns) + " columns, got " +
                    std::to_string(fields.size()));
        const long id = static_cast<long>(parse_double(fields[1], line_no));
        const long frame_idx = static_cast<long>(parse_double(fields[2], line_no));
        if (id != current_id) {
            set.samples.push_back(Sample{std::string(fields[0]), {}, {}});
            current_id = id;
        }
        Sample& s = set.samples.back();
        require(s.label == fields[0], ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": label changes within sample " + std::to_string(id));
        require(frame_idx == static_cast<long>(s.frames.size()), ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": frames out of order");
        DeltaFrame f;
        for (int c = 0; c < kChannels; ++c) f.values[c] = parse_double(fields[3 + c], line_no);
        KeypointConfidence conf;
        for (int k = 0; k < kKeypointCount; ++k) {
            conf[k] = parse_double(fields[3 + kChannels + k], line_no);
            require(conf[k] >= 0.0 && conf[k] <= 1.0, ErrorKind::ParseError,
                    "line " + std::to_string(line_no) + ": confidence outside [0, 1]");
        }
        s.frames.push_back(f);
        s.confidence.push_back(conf);
    }
    return set;
}

std::vector<std::pair<std::string, std::vector<DeltaFrame>>> label_means(const SampleSet& set) {
    std::vector<std::pair<std::string, std::vector<DeltaFrame>>> out;
    for (std::string_view name : gesture_names()) {
        std::vector<DeltaFrame> sum;
        int n = 0;
        for (const Sample& s : set.samples) {
            if (s.label != name) continue;
            if (sum.empty()) sum.resize(s.frames.size());
            require(s.frames.size() == sum.size(), ErrorKind::InvalidArgument, "samples of one label differ in length");
            for (std::size_t t = 0; t < sum.size(); ++t)
                for (int c = 0; c < kChannels; ++c) sum[t].values[c] += s.frames[t].values[c];
            ++n;
        }
        if (n == 0) continue;
        for (DeltaFrame& f : sum)
            for (double& v : f.values) v /= n;
        out.emplace_back(std::string(name), std::move(sum));
    }
    return out;
}

ValidationResult validate_dataset(const SampleSet& data) {
    const ChannelRange range = mode_channels(data.mode);
    require(!data.samples.empty(), ErrorKind::EmptyClass, "dataset is empty");
    const std::size_t frames = data.samples.front().frames.size();
    const std::size_t dim = frames * range.count;
    for (const Sample& s : data.samples)
        require(s.frames.size() == frames, ErrorKind::InvalidArgument, "samples differ in length");

    auto flatten = [&](const Sample& s) {
        Eigen::VectorXd v(dim);
        for (std::size_t t = 0; t < frames; ++t)
            for (int c = 0; c < range.count; ++c) v[t * range.count + c] = s.frames[t].values[range.first + c];
        return v;
    };

    std::vector<int> labels(data.samples.size());
    std::array<int, kGestureCount> counts{};
    std::array<Eigen::VectorXd, kGestureCount> centers;
    for (auto& c : centers) c = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        labels[i] = gesture_index(data.samples[i].label);
        centers[labels[i]] += flatten(data.samples[i]);
        ++counts[labels[i]];
    }
    for (int g = 0; g < kGestureCount; ++g) {
        require(counts[g] > 0, ErrorKind::EmptyClass,
                "gesture '" + std::string(gesture_names()[g]) + "' has no samples");
        centers[g] /= counts[g];
    }

    ValidationResult result{data, {}};
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        const Eigen::VectorXd x = flatten(data.samples[i]);
        int nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int g = 0; g < kGestureCount; ++g) {
            const double d = (x - centers[g]).squaredNorm();
            if (d < best) {
                best = d;
                nearest = g;
            }
        }
        const int from = labels[i];
        if (nearest == from) continue;
        // A class losing its last member keeps its centre; it has nothing left to average.
        if (counts[from] > 1) centers[from] = (centers[from] * counts[from] - x) / (counts[from] - 1);
        --counts[from];
        centers[nearest] = (centers[nearest] * counts[nearest] + x) / (counts[nearest] + 1);
        ++counts[nearest];
        labels[i] = nearest;
        result.data.samples[i].label = std::string(gesture_names()[nearest]);
        result.report.relabels.push_back({i, std::string(gesture_names()[from]), result.data.samples[i].label});
        ++result.report.moved_out[from];
        ++result.report.moved_in[nearest];
    }
    return result;
}

}  // namespace gesture_forge
