#include "gesture_forge/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gesture_forge/error.hpp"
#include "gesture_forge/rng.hpp"

namespace gesture_forge {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) {
    return v.unaryExpr([](double e) { return sigmoid(e); });
}

Eigen::VectorXd concat(const Eigen::VectorXd& h, double x) {
    Eigen::VectorXd a(h.size() + 1);
    a.head(h.size()) = h;
    a[h.size()] = x;
    return a;
}

}  // namespace

GruCell GruCell::zeros(int hidden) {
    require(hidden >= 1, ErrorKind::InvalidArgument, "hidden size must be >= 1");
    GruCell c;
    c.wz = c.wr = c.wh = Eigen::MatrixXd::Zero(hidden, hidden + 1);
    c.w_out = Eigen::VectorXd::Zero(hidden);
    return c;
}

GruCell GruCell::random(int hidden, Rng& rng) {
    GruCell c = zeros(hidden);
    const double bound = 1.0 / std::sqrt(hidden + 1.0);
    for (Eigen::MatrixXd* w : {&c.wz, &c.wr, &c.wh})
        for (Eigen::Index i = 0; i < w->size(); ++i) w->data()[i] = rng.uniform(-bound, bound);
    return c;
}

GruStep gru_step(const GruCell& cell, const Eigen::VectorXd& h_prev, double x) {
    const Eigen::VectorXd a = concat(h_prev, x);
    const Eigen::VectorXd z = sigmoid(cell.wz * a);
    const Eigen::VectorXd r = sigmoid(cell.wr * a);
    const Eigen::VectorXd n = (cell.wh * concat(r.cwiseProduct(h_prev), x)).array().tanh().matrix();
    GruStep out;
    out.h = (1.0 - z.array()).matrix().cwiseProduct(h_prev) + z.cwiseProduct(n);
    out.y = cell.w_out.dot(out.h) + cell.b_out;
    return out;
}

GruGradients GruGradients::zeros(int hidden) {
    GruGradients g;
    g.wz = g.wr = g.wh = Eigen::MatrixXd::Zero(hidden, hidden + 1);
    g.w_out = Eigen::VectorXd::Zero(hidden);
    return g;
}

double gru_sequence_loss(const GruCell& cell, std::span<const double> inputs, std::span<const double> targets) {
    require(inputs.size() == targets.size() && !inputs.empty(), ErrorKind::InvalidArgument,
            "inputs and targets must be non-empty and equally long");
    Eigen::VectorXd h = Eigen::VectorXd::Zero(cell.hidden());
    double loss = 0.0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        GruStep s = gru_step(cell, h, inputs[t]);
        loss += (s.y - targets[t]) * (s.y - targets[t]);
        h = std::move(s.h);
    }
    return loss / static_cast<double>(inputs.size());
}

double gru_sequence_gradients(const GruCell& cell, std::span<const double> inputs, std::span<const double> targets,
                              GruGradients& grad) {
    require(inputs.size() == targets.size() && !inputs.empty(), ErrorKind::InvalidArgument,
            "inputs and targets must be non-empty and equally long");
    const int hs = cell.hidden();
    const std::size_t steps = inputs.size();
    struct Tape {
        Eigen::VectorXd a, ar, z, r, n, h_prev, h;
        double y;
    };
    std::vector<Tape> tape(steps);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(hs);
    double loss = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        Tape& s = tape[t];
        s.h_prev = h;
        s.a = concat(h, inputs[t]);
        s.z = sigmoid(cell.wz * s.a);
        s.r = sigmoid(cell.wr * s.a);
        s.ar = concat(s.r.cwiseProduct(h), inputs[t]);
        s.n = (cell.wh * s.ar).array().tanh().matrix();
        s.h = (1.0 - s.z.array()).matrix().cwiseProduct(h) + s.z.cwiseProduct(s.n);
        s.y = cell.w_out.dot(s.h) + cell.b_out;
        loss += (s.y - targets[t]) * (s.y - targets[t]);
        h = s.h;
    }
    const double inv = 1.0 / static_cast<double>(steps);

    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(hs);
    for (std::size_t t = steps; t-- > 0;) {
        const Tape& s = tape[t];
        const double dy = 2.0 * (s.y - targets[t]) * inv;
        grad.w_out += dy * s.h;
        grad.b_out += dy;
        const Eigen::VectorXd dh = dh_next + dy * cell.w_out;

        const Eigen::VectorXd dz = dh.cwiseProduct(s.n - s.h_prev);
        const Eigen::VectorXd dn = dh.cwiseProduct(s.z);
        Eigen::VectorXd dh_prev = dh.cwiseProduct((1.0 - s.z.array()).matrix());

        const Eigen::VectorXd dn_pre = dn.cwiseProduct((1.0 - s.n.array().square()).matrix());
        grad.wh += dn_pre * s.ar.transpose();
        const Eigen::VectorXd dar = cell.wh.transpose() * dn_pre;
        const Eigen::VectorXd drh = dar.head(hs);
        const Eigen::VectorXd dr = drh.cwiseProduct(s.h_prev);
        dh_prev += drh.cwiseProduct(s.r);

        const Eigen::VectorXd dz_pre = dz.cwiseProduct(s.z.cwiseProduct((1.0 - s.z.array()).matrix()));
        const Eigen::VectorXd dr_pre = dr.cwiseProduct(s.r.cwiseProduct((1.0 - s.r.array()).matrix()));
        grad.wz += dz_pre * s.a.transpose();
        grad.wr += dr_pre * s.a.transpose();
        const Eigen::VectorXd da = cell.wz.transpose() * dz_pre + cell.wr.transpose() * dr_pre;
        dh_prev += da.head(hs);
        dh_next = std::move(dh_prev);
    }
    return loss * inv;
}

double InfluenceFactors::beta(KeypointClass cls, int target, int source) {
    const int n = class_size(cls);
    require(KeypointId::valid(cls, target) && KeypointId::valid(cls, source), ErrorKind::InvalidArgument,
            "keypoint index outside its class");
    if (n == 1) return 1.0;
    return source == target ? 0.5 : 0.5 / (n - 1);
}

namespace {

// Angle indices owned by each finger, in channel order.
std::vector<int> finger_angles(KeypointClass cls) {
    std::vector<int> out;
    for (int i = 0; i < kAngleChannels; ++i)
        if (angle_class(i) == cls) out.push_back(i);
    return out;
}

}  // namespace

std::vector<std::pair<int, double>> InfluenceFactors::sources(int channel) {
    require(channel >= 0 && channel < kChannels, ErrorKind::InvalidArgument, "channel out of range");
    std::vector<std::pair<int, double>> out;
    if (is_angle_channel(channel)) {
        const int angle = channel - kVectorChannels;
        const std::vector<int> members = finger_angles(angle_class(angle));
        const int n = static_cast<int>(members.size());
        for (int m : members)
            out.emplace_back(angle_channel(m), n == 1 ? 1.0 : (m == angle ? 0.5 : 0.5 / (n - 1)));
        return out;
    }
    const int keypoint = channel / 3;
    const int axis = channel % 3;
    const KeypointId target = KeypointId::from_flat(keypoint);
    for (int i = 0; i < class_size(target.cls); ++i) {
        const KeypointId src{target.cls, i};
        out.emplace_back(vector_channel(src.flat(), axis), beta(target.cls, target.index, i));
    }
    return out;
}

KeypointClass channel_class(int channel) {
    if (is_angle_channel(channel)) return angle_class(channel - kVectorChannels);
    return KeypointId::from_flat(channel / 3).cls;
}

namespace {

double fused_sum(std::span<const double> predictions, int channel) {
    require(predictions.size() == static_cast<std::size_t>(kChannels), ErrorKind::InvalidArgument,
            "need one prediction per channel");
    double s = 0.0;
    for (const auto& [src, beta] : InfluenceFactors::sources(channel)) {
        require(!std::isnan(predictions[src]), ErrorKind::MissingSource,
                "no prediction for source channel " + std::to_string(src));
        s += beta * predictions[src];
    }
    return s;
}

}  // namespace

double class_fuse_raw(std::span<const double> predictions, int channel, double w0) {
    return sigmoid(w0 * fused_sum(predictions, channel));
}

double class_fuse(std::span<const double> predictions, int channel, double w0, const FusionScale& scale) {
    const double s = fused_sum(predictions, channel);
    if (!(scale.half_range > 0.0)) return scale.center;
    return scale.center + scale.half_range * (2.0 * sigmoid(w0 * (s - scale.center) / scale.half_range) - 1.0);
}

namespace {

struct Adam {
    explicit Adam(const GruCell& like) : m(GruGradients::zeros(like.hidden())), v(GruGradients::zeros(like.hidden())) {}

    void step(GruCell& cell, const GruGradients& g, double lr) {
        ++t;
        const double c1 = 1.0 - std::pow(kB1, t);
        const double c2 = 1.0 - std::pow(kB2, t);
        auto update = [&](auto& param, auto& mm, auto& vv, const auto& grad) {
            mm = kB1 * mm + (1.0 - kB1) * grad;
            vv = kB2 * vv + (1.0 - kB2) * grad.cwiseProduct(grad);
            param.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + kEps);
        };
        update(cell.wz, m.wz, v.wz, g.wz);
        update(cell.wr, m.wr, v.wr, g.wr);
        update(cell.wh, m.wh, v.wh, g.wh);
        update(cell.w_out, m.w_out, v.w_out, g.w_out);
        m.b_out = kB1 * m.b_out + (1.0 - kB1) * g.b_out;
        v.b_out = kB2 * v.b_out + (1.0 - kB2) * g.b_out * g.b_out;
        cell.b_out -= lr * (m.b_out / c1) / (std::sqrt(v.b_out / c2) + kEps);
    }

    static constexpr double kB1 = 0.9, kB2 = 0.999, kEps = 1e-8;
    GruGradients m, v;
    int t = 0;
};

void scale_gradients(GruGradients& g, double s) {
    g.wz *= s;
    g.wr *= s;
    g.wh *= s;
    g.w_out *= s;
    g.b_out *= s;
}

// Normalized per-sample series of one channel.
std::vector<std::vector<double>> channel_series(const SampleSet& data, int channel, const ChannelModel& cm) {
    std::vector<std::vector<double>> out;
    out.reserve(data.samples.size());
    for (const Sample& s : data.samples) {
        std::vector<double> xs(s.frames.size());
        for (std::size_t t = 0; t < xs.size(); ++t) xs[t] = (s.frames[t].values[channel] - cm.offset) / cm.scale;
        out.push_back(std::move(xs));
    }
    return out;
}

void fit_channel(ChannelModel& cm, const SampleSet& data, int channel, const PredictorConfig& config) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const Sample& s : data.samples)
        for (const DeltaFrame& f : s.frames) {
            const double v = f.values[channel];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
            sq += v * v;
            ++n;
        }
    cm.offset = sum / n;
    const double var = std::max(0.0, sq / n - cm.offset * cm.offset);
    cm.scale = var > 1e-12 ? std::sqrt(var) : 1.0;
    cm.fusion = {0.5 * (lo + hi), 0.625 * (hi - lo)};

    Rng rng(derive_seed(config.rng_seed, static_cast<std::uint64_t>(channel)));
    cm.cell = GruCell::random(config.hidden, rng);
    const auto series = channel_series(data, channel, cm);
    std::vector<std::size_t> order(series.size());
    std::iota(order.begin(), order.end(), 0);
    Adam adam(cm.cell);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
        for (std::size_t b = 0; b < order.size(); b += config.batch) {
            const std::size_t e = std::min(order.size(), b + config.batch);
            GruGradients g = GruGradients::zeros(config.hidden);
            double loss = 0.0;
            for (std::size_t i = b; i < e; ++i) {
                const auto& xs = series[order[i]];
                if (xs.size() < 2) continue;
                const std::span<const double> all(xs);
                loss += gru_sequence_gradients(cm.cell, all.first(xs.size() - 1), all.subspan(1), g);
            }
            require(std::isfinite(loss), ErrorKind::Divergence,
                    "non-finite loss on channel " + std::to_string(channel) + " in epoch " + std::to_string(epoch));
            scale_gradients(g, 1.0 / static_cast<double>(e - b));
            adam.step(cm.cell, g, config.lr);
        }
    }
}

// Teacher-forced one-step predictions for every channel, in data units;
// entry [sample][t] predicts frame t from frames before it.
std::vector<std::vector<std::array<double, kChannels>>> teacher_forced(const PredictorModel& model,
                                                                       const SampleSet& data) {
    std::vector<std::vector<std::array<double, kChannels>>> out;
    for (const Sample& s : data.samples) {
        Infiller inf(model);
        std::vector<std::array<double, kChannels>> preds;
        for (std::size_t t = 0; t < s.frames.size(); ++t) {
            preds.push_back(inf.predictions());
            inf.push(s.frames[t], full_confidence());
        }
        out.push_back(std::move(preds));
    }
    return out;
}

}  // namespace

PredictorModel train_predictor(const SampleSet& data, const PredictorConfig& config) {
    require(!data.samples.empty(), ErrorKind::InvalidArgument, "training data is empty");
    require(config.epochs >= 1 && config.lr > 0.0 && config.hidden >= 1 && config.batch >= 1,
            ErrorKind::InvalidArgument, "epochs, lr, hidden and batch must be positive");
    PredictorModel model;
    model.channels.resize(kChannels);
    for (int c = 0; c < kChannels; ++c) fit_channel(model.channels[c], data, c, config);

    // Fusion weight per class: the grid value with the lowest fused one-step error.
    const auto preds = teacher_forced(model, data);
    constexpr std::array<double, 7> kGrid{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0};
    for (int cls = 0; cls < 5; ++cls) {
        double best = std::numeric_limits<double>::infinity();
        for (double w0 : kGrid) {
            double err = 0.0;
            for (std::size_t i = 0; i < data.samples.size(); ++i)
                for (std::size_t t = 0; t < data.samples[i].frames.size(); ++t)
                    for (int c = 0; c < kChannels; ++c) {
                        if (static_cast<int>(channel_class(c)) != cls) continue;
                        const double y = class_fuse(preds[i][t], c, w0, model.channels[c].fusion);
                        const double d = y - data.samples[i].frames[t].values[c];
                        err += d * d;
                    }
            if (err < best) {
                best = err;
                model.w0[cls] = w0;
            }
        }
    }
    return model;
}

double channel_mse(const PredictorModel& model, int channel, const SampleSet& data) {
    require(channel >= 0 && channel < static_cast<int>(model.channels.size()), ErrorKind::InvalidArgument,
            "channel out of range");
    const ChannelModel& cm = model.channels[channel];
    double err = 0.0;
    std::size_t n = 0;
    for (const Sample& s : data.samples) {
        Eigen::VectorXd h = Eigen::VectorXd::Zero(cm.cell.hidden());
        for (std::size_t t = 0; t + 1 < s.frames.size(); ++t) {
            GruStep step = gru_step(cm.cell, h, (s.frames[t].values[channel] - cm.offset) / cm.scale);
            const double d = cm.offset + cm.scale * step.y - s.frames[t + 1].values[channel];
            err += d * d;
            ++n;
            h = std::move(step.h);
        }
    }
    return n ? err / n : 0.0;
}

Infiller::Infiller(const PredictorModel& model) : model_(&model) {
    require(model.channels.size() == static_cast<std::size_t>(kChannels), ErrorKind::InvalidArgument,
            "predictor needs one model per channel");
    reset();
}

void Infiller::reset() {
    hidden_.assign(kChannels, Eigen::VectorXd::Zero(model_->hidden()));
    for (int c = 0; c < kChannels; ++c) predictions_[c] = model_->channels[c].offset + model_->channels[c].scale * model_->channels[c].cell.b_out;
}

Infiller::Output Infiller::push(const DeltaFrame& frame, const KeypointConfidence& confidence) {
    Output out{frame, confidence, {}};
    std::bitset<kKeypointCount> missing;
    for (int k = 0; k < kKeypointCount; ++k) missing[k] = confidence[k] == 0.0;
    if (missing.any()) {
        for (int k = 0; k < kVectorKeypoints; ++k)
            if (missing[k])
                for (int a = 0; a < 3; ++a) out.infilled.set(vector_channel(k, a));
        const auto& triples = angle_triples();
        for (int i = 0; i < kAngleChannels; ++i) {
            const AngleTriple& tr = triples[i];
            if (missing[tr.a.flat()] || missing[tr.b.flat()] || missing[tr.c.flat()]) out.infilled.set(angle_channel(i));
        }
        for (int c = 0; c < kChannels; ++c) {
            if (!out.infilled[c]) continue;
            const ChannelModel& cm = model_->channels[c];
            out.frame.values[c] = class_fuse(predictions_, c, model_->w0[static_cast<int>(channel_class(c))], cm.fusion);
        }
        for (int k = 0; k < kKeypointCount; ++k)
            if (missing[k]) out.confidence[k] = kInfilledConfidence;
    }
    for (int c = 0; c < kChannels; ++c) {
        const ChannelModel& cm = model_->channels[c];
        GruStep step = gru_step(cm.cell, hidden_[c], (out.frame.values[c] - cm.offset) / cm.scale);
        hidden_[c] = std::move(step.h);
        predictions_[c] = cm.offset + cm.scale * step.y;
    }
    return out;
}

InfilledSequence infill_missing(const PredictorModel& model, std::span<const DeltaFrame> frames,
                                std::span<const KeypointConfidence> confidence) {
    require(frames.size() == confidence.size(), ErrorKind::InvalidArgument, "one confidence set per frame");
    Infiller inf(model);
    InfilledSequence out;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        Infiller::Output o = inf.push(frames[t], confidence[t]);
        out.frames.push_back(o.frame);
        out.confidence.push_back(o.confidence);
    }
    return out;
}

}  // namespace gesture_forge
