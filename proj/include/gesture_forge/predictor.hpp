#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gesture_forge/datagen.hpp"
#include "gesture_forge/hand_model.hpp"

namespace gesture_forge {

class Rng;

/// Scalar-input GRU without gate biases. Each gate matrix is H x (H + 1)
/// acting on [h_prev, x]; the candidate gate sees [r * h_prev, x].
struct GruCell {
    Eigen::MatrixXd wz, wr, wh;
    Eigen::VectorXd w_out;
    double b_out = 0.0;

    int hidden() const { return static_cast<int>(wz.rows()); }

    static GruCell zeros(int hidden);
    /// Uniform in +-1/sqrt(H + 1); the output head starts at zero.
    static GruCell random(int hidden, Rng& rng);
};

struct GruStep {
    Eigen::VectorXd h;
    double y = 0.0;
};

GruStep gru_step(const GruCell& cell, const Eigen::VectorXd& h_prev, double x);

struct GruGradients {
    Eigen::MatrixXd wz, wr, wh;
    Eigen::VectorXd w_out;
    double b_out = 0.0;

    static GruGradients zeros(int hidden);
};

/// Runs the cell from h = 0 over `inputs`, predicting `targets[t]` from the
/// state after inputs[0..t]; loss is the mean squared error over all steps.
/// Gradients are exact (backpropagation through time, no truncation).
double gru_sequence_loss(const GruCell& cell, std::span<const double> inputs, std::span<const double> targets);
double gru_sequence_gradients(const GruCell& cell, std::span<const double> inputs, std::span<const double> targets,
                              GruGradients& grad);

/// Fusion weights inside a keypoint class: 0.5 for the target itself, the
/// other 0.5 shared evenly by the remaining members, 1.0 for a lone member,
/// 0 across classes.
struct InfluenceFactors {
    static double beta(KeypointClass cls, int target, int source);

    /// (source channel, beta) pairs feeding `channel`. Vector channels fuse the
    /// same axis across the keypoint's class; angle channels fuse the angles of
    /// the same finger.
    static std::vector<std::pair<int, double>> sources(int channel);
};

/// Affine map that lets a logistic output cover a channel's data range.
struct FusionScale {
    double center = 0.0;
    double half_range = 1.0;
};

/// sigma(w0 * sum_i beta_i * y_i) over the target's class; `predictions`
/// holds one value per channel and NaN marks a missing source (MissingSource).
double class_fuse_raw(std::span<const double> predictions, int channel, double w0);

/// The same squashing centred on the channel's range:
/// center + half_range * (2 sigma(w0 * (s - center) / half_range) - 1),
/// where s is the beta-weighted sum. w0 = 2 is the identity near the centre.
double class_fuse(std::span<const double> predictions, int channel, double w0, const FusionScale& scale);

struct ChannelModel {
    GruCell cell;
    double offset = 0.0;  // inputs and targets are (v - offset) / scale
    double scale = 1.0;
    FusionScale fusion;
};

struct PredictorModel {
    std::vector<ChannelModel> channels;  // kChannels entries
    std::array<double, 6> w0{2, 2, 2, 2, 2, 2};  // per keypoint class

    int hidden() const { return channels.empty() ? 0 : channels.front().cell.hidden(); }
};

/// Class whose fusion weight applies to a channel.
KeypointClass channel_class(int channel);

struct PredictorConfig {
    double lr = 0.01;
    int epochs = 10;
    int hidden = 16;
    int batch = 16;
    std::uint64_t rng_seed = 1;
};

/// Next-step regression per channel with Adam; deterministic per seed.
/// Throws Divergence on a non-finite loss.
PredictorModel train_predictor(const SampleSet& data, const PredictorConfig& config);

/// Mean one-step-ahead squared error of one channel's model in data units.
double channel_mse(const PredictorModel& model, int channel, const SampleSet& data);

/// Streaming occlusion infill. Keeps one hidden state per channel; each
/// pushed frame has its unobserved channels replaced by the fused model
/// prediction before the states advance.
class Infiller {
public:
    explicit Infiller(const PredictorModel& model);

    struct Output {
        DeltaFrame frame;
        KeypointConfidence confidence{};
        std::bitset<kChannels> infilled;
    };

    /// Keypoints with confidence 0 get their vector channels, and every
    /// angle touching them, predicted; their confidence becomes 0.5.
    /// Everything else passes through untouched.
    Output push(const DeltaFrame& frame, const KeypointConfidence& confidence);

    /// Per-channel model predictions for the next frame, in data units.
    const std::array<double, kChannels>& predictions() const { return predictions_; }

    void reset();

private:
    const PredictorModel* model_;
    std::vector<Eigen::VectorXd> hidden_;
    std::array<double, kChannels> predictions_{};
};

inline constexpr double kInfilledConfidence = 0.5;

struct InfilledSequence {
    std::vector<DeltaFrame> frames;
    std::vector<KeypointConfidence> confidence;
};

InfilledSequence infill_missing(const PredictorModel& model, std::span<const DeltaFrame> frames,
                                std::span<const KeypointConfidence> confidence);

}  // namespace gesture_forge
