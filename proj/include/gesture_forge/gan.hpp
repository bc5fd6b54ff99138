#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gesture_forge/datagen.hpp"

namespace gesture_forge {

class Rng;

/// Frames x channels of one mode.
using Sequence = Eigen::MatrixXd;

/// Elman recurrence over the perturbed input, with a residual output head:
///   h_t = tanh(W_xh x_t + W_hh h_{t-1} + b_h),  x_t = lambda_t / s
///   y_t = lambda_t + s (W_out h_t + b_out)
/// where s is the noise amplitude the model was built for.
struct Generator {
    Eigen::MatrixXd w_xh, w_hh, w_out;
    Eigen::VectorXd b_h, b_out;
};

/// One affine layer over the flattened (row-major) sequence scaled by 1/s,
/// followed by the logistic function.
struct Discriminator {
    Eigen::VectorXd w;
    double b = 0.0;
};

struct GanModel {
    int frames = 0;
    int dim = 0;
    int hidden = 0;
    double scale = 1.0;
    DataMode mode = DataMode::Vector;
    Generator generator;
    Discriminator discriminator;
};

inline constexpr double kDiscriminatorEpsilon = 1e-7;

/// Small random recurrent and discriminator weights; the generator's output
/// head starts at zero, so an untrained generator returns its input.
GanModel init_gan(int frames, int dim, int hidden, double scale, DataMode mode, Rng& rng);

Sequence generate(const GanModel& model, const Sequence& lambda);

/// D(x) clamped to [eps, 1 - eps].
double discriminate(const GanModel& model, const Sequence& x);

/// mean log D(real) + mean log(1 - D(fake)); the discriminator maximizes it.
double discriminator_loss(const GanModel& model, std::span<const Sequence> real, std::span<const Sequence> fake);

/// mean log(1 - D(G(lambda))); the generator minimizes it.
double generator_loss(const GanModel& model, std::span<const Sequence> lambdas);

struct DiscriminatorGradient {
    Eigen::VectorXd w;
    double b = 0.0;
};

/// Gradient of discriminator_loss. Where the clamp is active the gradient is 0.
DiscriminatorGradient discriminator_gradient(const GanModel& model, std::span<const Sequence> real,
                                             std::span<const Sequence> fake);

/// Gradient of generator_loss with respect to every generator weight,
/// backpropagated through time.
Generator generator_gradient(const GanModel& model, std::span<const Sequence> lambdas);

struct GanConfig {
    int epochs = 5;
    double lr = 1e-3;
    int batch = 8;
    int hidden = 32;
    std::uint64_t rng_seed = 1;
};

/// Per-epoch means of the two losses.
struct GanTrainLog {
    std::vector<double> discriminator_loss;
    std::vector<double> generator_loss;
};

/// Alternating SGD, one discriminator step then one generator step per
/// batch; the generator sees freshly perturbed seeds. Trains on the channels
/// of `seeds.mode`. Throws Divergence on a non-finite loss.
GanModel gan_train(const SampleSet& seeds, NoiseSpec spec, const GanConfig& config, GanTrainLog* log = nullptr);

/// n sequences, each generated from a uniformly drawn seed sample perturbed
/// with `spec`. Outputs are clamped per channel to the seeds' range widened
/// by the amplitude. Channels outside the model's mode are copied from the seed.
SampleSet gan_sample(const GanModel& model, const SampleSet& seeds, NoiseSpec spec, int n, std::uint64_t rng_seed);

/// The mode channels of one sample as a frames x dim matrix, and back.
Sequence to_sequence(const Sample& sample, DataMode mode);
void from_sequence(const Sequence& seq, DataMode mode, Sample& sample);

}  // namespace gesture_forge
