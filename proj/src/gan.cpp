#include "gesture_forge/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gesture_forge/error.hpp"
#include "gesture_forge/rng.hpp"

namespace gesture_forge {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double logit(const GanModel& m, const Sequence& x) {
    double s = m.discriminator.b;
    for (int t = 0; t < m.frames; ++t)
        for (int c = 0; c < m.dim; ++c) s += m.discriminator.w[t * m.dim + c] * x(t, c) / m.scale;
    return s;
}

// Derivative of the clamped output's log terms vanishes outside (eps, 1 - eps).
bool clamped(double d) { return d <= kDiscriminatorEpsilon || d >= 1.0 - kDiscriminatorEpsilon; }

void check_shape(const GanModel& m, const Sequence& x) {
    require(x.rows() == m.frames && x.cols() == m.dim, ErrorKind::InvalidArgument,
            "sequence is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + ", model expects " +
                std::to_string(m.frames) + "x" + std::to_string(m.dim));
}

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
}

struct Forward {
    std::vector<Eigen::VectorXd> h;  // h[t + 1] is the state after frame t; h[0] = 0
    Sequence y;
};

Forward run_generator(const GanModel& m, const Sequence& lambda) {
    check_shape(m, lambda);
    const Generator& g = m.generator;
    Forward f;
    f.h.assign(m.frames + 1, Eigen::VectorXd::Zero(m.hidden));
    f.y.resize(m.frames, m.dim);
    for (int t = 0; t < m.frames; ++t) {
        const Eigen::VectorXd x = lambda.row(t).transpose() / m.scale;
        f.h[t + 1] = (g.w_xh * x + g.w_hh * f.h[t] + g.b_h).array().tanh().matrix();
        f.y.row(t) = lambda.row(t) + (m.scale * (g.w_out * f.h[t + 1] + g.b_out)).transpose();
    }
    return f;
}

Generator zero_like(const GanModel& m) {
    Generator g;
    g.w_xh = Eigen::MatrixXd::Zero(m.hidden, m.dim);
    g.w_hh = Eigen::MatrixXd::Zero(m.hidden, m.hidden);
    g.w_out = Eigen::MatrixXd::Zero(m.dim, m.hidden);
    g.b_h = Eigen::VectorXd::Zero(m.hidden);
    g.b_out = Eigen::VectorXd::Zero(m.dim);
    return g;
}

}  // namespace

GanModel init_gan(int frames, int dim, int hidden, double scale, DataMode mode, Rng& rng) {
    require(frames >= 1 && dim >= 1 && hidden >= 1, ErrorKind::InvalidArgument, "GAN dimensions must be >= 1");
    require(scale > 0.0, ErrorKind::InvalidArgument, "GAN input scale must be > 0");
    GanModel m;
    m.frames = frames;
    m.dim = dim;
    m.hidden = hidden;
    m.scale = scale;
    m.mode = mode;
    m.generator = zero_like(m);
    fill_uniform(m.generator.w_xh, 1.0 / std::sqrt(static_cast<double>(dim)), rng);
    fill_uniform(m.generator.w_hh, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    Eigen::MatrixXd w(frames * dim, 1);
    fill_uniform(w, 0.1 / std::sqrt(static_cast<double>(frames * dim)), rng);
    m.discriminator.w = w.col(0);
    return m;
}

Sequence generate(const GanModel& model, const Sequence& lambda) { return run_generator(model, lambda).y; }

double discriminate(const GanModel& model, const Sequence& x) {
    check_shape(model, x);
    return std::clamp(sigmoid(logit(model, x)), kDiscriminatorEpsilon, 1.0 - kDiscriminatorEpsilon);
}

double discriminator_loss(const GanModel& model, std::span<const Sequence> real, std::span<const Sequence> fake) {
    require(!real.empty() && !fake.empty(), ErrorKind::InvalidArgument, "batches must be non-empty");
    double a = 0.0, b = 0.0;
    for (const Sequence& x : real) a += std::log(discriminate(model, x));
    for (const Sequence& x : fake) b += std::log(1.0 - discriminate(model, x));
    return a / static_cast<double>(real.size()) + b / static_cast<double>(fake.size());
}

double generator_loss(const GanModel& model, std::span<const Sequence> lambdas) {
    require(!lambdas.empty(), ErrorKind::InvalidArgument, "batch must be non-empty");
    double s = 0.0;
    for (const Sequence& l : lambdas) s += std::log(1.0 - discriminate(model, generate(model, l)));
    return s / static_cast<double>(lambdas.size());
}

DiscriminatorGradient discriminator_gradient(const GanModel& model, std::span<const Sequence> real,
                                             std::span<const Sequence> fake) {
    require(!real.empty() && !fake.empty(), ErrorKind::InvalidArgument, "batches must be non-empty");
    DiscriminatorGradient g{Eigen::VectorXd::Zero(model.discriminator.w.size()), 0.0};
    auto accumulate = [&](const Sequence& x, double dlogit) {
        for (int t = 0; t < model.frames; ++t)
            for (int c = 0; c < model.dim; ++c) g.w[t * model.dim + c] += dlogit * x(t, c) / model.scale;
        g.b += dlogit;
    };
    for (const Sequence& x : real) {
        const double d = discriminate(model, x);
        if (!clamped(d)) accumulate(x, (1.0 - d) / static_cast<double>(real.size()));
    }
    for (const Sequence& x : fake) {
        const double d = discriminate(model, x);
        if (!clamped(d)) accumulate(x, -d / static_cast<double>(fake.size()));
    }
    return g;
}

Generator generator_gradient(const GanModel& model, std::span<const Sequence> lambdas) {
    require(!lambdas.empty(), ErrorKind::InvalidArgument, "batch must be non-empty");
    const Generator& gen = model.generator;
    Generator grad = zero_like(model);
    for (const Sequence& lambda : lambdas) {
        const Forward f = run_generator(model, lambda);
        const double d = discriminate(model, f.y);
        if (clamped(d)) continue;
        const double dlogit = -d / static_cast<double>(lambdas.size());
        Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(model.hidden);
        for (int t = model.frames; t-- > 0;) {
            const Eigen::VectorXd dy = dlogit / model.scale * model.discriminator.w.segment(t * model.dim, model.dim);
            grad.w_out += model.scale * dy * f.h[t + 1].transpose();
            grad.b_out += model.scale * dy;
            const Eigen::VectorXd dh = model.scale * gen.w_out.transpose() * dy + dh_next;
            const Eigen::VectorXd pre = dh.cwiseProduct((1.0 - f.h[t + 1].array().square()).matrix());
            grad.w_xh += pre * (lambda.row(t) / model.scale);
            grad.w_hh += pre * f.h[t].transpose();
            grad.b_h += pre;
            dh_next = gen.w_hh.transpose() * pre;
        }
    }
    return grad;
}

Sequence to_sequence(const Sample& sample, DataMode mode) {
    const ChannelRange r = mode_channels(mode);
    Sequence s(static_cast<Eigen::Index>(sample.frames.size()), r.count);
    for (std::size_t t = 0; t < sample.frames.size(); ++t)
        for (int c = 0; c < r.count; ++c) s(t, c) = sample.frames[t].values[r.first + c];
    return s;
}

void from_sequence(const Sequence& seq, DataMode mode, Sample& sample) {
    const ChannelRange r = mode_channels(mode);
    require(seq.rows() == static_cast<Eigen::Index>(sample.frames.size()) && seq.cols() == r.count,
            ErrorKind::InvalidArgument, "sequence shape does not match the sample");
    for (std::size_t t = 0; t < sample.frames.size(); ++t)
        for (int c = 0; c < r.count; ++c) sample.frames[t].values[r.first + c] = seq(t, c);
}

namespace {

Sequence perturbed(const Sequence& x, double amplitude, Rng& rng) {
    Sequence out = x;
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += rng.uniform(-amplitude, amplitude);
    return out;
}

}  // namespace

GanModel gan_train(const SampleSet& seeds, NoiseSpec spec, const GanConfig& config, GanTrainLog* log) {
    require(!seeds.samples.empty(), ErrorKind::InvalidArgument, "seed set is empty");
    require(config.epochs >= 1, ErrorKind::InvalidArgument, "epochs must be >= 1");
    require(config.lr > 0.0, ErrorKind::InvalidArgument, "learning rate must be > 0");
    require(config.batch >= 1 && config.hidden >= 1, ErrorKind::InvalidArgument, "batch and hidden must be >= 1");
    require(spec.amplitude > 0.0, ErrorKind::InvalidArgument, "noise amplitude must be > 0");

    std::vector<Sequence> real;
    for (const Sample& s : seeds.samples) real.push_back(to_sequence(s, seeds.mode));
    const int frames = static_cast<int>(real.front().rows());
    for (const Sequence& r : real)
        require(r.rows() == frames, ErrorKind::InvalidArgument, "seed samples differ in length");

    Rng rng(config.rng_seed);
    GanModel model = init_gan(frames, static_cast<int>(real.front().cols()), config.hidden, spec.amplitude, seeds.mode, rng);
    std::vector<std::size_t> order(real.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
        double d_sum = 0.0, g_sum = 0.0;
        int batches = 0;
        for (std::size_t b = 0; b < order.size(); b += config.batch) {
            const std::size_t e = std::min(order.size(), b + config.batch);
            std::vector<Sequence> batch, lambdas, fakes;
            for (std::size_t i = b; i < e; ++i) {
                batch.push_back(real[order[i]]);
                lambdas.push_back(perturbed(real[order[i]], spec.amplitude, rng));
                fakes.push_back(generate(model, lambdas.back()));
            }
            const double d_loss = discriminator_loss(model, batch, fakes);
            const DiscriminatorGradient dg = discriminator_gradient(model, batch, fakes);
            model.discriminator.w += config.lr * dg.w;
            model.discriminator.b += config.lr * dg.b;

            const double g_loss = generator_loss(model, lambdas);
            const Generator gg = generator_gradient(model, lambdas);
            Generator& gen = model.generator;
            gen.w_xh -= config.lr * gg.w_xh;
            gen.w_hh -= config.lr * gg.w_hh;
            gen.w_out -= config.lr * gg.w_out;
            gen.b_h -= config.lr * gg.b_h;
            gen.b_out -= config.lr * gg.b_out;

            require(std::isfinite(d_loss) && std::isfinite(g_loss), ErrorKind::Divergence,
                    "non-finite GAN loss in epoch " + std::to_string(epoch));
            d_sum += d_loss;
            g_sum += g_loss;
            ++batches;
        }
        if (log) {
            log->discriminator_loss.push_back(d_sum / batches);
            log->generator_loss.push_back(g_sum / batches);
        }
    }
    return model;
}

SampleSet gan_sample(const GanModel& model, const SampleSet& seeds, NoiseSpec spec, int n, std::uint64_t rng_seed) {
    require(n >= 1, ErrorKind::InvalidArgument, "sample count must be >= 1");
    require(!seeds.samples.empty(), ErrorKind::InvalidArgument, "seed set is empty");
    require(spec.amplitude >= 0.0, ErrorKind::InvalidArgument, "noise amplitude must be >= 0");
    // Per-channel envelope of the seeds widened by the noise amplitude; the
    // residual head may drift slightly past it.
    Eigen::RowVectorXd lo = to_sequence(seeds.samples.front(), model.mode).colwise().minCoeff();
    Eigen::RowVectorXd hi = to_sequence(seeds.samples.front(), model.mode).colwise().maxCoeff();
    for (const Sample& seed : seeds.samples) {
        const Sequence x = to_sequence(seed, model.mode);
        lo = lo.cwiseMin(x.colwise().minCoeff());
        hi = hi.cwiseMax(x.colwise().maxCoeff());
    }
    lo.array() -= spec.amplitude;
    hi.array() += spec.amplitude;

    Rng rng(rng_seed);
    SampleSet out;
    out.mode = model.mode;
    out.samples.reserve(n);
    for (int i = 0; i < n; ++i) {
        const Sample& seed = seeds.samples[rng.index(seeds.samples.size())];
        Sample s = seed;
        Sequence y = generate(model, perturbed(to_sequence(seed, model.mode), spec.amplitude, rng));
        y = y.cwiseMax(lo.replicate(y.rows(), 1)).cwiseMin(hi.replicate(y.rows(), 1));
        from_sequence(y, model.mode, s);
        out.samples.push_back(std::move(s));
    }
    return out;
}

}  // namespace gesture_forge
