#include <doctest.h>

#include "gesture_forge/error.hpp"
#include "gesture_forge/gan.hpp"
#include "gesture_forge/pipeline.hpp"
#include "gesture_forge/rng.hpp"
#include "oracles.hpp"

using namespace gesture_forge;

namespace {

Sequence random_sequence(Rng& rng, int frames, int dim, double amp) {
    Sequence s(frames, dim);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.uniform(-amp, amp);
    return s;
}

// Small model with every weight random, including the output head.
GanModel toy_model(Rng& rng, int frames = 4, int dim = 3, int hidden = 3, double scale = 1.5) {
    GanModel m = init_gan(frames, dim, hidden, scale, DataMode::Vector, rng);
    for (Eigen::Index i = 0; i < m.generator.w_out.size(); ++i) m.generator.w_out.data()[i] = rng.uniform(-0.5, 0.5);
    for (Eigen::Index i = 0; i < m.generator.b_out.size(); ++i) m.generator.b_out[i] = rng.uniform(-0.2, 0.2);
    for (Eigen::Index i = 0; i < m.generator.b_h.size(); ++i) m.generator.b_h[i] = rng.uniform(-0.2, 0.2);
    for (Eigen::Index i = 0; i < m.discriminator.w.size(); ++i) m.discriminator.w[i] = rng.uniform(-0.6, 0.6);
    m.discriminator.b = 0.1;
    return m;
}

}  // namespace

TEST_CASE("untrained generator is the identity") {
    Rng rng(1);
    const GanModel m = init_gan(5, 4, 8, 1.0, DataMode::Vector, rng);
    const Sequence x = random_sequence(rng, 5, 4, 2.0);
    CHECK((generate(m, x) - x).norm() == 0.0);
}

TEST_CASE("generator and discriminator match direct evaluation") {
    Rng rng(2);
    const GanModel m = toy_model(rng);
    for (int i = 0; i < 10; ++i) {
        const Sequence x = random_sequence(rng, 4, 3, 2.0);
        CHECK((generate(m, x) - oracle::gan_generate(m, x)).cwiseAbs().maxCoeff() < 1e-12);
        const double d = discriminate(m, x);
        CHECK(std::abs(d - oracle::gan_discriminate(m, x)) < 1e-12);
        CHECK((d > 0.0 && d < 1.0));
    }
}

TEST_CASE("discriminator output stays inside (0, 1) under extreme inputs") {
    Rng rng(3);
    GanModel m = toy_model(rng);
    m.discriminator.w.setConstant(1e6);
    Sequence big = Sequence::Constant(4, 3, 1e3);
    CHECK(discriminate(m, big) == 1.0 - kDiscriminatorEpsilon);
    CHECK(discriminate(m, Sequence(-big)) == kDiscriminatorEpsilon);
    std::vector<Sequence> real{big}, fake{Sequence(-big)};
    CHECK(std::isfinite(discriminator_loss(m, real, fake)));
    CHECK(std::isfinite(generator_loss(m, fake)));
}

TEST_CASE("losses match direct evaluation") {
    Rng rng(4);
    const GanModel m = toy_model(rng);
    std::vector<Sequence> real, lambdas;
    for (int i = 0; i < 4; ++i) {
        real.push_back(random_sequence(rng, 4, 3, 2.0));
        lambdas.push_back(random_sequence(rng, 4, 3, 2.0));
    }
    std::vector<Sequence> fake;
    for (const Sequence& l : lambdas) fake.push_back(oracle::gan_generate(m, l));
    CHECK(std::abs(discriminator_loss(m, real, fake) - oracle::gan_discriminator_loss(m, real, fake)) < 1e-12);
    CHECK(std::abs(generator_loss(m, lambdas) - oracle::gan_generator_loss(m, lambdas)) < 1e-12);

    GanModel half = m;
    half.discriminator.w.setZero();
    half.discriminator.b = 0.0;
    CHECK(std::abs(discriminator_loss(half, real, fake) - 2.0 * std::log(0.5)) < 1e-12);
    CHECK(std::abs(2.0 * std::log(0.5) - (-1.3862943611198906)) < 1e-12);
}

TEST_CASE("discriminator gradient matches central differences") {
    Rng rng(5);
    GanModel m = toy_model(rng, 4, 3, 3);
    std::vector<Sequence> real, fake;
    for (int i = 0; i < 3; ++i) {
        real.push_back(random_sequence(rng, 4, 3, 2.0));
        fake.push_back(random_sequence(rng, 4, 3, 2.0));
    }
    const DiscriminatorGradient g = discriminator_gradient(m, real, fake);
    auto loss = [&] { return discriminator_loss(m, real, fake); };
    for (Eigen::Index i = 0; i < m.discriminator.w.size(); ++i)
        CHECK(oracle::relative_error(g.w[i], oracle::central_difference(&m.discriminator.w[i], loss)) < 1e-4);
    CHECK(oracle::relative_error(g.b, oracle::central_difference(&m.discriminator.b, loss)) < 1e-4);
}

TEST_CASE("generator gradient matches central differences") {
    Rng rng(6);
    GanModel m = toy_model(rng, 5, 3, 3);
    std::vector<Sequence> lambdas;
    for (int i = 0; i < 3; ++i) lambdas.push_back(random_sequence(rng, 5, 3, 2.0));
    const Generator g = generator_gradient(m, lambdas);
    auto loss = [&] { return generator_loss(m, lambdas); };
    auto check = [&](Eigen::MatrixXd& w, const Eigen::MatrixXd& grad) {
        for (Eigen::Index i = 0; i < w.size(); ++i)
            CHECK(oracle::relative_error(grad.data()[i], oracle::central_difference(&w.data()[i], loss)) < 1e-4);
    };
    auto check_vec = [&](Eigen::VectorXd& w, const Eigen::VectorXd& grad) {
        for (Eigen::Index i = 0; i < w.size(); ++i)
            CHECK(oracle::relative_error(grad[i], oracle::central_difference(&w[i], loss)) < 1e-4);
    };
    check(m.generator.w_xh, g.w_xh);
    check(m.generator.w_hh, g.w_hh);
    check(m.generator.w_out, g.w_out);
    check_vec(m.generator.b_h, g.b_h);
    check_vec(m.generator.b_out, g.b_out);
}

TEST_CASE("training preconditions") {
    std::vector<std::string> labels{"push"};
    const SampleSet seeds = synth_sample_set(labels, 2, 1, NoiseSpec{0.02});
    GanConfig c;
    c.epochs = 0;
    CHECK_THROWS_AS(gan_train(seeds, NoiseSpec{1.0}, c), Error);
    c.epochs = 1;
    c.lr = 0.0;
    CHECK_THROWS_AS(gan_train(seeds, NoiseSpec{1.0}, c), Error);
    CHECK_THROWS_AS(gan_train(SampleSet{}, NoiseSpec{1.0}, GanConfig{}), Error);
}

TEST_CASE("training is deterministic and logs one loss per epoch") {
    const SampleSet seeds = synth_sample_set(all_gestures(), 2, 4, NoiseSpec{0.02});
    GanConfig c;
    c.epochs = 3;
    GanTrainLog log;
    const GanModel a = gan_train(seeds, NoiseSpec{1.0}, c, &log);
    const GanModel b = gan_train(seeds, NoiseSpec{1.0}, c);
    CHECK(log.discriminator_loss.size() == 3);
    CHECK(a.generator.w_out == b.generator.w_out);
    CHECK(a.discriminator.w == b.discriminator.w);
    CHECK(a.generator.w_out.norm() > 0.0);
}

TEST_CASE("samples from constant seeds stay within the seed range widened by the noise") {
    SampleSet seeds;
    seeds.mode = DataMode::Angle;
    for (int i = 0; i < 16; ++i) {
        Sample s;
        s.label = "hold";
        s.frames.assign(30, DeltaFrame{});
        for (DeltaFrame& f : s.frames)
            for (int c = 0; c < kChannels; ++c) f.values[c] = 1.5;
        s.confidence.assign(30, full_confidence());
        seeds.samples.push_back(s);
    }
    GanConfig c;
    c.epochs = 20;
    const double a = 5.0;
    const GanModel m = gan_train(seeds, NoiseSpec{a}, c);
    const SampleSet out = gan_sample(m, seeds, NoiseSpec{a}, 50, 3);
    REQUIRE(out.samples.size() == 50);
    for (const Sample& s : out.samples) {
        CHECK(s.frames.size() == 30);
        CHECK(s.label == "hold");
        for (const DeltaFrame& f : s.frames)
            for (int ch = 0; ch < kChannels; ++ch) {
                if (is_angle_channel(ch)) {
                    CHECK((f.values[ch] >= 1.5 - a && f.values[ch] <= 1.5 + a));
                } else {
                    CHECK(f.values[ch] == 1.5);  // copied from the seed
                }
            }
    }
}

TEST_CASE("sampling is deterministic and finite at volume") {
    const SampleSet seeds = synth_sample_set(all_gestures(), 2, 4, NoiseSpec{0.02});
    GanConfig c;
    c.epochs = 1;
    const GanModel m = gan_train(seeds, NoiseSpec{1.0}, c);
    const SampleSet one = gan_sample(m, seeds, NoiseSpec{1.0}, 1, 5);
    CHECK(one.samples.size() == 1);
    const SampleSet big = gan_sample(m, seeds, NoiseSpec{1.0}, 5000, 5);
    const SampleSet again = gan_sample(m, seeds, NoiseSpec{1.0}, 5000, 5);
    REQUIRE(big.samples.size() == 5000);
    big.check(30);
    bool finite = true, same = true;
    for (std::size_t i = 0; i < big.samples.size(); ++i)
        for (int t = 0; t < 30; ++t) {
            for (double v : big.samples[i].frames[t].values) finite = finite && std::isfinite(v);
            same = same && big.samples[i].frames[t].values == again.samples[i].frames[t].values;
        }
    CHECK(finite);
    CHECK(same);
}
