#include "crbm/enumeration.hpp"
#include "crbm/training.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace crbm;

namespace {

WindowedSeriesd all_binary_states(Index units, int copies) {
    WindowedSeriesd w;
    const Index states = Index(1) << units;
    w.targets.resize(states * copies, units);
    w.contexts.resize(states * copies, 0);
    for (int c = 0; c < copies; ++c)
        for (Index s = 0; s < states; ++s) w.targets.row(c * states + s) = oracle::bits_of(s, units).transpose();
    return w;
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.seed = 1;
    cfg.lag = 0;
    cfg.hidden_units = 2;
    cfg.n_chains = 8;
    return cfg;
}

}  // namespace

TEST_CASE("init_params") {
    const auto m1 = init_params(100, 100, 2, Arch::gaussian, 5);
    const auto m2 = init_params(100, 100, 2, Arch::gaussian, 5);
    CHECK(m1.W == m2.W);
    const double mean = m1.W.mean();
    const double sd = std::sqrt((m1.W.array() - mean).square().mean());
    CHECK(sd >= 0.008);
    CHECK(sd <= 0.012);
    CHECK(m1.a.isZero(0));
    CHECK(m1.b.isZero(0));
    CHECK(m1.A.isZero(0));
    CHECK(m1.B.isZero(0));
    CHECK(m1.sigma.isOnes(0));
    CHECK(m1.A.rows() == 200);
    CHECK(init_params(100, 100, 2, Arch::gaussian, 6).W != m1.W);
}

TEST_CASE("config parsing") {
    const auto cfg = parse_train_config("# comment\nepochs = 12\nlearning_rate=0.05 # inline\n\nseed=42\nlag=3\n");
    CHECK(cfg.epochs == 12);
    CHECK(*cfg.learning_rate == 0.05);
    CHECK(*cfg.seed == 42);
    CHECK(cfg.lag == 3);
    CHECK(cfg.batch_size == 64);
    CHECK(cfg.resolved_learning_rate(Arch::gaussian) == 0.05);
    CHECK(TrainConfig{}.resolved_learning_rate(Arch::gaussian) == 1e-3);
    CHECK(TrainConfig{}.resolved_learning_rate(Arch::bernoulli) == 1e-2);

    CHECK_THROWS_AS(parse_train_config("epoch=3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_train_config("epochs=three\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_train_config("epochs\n"), std::invalid_argument);

    const auto round = parse_train_config(format_train_config(cfg));
    CHECK(format_train_config(round) == format_train_config(cfg));

    TrainConfig bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = TrainConfig{};
    bad.momentum = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("PCD gradients do not depend on the learning rate") {
    Rng init(3);
    const auto m = oracle::random_model(Arch::bernoulli, 3, 2, 0, init, 0.5);
    const auto data = all_binary_states(3, 2);
    TrainConfig c1 = small_config();
    TrainConfig c2 = c1;
    c1.learning_rate = 1e-4;
    c2.learning_rate = 10.0;

    Rng r1(8), r2(8);
    auto ch1 = PersistentChains::from_data(data, c1.n_chains, r1, Rng(9));
    auto ch2 = PersistentChains::from_data(data, c2.n_chains, r2, Rng(9));
    const auto g1 = pcd_gradients(data, ch1, m, c1, r1);
    const auto g2 = pcd_gradients(data, ch2, m, c2, r2);
    CHECK(g1.W == g2.W);
    CHECK(g1.a == g2.a);
    CHECK(g1.b == g2.b);
}

TEST_CASE("PCD gradient is centred when the data matches the model") {
    const auto m = ModelParamsd::zeros(Arch::bernoulli, 3, 2, 0);
    const auto data = all_binary_states(3, 4);
    TrainConfig cfg = small_config();
    cfg.n_chains = 16;
    Rng rng(13);
    auto chains = PersistentChains::from_data(data, cfg.n_chains, rng, Rng(14));

    const int reps = 200;
    std::vector<Eigen::VectorXd> samples;
    for (int r = 0; r < reps; ++r) {
        const auto g = pcd_gradients(data, chains, m, cfg, rng);
        Eigen::VectorXd flat(g.W.size() + g.a.size() + g.b.size());
        flat << Eigen::Map<const Eigen::VectorXd>(g.W.data(), g.W.size()), g.a, g.b;
        samples.push_back(flat);
    }
    const Index n = samples.front().size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n), sq = Eigen::VectorXd::Zero(n);
    for (const auto& s : samples) {
        mean += s;
        sq += s.cwiseProduct(s);
    }
    mean /= reps;
    const Eigen::VectorXd var = (sq / reps - mean.cwiseProduct(mean)).cwiseMax(0.0) * reps / (reps - 1.0);
    const Eigen::VectorXd se = (var / reps).cwiseSqrt();
    for (Index i = 0; i < n; ++i) CHECK(std::abs(mean(i)) <= 3.0 * se(i) + 1e-12);
}

TEST_CASE("fantasy chains persist across updates") {
    Rng init(17);
    const auto m = oracle::random_model(Arch::gaussian, 2, 3, 1, init, 0.5);
    WindowedSeriesd data;
    data.contexts = Eigen::MatrixXd::Random(20, 2);
    data.targets = Eigen::MatrixXd::Random(20, 2);
    TrainConfig cfg = small_config();
    cfg.lag = 1;
    cfg.gibbs_k = 3;
    Rng rng(19);
    auto chains = PersistentChains::from_data(data, cfg.n_chains, rng, Rng(20));
    pcd_gradients(data, chains, m, cfg, rng);

    // Replay the second update by hand from the stored chain state.
    const PersistentChains snapshot = chains;
    Rng replay_rng = rng;
    pcd_gradients(data, chains, m, cfg, rng);
    for (Index c = 0; c < snapshot.size(); ++c) {
        const Eigen::VectorXd ctx = data.contexts.row(Index(replay_rng.index(std::uint64_t(data.size())))).transpose();
        Rng chain_rng = snapshot.rngs[std::size_t(c)];
        Eigen::VectorXd v = snapshot.states.row(c).transpose();
        for (int k = 0; k < cfg.gibbs_k; ++k)
            v = gibbs_step(v, m, dynamic_visible_bias(ctx, m), dynamic_hidden_bias(ctx, m), chain_rng).v;
        CHECK(chains.contexts.row(c).transpose() == ctx);
        CHECK(chains.states.row(c).transpose() == v);
    }
}

TEST_CASE("apply_update") {
    Rng init(23);
    const auto m0 = oracle::random_model(Arch::gaussian, 3, 2, 1, init);
    Gradients g = Gradients::zeros_like(m0);
    g.W.setRandom();
    g.a.setRandom();
    g.b.setRandom();
    g.A.setRandom();
    g.B.setRandom();

    SUBCASE("zero learning rate leaves parameters bit-identical") {
        TrainConfig cfg;
        cfg.learning_rate = 0.0;
        auto m = m0;
        auto vel = Gradients::zeros_like(m);
        apply_update(m, g, vel, cfg);
        CHECK(m.W == m0.W);
        CHECK(m.a == m0.a);
        CHECK(m.b == m0.b);
        CHECK(m.A == m0.A);
        CHECK(m.B == m0.B);
    }
    SUBCASE("plain SGD without momentum or decay") {
        TrainConfig cfg;
        cfg.learning_rate = 0.1;
        cfg.momentum = 0.0;
        cfg.weight_decay = 0.0;
        auto m = m0;
        auto vel = Gradients::zeros_like(m);
        apply_update(m, g, vel, cfg);
        CHECK((m.W - (m0.W + 0.1 * g.W)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((m.B - (m0.B + 0.1 * g.B)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((m.b - (m0.b + 0.1 * g.b)).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("weight decay shrinks W only") {
        TrainConfig cfg;
        cfg.learning_rate = 0.1;
        cfg.weight_decay = 0.5;
        auto m = m0;
        auto vel = Gradients::zeros_like(m);
        const auto zero = Gradients::zeros_like(m);
        double norm = m.W.norm();
        for (int step = 0; step < 20; ++step) {
            apply_update(m, zero, vel, cfg);
            CHECK(m.W.norm() < norm);
            norm = m.W.norm();
        }
        CHECK(m.A == m0.A);
        CHECK(m.a == m0.a);
    }
    SUBCASE("sparsity pulls hidden biases toward the target") {
        TrainConfig cfg;
        cfg.learning_rate = 1.0;
        cfg.momentum = 0.0;
        cfg.sparsity_target = 0.1;
        cfg.sparsity_cost = 0.5;
        auto m = m0;
        auto vel = Gradients::zeros_like(m);
        auto zero = Gradients::zeros_like(m);
        zero.hidden_mean.setConstant(0.6);
        apply_update(m, zero, vel, cfg);
        CHECK((m.b - (m0.b.array() - 0.25).matrix()).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("non-finite results abort") {
        TrainConfig cfg;
        cfg.learning_rate = 1.0;
        auto m = m0;
        auto vel = Gradients::zeros_like(m);
        auto bad = g;
        bad.W(0, 0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(apply_update(m, bad, vel, cfg), TrainingError);
    }
}

TEST_CASE("training is deterministic and reports every epoch") {
    Rng rng(29);
    EncodedSeries enc;
    enc.mode = EncodingMode::continuous;
    enc.matrix = Eigen::MatrixXd(120, 2);
    for (Index t = 0; t < enc.matrix.size(); ++t) enc.matrix.data()[t] = rng.normal();
    TrainConfig cfg;
    cfg.seed = 4;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.n_chains = 8;
    cfg.lag = 2;
    cfg.hidden_units = 3;
    EncodedSeries held = enc;
    held.matrix = enc.matrix.topRows(30);

    const auto r1 = train(enc, cfg, &held);
    const auto r2 = train(enc, cfg, &held);
    CHECK(r1.params.W == r2.params.W);
    CHECK(r1.params.A == r2.params.A);
    CHECK(r1.reconstruction_mse == r2.reconstruction_mse);
    CHECK(r1.reconstruction_mse.size() == 5);
    CHECK(r1.free_energy_train.size() == 5);
    CHECK(r1.free_energy_heldout.size() == 5);
    CHECK(r1.params.arch == Arch::gaussian);
    CHECK(r1.free_energy_train.back() == doctest::Approx(mean_free_energy(build_windows(enc.matrix, 2), r1.params)));

    cfg.epochs = 0;
    CHECK_THROWS_AS(train(enc, cfg), std::invalid_argument);
    cfg.epochs = 1;
    cfg.seed.reset();
    CHECK_THROWS_AS(train(enc, cfg), std::invalid_argument);
}

TEST_CASE("reconstruction error settles while recovering a small RBM") {
    Rng rng(31);
    auto gen = oracle::random_model(Arch::bernoulli, 4, 2, 0, rng, 2.0);
    const Eigen::VectorXd p = exact_marginals(gen);
    EncodedSeries enc;
    enc.mode = EncodingMode::binary;
    enc.matrix = oracle::sample_table(p, 4, 5000, rng);
    TrainConfig cfg;
    cfg.seed = 2;
    cfg.lag = 0;
    cfg.hidden_units = 4;
    cfg.epochs = 20;
    cfg.batch_size = 50;
    cfg.learning_rate = 0.05;
    cfg.n_chains = 50;
    const auto report = train(enc, cfg);

    // Moving averages over five-epoch blocks after warm-up must not rise
    // beyond sampling noise.
    const auto& mse = report.reconstruction_mse;
    auto block = [&](std::size_t start) {
        double s = 0.0;
        for (std::size_t e = start; e < start + 5; ++e) s += mse[e];
        return s / 5.0;
    };
    CHECK(block(15) <= block(5) + 0.005);
    CHECK(total_variation(exact_marginals(report.params), p) < 0.1);
}
