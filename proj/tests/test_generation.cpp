#include "crbm/generation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace crbm;

TEST_CASE("zero gaussian model emits iid standard normals") {
    const auto m = ModelParamsd::zeros(Arch::gaussian, 2, 3, 2);
    Rng rng(61);
    const auto out = generate(m, Eigen::VectorXd::Zero(4), 10000, kDefaultBurnIn, rng);
    REQUIRE(out.matrix.rows() == 10000);
    const Eigen::RowVectorXd mean = out.matrix.colwise().mean();
    const Eigen::RowVectorXd var = (out.matrix.rowwise() - mean).colwise().squaredNorm() / 10000.0;
    CHECK(mean.cwiseAbs().maxCoeff() < 0.05);
    CHECK((var.array() - 1.0).abs().maxCoeff() < 0.1);
    CHECK(out.mode == EncodingMode::continuous);
}

TEST_CASE("generation length and seeding") {
    Rng init(67);
    const auto m = oracle::random_model(Arch::bernoulli, 4, 3, 2, init);
    const Eigen::VectorXd seed = oracle::bits_of(0xA5, 8);
    Rng r1(5), r2(5), r3(6);
    CHECK(generate(m, seed, 1, 0, r1).matrix.rows() == 1);
    Rng a(5), b(5);
    const auto x = generate(m, seed, 30, 3, a);
    const auto y = generate(m, seed, 30, 3, b);
    CHECK(x.matrix == y.matrix);
    CHECK(generate(m, seed, 30, 3, r3).matrix != x.matrix);
    CHECK(((x.matrix.array() == 0.0) || (x.matrix.array() == 1.0)).all());

    CHECK_THROWS_AS(generate(m, seed, 0, 3, r2), std::invalid_argument);
    CHECK_THROWS_AS(generate(m, Eigen::VectorXd::Zero(3), 5, 3, r2), std::invalid_argument);
}

TEST_CASE("each row depends only on the window, the previous row and the stream") {
    Rng init(71);
    const auto m = oracle::random_model(Arch::gaussian, 3, 4, 2, init, 0.3);
    SeriesSampler full(m, Eigen::VectorXd::Zero(6), 5, Rng(8));
    std::vector<Eigen::VectorXd> rows;
    for (int t = 0; t < 20; ++t) rows.push_back(full.next());

    // Rebuild a sampler from the state observable at t = 10 and replay.
    SeriesSampler probe(m, Eigen::VectorXd::Zero(6), 5, Rng(8));
    for (int t = 0; t < 10; ++t) probe.next();
    SeriesSampler resumed(m, probe.window(), 5, probe.rng(), probe.state());
    for (int t = 10; t < 20; ++t) CHECK(resumed.next() == rows[std::size_t(t)]);

    Eigen::VectorXd expected_window(6);
    expected_window << rows[8], rows[9];
    CHECK(probe.window() == expected_window);
}

TEST_CASE("decode_series") {
    SUBCASE("binary") {
        BinaryCodec codec{Eigen::Vector2d(-3.0, 10.0), Eigen::Vector2d(3.0, 20.0), 8};
        Rng rng(73);
        Eigen::MatrixXd raw(50, 2);
        for (Index t = 0; t < 50; ++t) raw.row(t) << 6.0 * rng.uniform() - 3.0, 10.0 + 10.0 * rng.uniform();
        RawSeries s;
        s.values = raw;
        s.asset_names = {"a", "b"};
        const auto enc = encode_binary_series(s, codec);
        const Eigen::MatrixXd back = decode_series(enc);
        for (Index j = 0; j < 2; ++j)
            CHECK((back.col(j) - raw.col(j)).cwiseAbs().maxCoeff() <= codec.bin_width(j) / 2 + 1e-12);

        EncodedSeries zeros = enc;
        zeros.matrix.setZero();
        CHECK(decode_series(zeros).row(0).transpose() == codec.min);

        EncodedSeries misaligned = enc;
        misaligned.matrix = Eigen::MatrixXd::Zero(2, 15);
        CHECK_THROWS_AS(decode_series(misaligned), std::invalid_argument);
    }
    SUBCASE("continuous") {
        RawSeries s;
        s.values = Eigen::MatrixXd::Random(40, 3) * 5.0;
        s.asset_names = {"a", "b", "c"};
        ZScoreParams z{Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(0.5, 2, 9)};
        CHECK((decode_series(standardize(s, z)) - s.values).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("summary statistics") {
    Rng rng(79);
    Eigen::MatrixXd x(100000, 2);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const auto s = summary_stats(x);
    CHECK(s.excess_kurtosis.cwiseAbs().maxCoeff() < 0.1);
    CHECK(std::abs(s.correlation.values(0, 1)) < 0.02);
    CHECK(s.correlation.values(0, 0) == 1.0);
    CHECK(s.quantiles.rows() == 9);
    CHECK(s.quantiles(4, 0) == doctest::Approx(0.0).epsilon(0.02));
    CHECK(s.squared_autocorr.rows() == 20);
    CHECK(s.squared_autocorr.cwiseAbs().maxCoeff() < 0.02);

    Eigen::MatrixXd pair(50, 2);
    pair.col(0).setRandom();
    pair.col(1) = pair.col(0);
    CHECK(summary_stats(pair).correlation.values(0, 1) == doctest::Approx(1.0));

    Eigen::MatrixXd flat(10, 2);
    flat.col(0).setRandom();
    flat.col(1).setConstant(3.0);
    const auto fs = summary_stats(flat);
    CHECK_FALSE(fs.correlation.defined(0, 1));
    CHECK(std::isnan(fs.correlation.values(0, 1)));
    CHECK(fs.correlation.defined(0, 0));
}

TEST_CASE("squared autocorrelation picks up volatility clustering") {
    Rng rng(83);
    Eigen::MatrixXd x(20000, 1);
    double vol = 1.0;
    for (Index t = 0; t < x.rows(); ++t) {
        if (rng.uniform() < 0.01) vol = vol > 1.0 ? 1.0 : 4.0;
        x(t, 0) = vol * rng.normal();
    }
    // Two-state regime with switch probability q: Var(vol^2) / Var(x^2) * (1 - 2q)^k.
    const double var_vol2 = 56.25, var_x2 = 3.0 * (1.0 + 256.0) / 2.0 - 8.5 * 8.5;
    const Eigen::MatrixXd ac = squared_autocorrelation(x, 5);
    for (int k = 1; k <= 5; ++k) CHECK(std::abs(ac(k - 1, 0) - var_vol2 / var_x2 * std::pow(0.98, k)) < 0.05);
}
