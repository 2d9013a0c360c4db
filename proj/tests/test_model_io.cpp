#include "crbm/model_io.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace crbm;

namespace {

ModelFile sample_model(Arch arch) {
    Rng rng(109);
    ModelFile mf;
    mf.params = oracle::random_model(arch, 4, 3, 2, rng);
    mf.asset_names = {"x", "y"};
    mf.date_column = "day";
    mf.seed_window = Eigen::VectorXd::Random(8);
    mf.config.seed = 42;
    mf.config.sparsity_target = 0.1;
    mf.config.lag = 2;
    if (arch == Arch::bernoulli) {
        mf.mode = EncodingMode::binary;
        mf.codec = BinaryCodec{Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 5), 2};
    } else {
        mf.mode = EncodingMode::continuous;
        mf.codec = ZScoreParams{Eigen::Vector4d(0, 1, 2, 3), Eigen::Vector4d(1, 1, 2, 0.5)};
        mf.asset_names = {"a", "b", "c", "d"};
    }
    return mf;
}

}  // namespace

TEST_CASE("model files round-trip bit for bit") {
    for (Arch arch : {Arch::bernoulli, Arch::gaussian}) {
        const ModelFile mf = sample_model(arch);
        const std::string bytes = serialize_model(mf);
        const ModelFile back = deserialize_model(bytes);
        CHECK(back.params.arch == arch);
        CHECK(back.params.W == mf.params.W);
        CHECK(back.params.A == mf.params.A);
        CHECK(back.params.B == mf.params.B);
        CHECK(back.params.sigma == mf.params.sigma);
        CHECK(back.seed_window == mf.seed_window);
        CHECK(back.asset_names == mf.asset_names);
        CHECK(back.date_column == "day");
        CHECK(back.config.seed == mf.config.seed);
        CHECK(back.config.sparsity_target == mf.config.sparsity_target);
        CHECK_FALSE(back.config.learning_rate.has_value());
        CHECK(serialize_model(back) == bytes);
    }

    test::TempDir dir;
    const ModelFile mf = sample_model(Arch::gaussian);
    save_model(dir.path() / "m.bin", mf);
    CHECK(test::read_file(dir.path() / "m.bin") == serialize_model(mf));
    CHECK(serialize_model(load_model(dir.path() / "m.bin")) == serialize_model(mf));
}

TEST_CASE("corrupt model files are rejected") {
    const std::string bytes = serialize_model(sample_model(Arch::bernoulli));

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_model(bad_magic), DataError);

    std::string bad_version = bytes;
    bad_version[8] = char(kModelFormatVersion + 1);
    CHECK_THROWS_WITH_AS(deserialize_model(bad_version), doctest::Contains("version"), DataError);

    for (std::size_t cut : {std::size_t(0), std::size_t(5), std::size_t(20), bytes.size() / 2, bytes.size() - 1})
        CHECK_THROWS_AS(deserialize_model(bytes.substr(0, cut)), DataError);
    CHECK_THROWS_AS(deserialize_model(bytes + "x"), DataError);

    test::TempDir dir;
    CHECK_THROWS_AS(load_model(dir.path() / "missing.bin"), DataError);
}
