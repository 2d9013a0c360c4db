#include "crbm/generation.hpp"

#include <cmath>
#include <limits>

namespace crbm {

SeriesSampler::SeriesSampler(const ModelParamsd& m, Eigen::VectorXd seed_window, Index burn_in, Rng rng,
                             std::optional<Eigen::VectorXd> initial)
    : model_(&m), window_(std::move(seed_window)), burn_in_(burn_in), rng_(std::move(rng)) {
    if (burn_in < 0) throw std::invalid_argument("generate: burn_in must be >= 0");
    if (window_.size() != m.history_size())
        throw std::invalid_argument("generate: seed window length does not match lag * visible");
    const Index d = m.visible_size();
    if (initial) {
        if (initial->size() != d) throw std::invalid_argument("generate: initial state length does not match model");
        state_ = *initial;
    } else {
        state_ = Eigen::VectorXd::Zero(d);
        for (Index k = 0; k < m.lag; ++k) state_ += window_.segment(k * d, d);
        if (m.lag > 0) state_ /= double(m.lag);
    }
}

Eigen::VectorXd SeriesSampler::next() {
    const ModelParamsd& m = *model_;
    const Index d = m.visible_size();
    const Eigen::VectorXd abias = dynamic_visible_bias(window_, m);
    const Eigen::VectorXd bbias = dynamic_hidden_bias(window_, m);
    for (Index s = 0; s <= burn_in_; ++s) state_ = gibbs_step(state_, m, abias, bbias, rng_).v;
    if (m.lag > 0) {
        const Index keep = (m.lag - 1) * d;
        Eigen::VectorXd slid(window_.size());
        slid.head(keep) = window_.tail(keep);
        slid.tail(d) = state_;
        window_ = std::move(slid);
    }
    return state_;
}

EncodedSeries generate(const ModelParamsd& m, const Eigen::VectorXd& seed_window, Index steps, Index burn_in,
                       Rng& rng) {
    if (steps < 1) throw std::invalid_argument("generate: steps must be >= 1");
    SeriesSampler sampler(m, seed_window, burn_in, rng);
    EncodedSeries out;
    out.mode = m.arch == Arch::bernoulli ? EncodingMode::binary : EncodingMode::continuous;
    out.matrix.resize(steps, m.visible_size());
    for (Index t = 0; t < steps; ++t) out.matrix.row(t) = sampler.next().transpose();
    rng = sampler.rng();
    return out;
}

Eigen::MatrixXd decode_series(const EncodedSeries& encoded) {
    if (encoded.mode == EncodingMode::continuous) return destandardize(encoded);
    const auto* codec = std::get_if<BinaryCodec>(&encoded.codec);
    if (codec == nullptr) throw std::invalid_argument("decode_series: binary series without a binary codec");
    if (encoded.matrix.cols() != codec->assets() * codec->bits)
        throw std::invalid_argument("decode_series: column count is not assets * bits");
    Eigen::MatrixXd raw(encoded.matrix.rows(), codec->assets());
    for (Index t = 0; t < raw.rows(); ++t)
        for (Index j = 0; j < raw.cols(); ++j)
            raw(t, j) = decode_binary(encoded.matrix.row(t).segment(j * codec->bits, codec->bits).transpose(), j, *codec);
    return raw;
}

SummaryStats summary_stats(const Eigen::MatrixXd& series) {
    if (series.rows() < 2) throw std::invalid_argument("summary_stats needs at least two rows");
    const double n = double(series.rows());
    SummaryStats s;
    s.mean = series.colwise().mean().transpose();
    const Eigen::MatrixXd centered = series.rowwise() - s.mean.transpose();
    const Eigen::ArrayXd m2 = centered.array().square().colwise().sum().transpose() / n;
    const Eigen::ArrayXd m3 = centered.array().cube().colwise().sum().transpose() / n;
    const Eigen::ArrayXd m4 = centered.array().square().square().colwise().sum().transpose() / n;
    s.std = m2.sqrt().matrix();
    s.skewness.resize(series.cols());
    s.excess_kurtosis.resize(series.cols());
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (Index j = 0; j < series.cols(); ++j) {
        const bool ok = m2(j) > 0.0;
        s.skewness(j) = ok ? m3(j) / std::pow(m2(j), 1.5) : nan;
        s.excess_kurtosis(j) = ok ? m4(j) / (m2(j) * m2(j)) - 3.0 : nan;
    }
    s.quantiles.resize(Index(kSummaryQuantileLevels.size()), series.cols());
    for (Index j = 0; j < series.cols(); ++j) s.quantiles.col(j) = quantiles(series.col(j), kSummaryQuantileLevels);
    s.correlation = pearson_correlation(series);
    s.squared_autocorr = squared_autocorrelation(series, kSquaredAutocorrLags);
    return s;
}

}  // namespace crbm
