#include "crbm/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crbm {

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
    const double h = p * double(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

Eigen::VectorXd quantiles(const Eigen::Ref<const Eigen::VectorXd>& column, std::span<const double> levels) {
    std::vector<double> sorted(column.data(), column.data() + column.size());
    std::sort(sorted.begin(), sorted.end());
    Eigen::VectorXd q(static_cast<Eigen::Index>(levels.size()));
    for (std::size_t k = 0; k < levels.size(); ++k) q(Eigen::Index(k)) = sorted_quantile(sorted, levels[k]);
    return q;
}

CorrelationMatrix pearson_correlation(const Eigen::MatrixXd& data) {
    if (data.rows() < 2) throw std::invalid_argument("correlation needs at least two rows");
    const Eigen::Index d = data.cols();
    const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::VectorXd scale = cov.diagonal().cwiseSqrt();

    CorrelationMatrix c;
    c.values.resize(d, d);
    c.defined.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const bool ok = scale(i) > 0.0 && scale(j) > 0.0;
            c.defined(i, j) = ok;
            if (!ok)
                c.values(i, j) = std::numeric_limits<double>::quiet_NaN();
            else if (i == j)
                c.values(i, j) = 1.0;
            else
                c.values(i, j) = std::clamp(cov(i, j) / (scale(i) * scale(j)), -1.0, 1.0);
        }
    }
    return c;
}

Eigen::MatrixXd squared_autocorrelation(const Eigen::MatrixXd& data, int max_lag) {
    const Eigen::Index t = data.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Constant(max_lag, data.cols(), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const Eigen::VectorXd sq = data.col(j).array().square();
        const Eigen::VectorXd x = sq.array() - sq.mean();
        const double denom = x.squaredNorm();
        if (!(denom > 0.0)) continue;
        for (int k = 1; k <= max_lag && k < t; ++k)
            out(k - 1, j) = x.head(t - k).dot(x.tail(t - k)) / denom;
    }
    return out;
}

}  // namespace crbm
