#include "crbm/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace crbm {

std::vector<FreeEnergyRecord> free_energy_series(const EncodedSeries& encoded, const ModelParamsd& m) {
    if (encoded.matrix.cols() != m.visible_size())
        throw std::invalid_argument("free_energy_series: series width does not match model");
    const WindowedSeriesd windows = build_windows(encoded.matrix, m.lag);
    std::vector<FreeEnergyRecord> out;
    out.reserve(std::size_t(windows.size()));
    for (Index t = 0; t < windows.size(); ++t) {
        const auto terms =
            conditional_free_energy_terms(windows.targets.row(t).transpose(), windows.contexts.row(t).transpose(), m);
        FreeEnergyRecord r;
        r.row = t + m.lag;
        if (std::size_t(r.row) < encoded.dates.size()) r.date = encoded.dates[std::size_t(r.row)];
        r.quadratic = terms.quadratic;
        r.structural = terms.structural;
        r.total = terms.total();
        out.push_back(r);
    }
    return out;
}

std::vector<bool> regime_flags(std::span<const double> totals, int window, double threshold) {
    if (window < 2) throw std::invalid_argument("regime_flags: window must be >= 2");
    std::vector<bool> flags(totals.size(), false);
    if (std::isinf(threshold) && threshold > 0) return flags;
    for (std::size_t t = std::size_t(window); t < totals.size(); ++t) {
        double mean = 0.0;
        for (std::size_t k = t - std::size_t(window); k < t; ++k) mean += totals[k];
        mean /= window;
        double var = 0.0;
        for (std::size_t k = t - std::size_t(window); k < t; ++k) var += (totals[k] - mean) * (totals[k] - mean);
        const double sd = std::sqrt(var / window);
        flags[t] = totals[t] > mean + threshold * sd;
    }
    return flags;
}

std::vector<bool> regime_flags(const std::vector<FreeEnergyRecord>& records, int window, double threshold) {
    std::vector<double> totals;
    totals.reserve(records.size());
    for (const auto& r : records) totals.push_back(r.total);
    return regime_flags(totals, window, threshold);
}

CorrelationFidelity correlation_fidelity(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synthetic) {
    if (real.cols() != synthetic.cols())
        throw std::invalid_argument("correlation_fidelity: real and synthetic asset counts differ");
    CorrelationFidelity f;
    f.real = pearson_correlation(real);
    f.synthetic = pearson_correlation(synthetic);
    f.defined = f.real.defined.array() && f.synthetic.defined.array();
    f.difference = f.real.values - f.synthetic.values;
    double sum = 0.0;
    int count = 0;
    for (Index i = 0; i < real.cols(); ++i)
        for (Index j = 0; j < real.cols(); ++j)
            if (i != j && f.defined(i, j)) {
                sum += std::abs(f.difference(i, j));
                ++count;
            }
    f.score = count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
    return f;
}

std::vector<QqRow> qq_table(const Eigen::Ref<const Eigen::VectorXd>& real,
                            const Eigen::Ref<const Eigen::VectorXd>& synthetic, int n_quantiles) {
    if (n_quantiles < 1) throw std::invalid_argument("qq_table: n_quantiles must be >= 1");
    if (real.size() < n_quantiles || synthetic.size() < n_quantiles)
        throw std::invalid_argument("qq_table: fewer observations than requested quantiles");
    std::vector<double> levels(static_cast<std::size_t>(n_quantiles));
    for (int k = 0; k < n_quantiles; ++k) levels[std::size_t(k)] = double(k + 1) / double(n_quantiles + 1);
    const Eigen::VectorXd qr = quantiles(real, levels);
    const Eigen::VectorXd qs = quantiles(synthetic, levels);
    std::vector<QqRow> rows;
    for (int k = 0; k < n_quantiles; ++k) rows.push_back({levels[std::size_t(k)], qr(k), qs(k)});
    return rows;
}

}  // namespace crbm
