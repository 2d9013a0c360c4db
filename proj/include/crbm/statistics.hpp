#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace crbm {

/// Linearly interpolated empirical quantile (Hyndman-Fan type 7) of an
/// ascending-sorted sample.
double sorted_quantile(std::span<const double> sorted, double p);

/// Quantiles of a column at each probability level.
Eigen::VectorXd quantiles(const Eigen::Ref<const Eigen::VectorXd>& column, std::span<const double> levels);

/// Pearson correlation with a definedness mask. Pairs involving a
/// zero-variance column are undefined and hold NaN.
struct CorrelationMatrix {
    Eigen::MatrixXd values;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> defined;

    bool all_defined() const { return defined.all(); }
};

CorrelationMatrix pearson_correlation(const Eigen::MatrixXd& data);

/// Autocorrelation of the squared, per-column series at lags 1..max_lag.
/// Row k-1 holds lag k. NaN where undefined.
Eigen::MatrixXd squared_autocorrelation(const Eigen::MatrixXd& data, int max_lag);

}  // namespace crbm
