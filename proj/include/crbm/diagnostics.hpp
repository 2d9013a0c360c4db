#pragma once

#include "crbm/data.hpp"
#include "crbm/dynamics.hpp"
#include "crbm/statistics.hpp"

#include <optional>
#include <span>
#include <vector>

namespace crbm {

/// Per-date conditional free energy and its two components. `structural` is
/// minus the softplus sum and never positive. `quadratic` is the Gaussian
/// reconstruction penalty, or the linear bias term -a.v for Bernoulli models.
struct FreeEnergyRecord {
    std::optional<Date> date;
    Index row = 0;  // target row in the scored series
    double total = 0.0;
    double quadratic = 0.0;
    double structural = 0.0;
};

/// Scores every row t >= lag of the series against its own history.
std::vector<FreeEnergyRecord> free_energy_series(const EncodedSeries& encoded, const ModelParamsd& m);

inline constexpr int kDefaultFlagWindow = 60;
inline constexpr double kDefaultFlagThreshold = 4.0;

/// Flags value t when it exceeds mean + threshold * std (population) of the
/// previous `window` values. The first `window` values are never flagged.
std::vector<bool> regime_flags(std::span<const double> totals, int window, double threshold);
std::vector<bool> regime_flags(const std::vector<FreeEnergyRecord>& records, int window, double threshold);

struct CorrelationFidelity {
    Eigen::MatrixXd difference;  // real minus synthetic
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> defined;
    /// Mean absolute off-diagonal difference over defined pairs; NaN if none.
    double score = 0.0;
    CorrelationMatrix real;
    CorrelationMatrix synthetic;
};

CorrelationFidelity correlation_fidelity(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synthetic);

struct QqRow {
    double level;
    double real;
    double synthetic;
};

/// Matched empirical quantiles at levels k / (n + 1), k = 1..n.
std::vector<QqRow> qq_table(const Eigen::Ref<const Eigen::VectorXd>& real,
                            const Eigen::Ref<const Eigen::VectorXd>& synthetic, int n_quantiles);

}  // namespace crbm
