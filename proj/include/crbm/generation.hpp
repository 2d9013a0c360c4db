#pragma once

#include "crbm/data.hpp"
#include "crbm/dynamics.hpp"
#include "crbm/random.hpp"
#include "crbm/statistics.hpp"

#include <array>
#include <optional>

namespace crbm {

inline constexpr Index kDefaultBurnIn = 20;

/// Step-by-step autoregressive sampler. Its state is the current history
/// window, the last emitted row and the random stream, so a copy resumes
/// the series exactly.
class SeriesSampler {
public:
    /// Starts from `initial` when given, else from the mean of the window blocks.
    SeriesSampler(const ModelParamsd& m, Eigen::VectorXd seed_window, Index burn_in, Rng rng,
                  std::optional<Eigen::VectorXd> initial = std::nullopt);

    /// Emits the next visible row and slides the window over it.
    Eigen::VectorXd next();

    const Eigen::VectorXd& window() const { return window_; }
    const Eigen::VectorXd& state() const { return state_; }
    const Rng& rng() const { return rng_; }

private:
    const ModelParamsd* model_;
    Eigen::VectorXd window_;
    Eigen::VectorXd state_;
    Index burn_in_;
    Rng rng_;
};

/// Autoregressive sampling. Each emitted row is the visible state after
/// burn_in + 1 Gibbs transitions under the biases of the current window,
/// started from the previous row (the window mean for the first row). The
/// window then slides forward over the emitted row.
///
/// The result carries the matrix and mode only; attach a codec before decoding.
EncodedSeries generate(const ModelParamsd& m, const Eigen::VectorXd& seed_window, Index steps, Index burn_in, Rng& rng);

/// Back to raw units: bit groups per asset for binary series, inverse
/// z-score for continuous ones.
Eigen::MatrixXd decode_series(const EncodedSeries& encoded);

inline constexpr std::array<double, 9> kSummaryQuantileLevels{0.001, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999};
inline constexpr int kSquaredAutocorrLags = 20;

struct SummaryStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;  // population
    Eigen::VectorXd skewness;
    Eigen::VectorXd excess_kurtosis;
    Eigen::MatrixXd quantiles;  // one row per kSummaryQuantileLevels entry
    CorrelationMatrix correlation;
    Eigen::MatrixXd squared_autocorr;  // row k-1 = lag k
};

SummaryStats summary_stats(const Eigen::MatrixXd& series);

}  // namespace crbm
