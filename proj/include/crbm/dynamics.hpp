#pragma once

// Autoregressive conditioning: a window of the previous `lag` observations
// shifts the visible and hidden biases, after which the CRBM at time t is a
// static RBM with those biases.

#include "crbm/rbm.hpp"

#include <stdexcept>

namespace crbm {

/// Row t of `contexts` is the flattened history v_{t-lag} .. v_{t-1}
/// (oldest block first); row t of `targets` is the observation it predicts.
template <typename Scalar>
struct WindowedSeries {
    Mat<Scalar> contexts;
    Mat<Scalar> targets;

    Index size() const { return targets.rows(); }
};

using WindowedSeriesd = WindowedSeries<double>;

/// Flattened history window ending just before `row` (exclusive).
template <typename Derived>
Vec<typename Derived::Scalar> history_window(const Eigen::MatrixBase<Derived>& rows, Index row, Index lag) {
    const Index d = rows.cols();
    Vec<typename Derived::Scalar> w(lag * d);
    for (Index k = 0; k < lag; ++k) w.segment(k * d, d) = rows.row(row - lag + k).transpose();
    return w;
}

/// Pairs every row t >= lag with its history. The first `lag` rows are
/// context only.
template <typename Derived>
WindowedSeries<typename Derived::Scalar> build_windows(const Eigen::MatrixBase<Derived>& rows, Index lag) {
    using Scalar = typename Derived::Scalar;
    if (lag < 0) throw std::invalid_argument("build_windows: negative lag");
    const Index t = rows.rows();
    if (t <= lag) throw std::invalid_argument("build_windows: series must be longer than the lag");
    const Index d = rows.cols();
    WindowedSeries<Scalar> out;
    out.contexts.resize(t - lag, lag * d);
    out.targets = rows.bottomRows(t - lag);
    for (Index i = 0; i < t - lag; ++i) out.contexts.row(i) = history_window(rows, i + lag, lag).transpose();
    return out;
}

/// Windows for `rows` whose earliest history comes from the tail of `prefix`
/// (the preceding split). Every row of `rows` becomes a target.
template <typename DP, typename DR>
WindowedSeries<typename DR::Scalar> build_windows(const Eigen::MatrixBase<DP>& prefix,
                                                  const Eigen::MatrixBase<DR>& rows, Index lag) {
    using Scalar = typename DR::Scalar;
    if (prefix.rows() < lag) throw std::invalid_argument("build_windows: context prefix shorter than lag");
    if (prefix.cols() != rows.cols()) throw std::invalid_argument("build_windows: column mismatch with prefix");
    Mat<Scalar> joined(lag + rows.rows(), rows.cols());
    joined.topRows(lag) = prefix.bottomRows(lag);
    joined.bottomRows(rows.rows()) = rows;
    return build_windows(joined, lag);
}

template <typename Derived>
Vec<typename Derived::Scalar> dynamic_hidden_bias(const Eigen::MatrixBase<Derived>& window,
                                                  const ModelParams<typename Derived::Scalar>& m) {
    if (window.size() != m.history_size())
        throw std::invalid_argument("dynamic_hidden_bias: window length does not match lag * visible");
    if (m.lag == 0) return m.b;
    return m.b + m.B.transpose() * window;
}

template <typename Derived>
Vec<typename Derived::Scalar> dynamic_visible_bias(const Eigen::MatrixBase<Derived>& window,
                                                   const ModelParams<typename Derived::Scalar>& m) {
    if (window.size() != m.history_size())
        throw std::invalid_argument("dynamic_visible_bias: window length does not match lag * visible");
    if (m.lag == 0) return m.a;
    return m.a + m.A.transpose() * window;
}

template <typename DV, typename DW>
FreeEnergyTerms<typename DV::Scalar> conditional_free_energy_terms(const Eigen::MatrixBase<DV>& v,
                                                                   const Eigen::MatrixBase<DW>& window,
                                                                   const ModelParams<typename DV::Scalar>& m) {
    return free_energy_terms(v, m, dynamic_visible_bias(window, m), dynamic_hidden_bias(window, m));
}

template <typename DV, typename DW>
typename DV::Scalar conditional_free_energy(const Eigen::MatrixBase<DV>& v, const Eigen::MatrixBase<DW>& window,
                                            const ModelParams<typename DV::Scalar>& m) {
    return conditional_free_energy_terms(v, window, m).total();
}

}  // namespace crbm
