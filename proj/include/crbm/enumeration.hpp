#pragma once

#include "crbm/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crbm {

inline constexpr Index kMaxEnumeratedUnits = 12;

/// Binary visible configuration number `state`: unit i takes bit i.
template <typename Scalar>
Vec<Scalar> enumerated_state(Index state, Index units) {
    Vec<Scalar> v(units);
    for (Index i = 0; i < units; ++i) v(i) = Scalar((state >> i) & 1);
    return v;
}

/// Exact Boltzmann marginal P(v) for every binary visible state of a small
/// Bernoulli model, entry s holding enumerated_state(s). Normalized with a
/// log-sum-exp shift.
template <typename Scalar, typename DA, typename DB>
Vec<Scalar> exact_marginals(const ModelParams<Scalar>& m, const Eigen::MatrixBase<DA>& abias,
                            const Eigen::MatrixBase<DB>& bbias) {
    if (m.arch != Arch::bernoulli) throw std::invalid_argument("exact_marginals requires a Bernoulli model");
    const Index nv = m.visible_size();
    if (nv > kMaxEnumeratedUnits || m.hidden_size() > kMaxEnumeratedUnits)
        throw std::invalid_argument("exact_marginals: model too large to enumerate");

    const Index states = Index(1) << nv;
    Vec<Scalar> logp(states);
    for (Index s = 0; s < states; ++s) logp(s) = -free_energy(enumerated_state<Scalar>(s, nv), m, abias, bbias);
    const Scalar shift = logp.maxCoeff();
    Vec<Scalar> p = (logp.array() - shift).exp().matrix();
    return p / p.sum();
}

template <typename Scalar>
Vec<Scalar> exact_marginals(const ModelParams<Scalar>& m) {
    return exact_marginals(m, m.a, m.b);
}

template <typename Scalar>
Scalar total_variation(const Vec<Scalar>& p, const Vec<Scalar>& q) {
    return (p - q).cwiseAbs().sum() / Scalar(2);
}

}  // namespace crbm
