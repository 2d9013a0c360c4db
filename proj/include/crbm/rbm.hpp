#pragma once

// Static RBM mathematics shared by the Bernoulli-Bernoulli and
// Gaussian-Bernoulli variants. Every function takes the effective visible and
// hidden biases explicitly so the same code scores a CRBM at shifted biases.

#include "crbm/model.hpp"
#include "crbm/random.hpp"

#include <cmath>
#include <stdexcept>

namespace crbm {

/// ln(1 + e^x), stable for large |x|.
template <typename Scalar>
Scalar softplus(Scalar x) {
    using std::abs;
    using std::exp;
    using std::log1p;
    using std::max;
    return max(x, Scalar(0)) + log1p(exp(-abs(x)));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
    using std::exp;
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
    const Scalar e = exp(x);
    return e / (Scalar(1) + e);
}

/// Free energy split into the visible term and the hidden softplus term.
/// For the Gaussian variant `quadratic` is sum (v-a)^2 / 2 sigma^2; for the
/// Bernoulli variant it holds the linear term -a.v.
template <typename Scalar>
struct FreeEnergyTerms {
    Scalar quadratic{0};
    Scalar structural{0};
    Scalar total() const { return quadratic + structural; }
};

enum class Reconstruction { mean, sample };

namespace detail {

template <typename Scalar>
void check_visible(Index n, const ModelParams<Scalar>& m, const char* what) {
    if (n != m.visible_size()) throw std::invalid_argument(std::string(what) + ": visible length does not match model");
}

template <typename Scalar>
void check_hidden(Index n, const ModelParams<Scalar>& m, const char* what) {
    if (n != m.hidden_size()) throw std::invalid_argument(std::string(what) + ": hidden length does not match model");
}

}  // namespace detail

/// v as seen by the weights: v itself (Bernoulli) or v / sigma (Gaussian).
template <typename Derived>
Vec<typename Derived::Scalar> scaled_visible(const Eigen::MatrixBase<Derived>& v,
                                             const ModelParams<typename Derived::Scalar>& m) {
    if (m.arch == Arch::bernoulli) return v;
    return v.cwiseQuotient(m.sigma);
}

template <typename DV, typename DH, typename DA, typename DB>
typename DV::Scalar energy(const Eigen::MatrixBase<DV>& v, const Eigen::MatrixBase<DH>& h,
                           const ModelParams<typename DV::Scalar>& m, const Eigen::MatrixBase<DA>& abias,
                           const Eigen::MatrixBase<DB>& bbias) {
    using Scalar = typename DV::Scalar;
    detail::check_visible(v.size(), m, "energy");
    detail::check_visible(abias.size(), m, "energy");
    detail::check_hidden(h.size(), m, "energy");
    detail::check_hidden(bbias.size(), m, "energy");

    const Vec<Scalar> vs = scaled_visible(v, m);
    const Scalar interaction = vs.dot(m.W * h);
    const Scalar hidden = bbias.dot(h);
    if (m.arch == Arch::bernoulli) return -abias.dot(v) - hidden - interaction;
    const Scalar quad = ((v - abias).cwiseQuotient(m.sigma)).squaredNorm() / Scalar(2);
    return quad - hidden - interaction;
}

template <typename DV, typename DA, typename DB>
FreeEnergyTerms<typename DV::Scalar> free_energy_terms(const Eigen::MatrixBase<DV>& v,
                                                       const ModelParams<typename DV::Scalar>& m,
                                                       const Eigen::MatrixBase<DA>& abias,
                                                       const Eigen::MatrixBase<DB>& bbias) {
    using Scalar = typename DV::Scalar;
    detail::check_visible(v.size(), m, "free_energy");
    detail::check_visible(abias.size(), m, "free_energy");
    detail::check_hidden(bbias.size(), m, "free_energy");

    const Vec<Scalar> pre = bbias + m.W.transpose() * scaled_visible(v, m);
    FreeEnergyTerms<Scalar> t;
    for (Index j = 0; j < pre.size(); ++j) t.structural -= softplus(pre(j));
    if (m.arch == Arch::bernoulli)
        t.quadratic = -abias.dot(v);
    else
        t.quadratic = ((v - abias).cwiseQuotient(m.sigma)).squaredNorm() / Scalar(2);
    return t;
}

template <typename DV, typename DA, typename DB>
typename DV::Scalar free_energy(const Eigen::MatrixBase<DV>& v, const ModelParams<typename DV::Scalar>& m,
                                const Eigen::MatrixBase<DA>& abias, const Eigen::MatrixBase<DB>& bbias) {
    return free_energy_terms(v, m, abias, bbias).total();
}

/// P(h_j = 1 | v) under hidden bias `bbias`.
template <typename DV, typename DB>
Vec<typename DV::Scalar> hidden_activation_probs(const Eigen::MatrixBase<DV>& v,
                                                 const ModelParams<typename DV::Scalar>& m,
                                                 const Eigen::MatrixBase<DB>& bbias) {
    using Scalar = typename DV::Scalar;
    detail::check_visible(v.size(), m, "hidden_activation_probs");
    detail::check_hidden(bbias.size(), m, "hidden_activation_probs");
    Vec<Scalar> p = bbias + m.W.transpose() * scaled_visible(v, m);
    return p.unaryExpr([](Scalar x) { return sigmoid(x); });
}

template <typename Derived>
Vec<typename Derived::Scalar> sample_hidden(const Eigen::MatrixBase<Derived>& p, Rng& rng) {
    using Scalar = typename Derived::Scalar;
    Vec<Scalar> h(p.size());
    for (Index j = 0; j < p.size(); ++j) h(j) = rng.uniform() < p(j) ? Scalar(1) : Scalar(0);
    return h;
}

/// Conditional mean of the visible layer given hidden state h: the Gaussian
/// mean abias + sigma * W h, or the Bernoulli probability sigmoid(abias + W h).
template <typename DH, typename DA>
Vec<typename DH::Scalar> visible_mean(const Eigen::MatrixBase<DH>& h, const ModelParams<typename DH::Scalar>& m,
                                      const Eigen::MatrixBase<DA>& abias) {
    using Scalar = typename DH::Scalar;
    detail::check_hidden(h.size(), m, "visible_reconstruction");
    detail::check_visible(abias.size(), m, "visible_reconstruction");
    if (m.arch == Arch::gaussian) return abias + m.sigma.cwiseProduct(m.W * h);
    Vec<Scalar> pre = abias + m.W * h;
    return pre.unaryExpr([](Scalar x) { return sigmoid(x); });
}

template <typename DH, typename DA>
Vec<typename DH::Scalar> visible_reconstruction(const Eigen::MatrixBase<DH>& h,
                                                const ModelParams<typename DH::Scalar>& m,
                                                const Eigen::MatrixBase<DA>& abias, Rng& rng, Reconstruction mode) {
    using Scalar = typename DH::Scalar;
    Vec<Scalar> v = visible_mean(h, m, abias);
    if (mode == Reconstruction::mean) return v;
    if (m.arch == Arch::gaussian) {
        for (Index i = 0; i < v.size(); ++i) v(i) += m.sigma(i) * Scalar(rng.normal());
    } else {
        for (Index i = 0; i < v.size(); ++i) v(i) = rng.uniform() < v(i) ? Scalar(1) : Scalar(0);
    }
    return v;
}

template <typename Scalar>
struct GibbsState {
    Vec<Scalar> v;
    Vec<Scalar> h;
};

/// One block Gibbs transition: h ~ P(h | v), then v' ~ P(v | h).
template <typename DV, typename DA, typename DB>
GibbsState<typename DV::Scalar> gibbs_step(const Eigen::MatrixBase<DV>& v, const ModelParams<typename DV::Scalar>& m,
                                           const Eigen::MatrixBase<DA>& abias, const Eigen::MatrixBase<DB>& bbias,
                                           Rng& rng) {
    GibbsState<typename DV::Scalar> s;
    s.h = sample_hidden(hidden_activation_probs(v, m, bbias), rng);
    s.v = visible_reconstruction(s.h, m, abias, rng, Reconstruction::sample);
    return s;
}

}  // namespace crbm
