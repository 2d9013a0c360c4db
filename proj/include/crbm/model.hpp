#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace crbm {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

enum class Arch { bernoulli, gaussian };

inline const char* to_string(Arch arch) { return arch == Arch::bernoulli ? "bernoulli" : "gaussian"; }

inline Arch parse_arch(const std::string& s) {
    if (s == "bernoulli") return Arch::bernoulli;
    if (s == "gaussian") return Arch::gaussian;
    throw std::invalid_argument("unknown architecture '" + s + "' (expected bernoulli or gaussian)");
}

/// Full CRBM parameterization.
///
/// W is visible x hidden, A is (lag*visible) x visible and B is
/// (lag*visible) x hidden. A lag of zero is a static RBM with empty A and B.
/// sigma only enters the Gaussian energy; it is kept at one for z-scored inputs.
template <typename Scalar>
struct ModelParams {
    Arch arch = Arch::gaussian;
    Index lag = 0;
    Mat<Scalar> W;
    Vec<Scalar> a;
    Vec<Scalar> b;
    Vec<Scalar> sigma;
    Mat<Scalar> A;
    Mat<Scalar> B;

    static ModelParams zeros(Arch arch, Index visible, Index hidden, Index lag) {
        ModelParams m;
        m.arch = arch;
        m.lag = lag;
        m.W = Mat<Scalar>::Zero(visible, hidden);
        m.a = Vec<Scalar>::Zero(visible);
        m.b = Vec<Scalar>::Zero(hidden);
        m.sigma = Vec<Scalar>::Ones(visible);
        m.A = Mat<Scalar>::Zero(lag * visible, visible);
        m.B = Mat<Scalar>::Zero(lag * visible, hidden);
        return m;
    }

    Index visible_size() const { return W.rows(); }
    Index hidden_size() const { return W.cols(); }
    Index history_size() const { return lag * visible_size(); }

    /// Throws std::invalid_argument when shapes disagree, an entry is not
    /// finite, or a scale is not positive.
    void validate() const {
        const Index nv = visible_size();
        const Index nh = hidden_size();
        const Index nk = history_size();
        if (lag < 0) throw std::invalid_argument("lag must be non-negative");
        if (a.size() != nv || sigma.size() != nv || b.size() != nh)
            throw std::invalid_argument("bias or scale length does not match W");
        if (A.rows() != nk || A.cols() != nv || B.rows() != nk || B.cols() != nh)
            throw std::invalid_argument("autoregressive matrix shape does not match lag and W");
        if (!W.allFinite() || !a.allFinite() || !b.allFinite() || !sigma.allFinite() || !A.allFinite() ||
            !B.allFinite())
            throw std::invalid_argument("model parameters contain non-finite entries");
        if ((sigma.array() <= Scalar(0)).any()) throw std::invalid_argument("sigma must be positive");
    }

    template <typename Other>
    ModelParams<Other> cast() const {
        ModelParams<Other> m;
        m.arch = arch;
        m.lag = lag;
        m.W = W.template cast<Other>();
        m.a = a.template cast<Other>();
        m.b = b.template cast<Other>();
        m.sigma = sigma.template cast<Other>();
        m.A = A.template cast<Other>();
        m.B = B.template cast<Other>();
        return m;
    }
};

using ModelParamsd = ModelParams<double>;

}  // namespace crbm
