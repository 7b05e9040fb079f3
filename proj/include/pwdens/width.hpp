#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pwdens/error.hpp"
#include "pwdens/numeric.hpp"

namespace pwdens {

struct SingularProfile {
    RVector values;        ///< s_1 >= ... >= s_n
    CMatrix right_vectors; ///< column k pairs with values[k]
    CMatrix left_vectors;
};

inline SingularProfile singular_profile(const CMatrix& t) {
    Eigen::BDCSVD<CMatrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.singularValues(), svd.matrixV(), svd.matrixU()};
}

inline double hilbert_schmidt_sq(const CMatrix& t) { return t.squaredNorm(); }

/// min over unit x in span(basis) of ||T x||; basis columns must be orthonormal.
inline double min_gain(const CMatrix& t, const CMatrix& basis) {
    if (basis.cols() == 0)
        return 0.0;
    Eigen::BDCSVD<CMatrix> svd(t * basis);
    return svd.singularValues()[basis.cols() - 1];
}

/// Orthonormal basis of a random k-dimensional complex subspace of C^n.
template <class Rng>
CMatrix random_subspace(Eigen::Index n, Eigen::Index k, Rng& rng) {
    std::normal_distribution<double> g;
    CMatrix m(n, k);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            m(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<CMatrix> qr(m);
    return qr.householderQ() * CMatrix::Identity(n, k);
}

struct SvPropertyReport {
    double hs_max_relative_error = 0.0;   ///< (a) over T1, T2, T1 + T2
    double maximin_max_error = 0.0;       ///< (b) top-k right subspace vs s_k
    std::size_t maximin_random_violations = 0;
    std::size_t additivity_checks = 0;    ///< (c) pairs (k, j) with k + j <= n
    std::size_t additivity_violations = 0;
    double additivity_max_excess = 0.0;
    std::vector<std::size_t> maximin_ks;
    bool ok(double tol = 1e-9) const {
        return hs_max_relative_error <= tol && maximin_max_error <= 10 * tol && maximin_random_violations == 0 &&
               additivity_violations == 0;
    }
};

/// Checks the Hilbert-Schmidt identity, the maximin principle (at `ks`, via
/// the top-k right singular subspace and `random_trials` random subspaces)
/// and s_{k+j}(T1 + T2) <= s_k(T1) + s_j(T2) for all k + j <= n.
/// Failures are reported, never thrown.
inline SvPropertyReport check_sv_properties(const CMatrix& t1, const CMatrix& t2, std::vector<std::size_t> ks,
                                            std::size_t random_trials = 20, std::uint64_t seed = 1,
                                            double tol = 1e-9) {
    if (t1.rows() != t2.rows() || t1.cols() != t2.cols() || t1.rows() != t1.cols())
        throw Error(ErrorKind::invalid_input, "property check needs two square matrices of equal shape");
    SvPropertyReport rep;
    const CMatrix sum = t1 + t2;
    const auto p1 = singular_profile(t1);
    const auto p2 = singular_profile(t2);
    const auto ps = singular_profile(sum);
    auto hs_err = [](const CMatrix& m, const SingularProfile& p) {
        const double direct = hilbert_schmidt_sq(m);
        const double via = p.values.squaredNorm();
        return direct > 0.0 ? std::abs(direct - via) / direct : std::abs(via);
    };
    rep.hs_max_relative_error = std::max({hs_err(t1, p1), hs_err(t2, p2), hs_err(sum, ps)});

    const auto n = static_cast<std::size_t>(t1.rows());
    std::mt19937_64 rng(seed);
    rep.maximin_ks = ks;
    for (std::size_t k : ks) {
        if (k < 1 || k > n)
            throw Error(ErrorKind::invalid_parameter, "maximin index k out of range");
        const auto kk = static_cast<Eigen::Index>(k);
        const double sk = p1.values[kk - 1];
        const double top = min_gain(t1, p1.right_vectors.leftCols(kk));
        rep.maximin_max_error = std::max(rep.maximin_max_error, std::abs(top - sk) / std::max(1.0, sk));
        for (std::size_t trial = 0; trial < random_trials; ++trial) {
            const double g = min_gain(t1, random_subspace(t1.rows(), kk, rng));
            if (g > sk + tol * std::max(1.0, sk))
                ++rep.maximin_random_violations;
        }
    }

    for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t j = 1; k + j <= n; ++j) {
            ++rep.additivity_checks;
            const double lhs = ps.values[static_cast<Eigen::Index>(k + j - 1)];
            const double rhs = p1.values[static_cast<Eigen::Index>(k - 1)] + p2.values[static_cast<Eigen::Index>(j - 1)];
            const double excess = (lhs - rhs) / std::max(1.0, rhs);
            rep.additivity_max_excess = std::max(rep.additivity_max_excess, excess);
            if (excess > tol)
                ++rep.additivity_violations;
        }
    }
    return rep;
}

struct WidthResult {
    CMatrix subspace_basis; ///< orthonormal columns spanning X in coefficient space
    std::size_t dim = 0;
    std::size_t n = 0;
    double alpha = 0.0;
    double d = 0.0;
    double certified_bound = 0.0; ///< (1 - 1/alpha)^2, guaranteed
    double measured_bound = 0.0;  ///< s_k(T1)^2, the true minimum on X
    double stated_constant = 0.0; ///< 1 - 1/alpha
    bool stated_constant_met = false;
    double max_perturbation = 0.0; ///< max_j ||v_j - u_j||
    RVector t1_values;
    RVector t2_values;
    bool t2_profile_ok = false; ///< s_j(I - T1) <= d sqrt(n/j) for all j
    std::size_t span_rank = 0;  ///< numerical rank of span{v_j} at 1e-8
};

inline std::size_t numerical_rank(const RVector& sv, double threshold = 1e-8) {
    const double cut = threshold * std::max(1.0, sv.size() ? sv[0] : 0.0);
    return static_cast<std::size_t>((sv.array() > cut).count());
}

/// Given the columns v_j of t1 with ||v_j - u_j|| <= d, extracts the span of
/// the top k = floor((1 - alpha^2 d^2) n) right singular vectors of T1. On it
/// ||sum c_j v_j||^2 >= s_k(T1)^2 |c|^2 >= (1 - 1/alpha)^2 |c|^2.
inline WidthResult extract_subspace(const CMatrix& t1, double d, double alpha) {
    if (t1.rows() != t1.cols() || t1.rows() == 0)
        throw Error(ErrorKind::invalid_input, "vector family must form a nonempty square matrix");
    if (!(d >= 0.0 && d < 1.0))
        throw Error(ErrorKind::invalid_parameter, "perturbation level d must lie in [0, 1)");
    if (!(alpha > 1.0) || (d > 0.0 && !(alpha * d < 1.0)))
        throw Error(ErrorKind::invalid_parameter, "alpha must lie in (1, 1/d)");
    const auto n = static_cast<std::size_t>(t1.rows());
    const auto ni = t1.rows();

    WidthResult res;
    res.n = n;
    res.alpha = alpha;
    res.d = d;
    const double slack = 1e-12 * std::max(1.0, d);
    for (Eigen::Index j = 0; j < ni; ++j) {
        CVector diff = t1.col(j);
        diff[j] -= 1.0;
        const double dist = diff.norm();
        res.max_perturbation = std::max(res.max_perturbation, dist);
        if (dist > d + slack)
            throw PreconditionError(static_cast<std::size_t>(j), dist, d);
    }

    const double target = (1.0 - alpha * alpha * d * d) * static_cast<double>(n);
    if (target <= 1.0)
        throw Error(ErrorKind::subspace_too_small,
                    "(1 - alpha^2 d^2) n = " + std::to_string(target) + " <= 1");
    const auto k = std::min(n, static_cast<std::size_t>(std::floor(target + 1e-9)));

    const auto p1 = singular_profile(t1);
    const CMatrix t2 = CMatrix::Identity(ni, ni) - t1;
    Eigen::BDCSVD<CMatrix> svd2(t2);
    res.t1_values = p1.values;
    res.t2_values = svd2.singularValues();
    res.t2_profile_ok = true;
    for (std::size_t j = 1; j <= n; ++j) {
        const double cap = d * std::sqrt(static_cast<double>(n) / static_cast<double>(j));
        if (res.t2_values[static_cast<Eigen::Index>(j - 1)] > cap * (1.0 + 1e-12) + 1e-14)
            res.t2_profile_ok = false;
    }
    res.span_rank = numerical_rank(p1.values);

    res.dim = k;
    res.subspace_basis = p1.right_vectors.leftCols(static_cast<Eigen::Index>(k));
    const double sk = p1.values[static_cast<Eigen::Index>(k - 1)];
    res.measured_bound = sk * sk;
    res.stated_constant = 1.0 - 1.0 / alpha;
    res.certified_bound = res.stated_constant * res.stated_constant;
    res.stated_constant_met = res.measured_bound >= res.stated_constant;
    return res;
}

} // namespace pwdens
