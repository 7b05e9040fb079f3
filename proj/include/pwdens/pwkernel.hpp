#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pwdens/error.hpp"
#include "pwdens/numeric.hpp"
#include "pwdens/spectrum.hpp"

namespace pwdens {

/// Reproducing kernel of PW_S: K(x, y) = (1/2pi) * integral over S of e^{it(x-y)} dt.
/// Per interval [a, b] with mid m and half-width h this is e^{imu} sin(hu)/(pi u), u = x - y.
inline cplx kernel(const Spectrum& s, double x, double y) noexcept {
    const double u = x - y;
    cplx sum = 0.0;
    for (const auto& iv : s.intervals()) {
        const double h = 0.5 * iv.length();
        const double mag = (h / pi) * sinc(h * u);
        const double m = iv.mid();
        sum += m == 0.0 ? cplx(mag, 0.0) : std::polar(mag, m * u);
    }
    return sum;
}

/// K(xs[i], ys[k]).
inline CMatrix cross_kernel(const Spectrum& s, std::span<const double> xs, std::span<const double> ys) {
    CMatrix out(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
    for (Eigen::Index k = 0; k < out.cols(); ++k)
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            out(i, k) = kernel(s, xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(k)]);
    return out;
}

inline void check_distinct(std::span<const double> nodes) {
    if (nodes.empty())
        throw Error(ErrorKind::invalid_nodes, "node list is empty");
    std::vector<double> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] == sorted[i - 1])
            throw Error(ErrorKind::invalid_nodes,
                        "duplicate node " + std::to_string(sorted[i]));
}

/// Hermitian positive semidefinite Gram matrix G[j][k] = K(nodes[j], nodes[k]).
inline CMatrix gram(const Spectrum& s, std::span<const double> nodes) {
    check_distinct(nodes);
    const auto n = static_cast<Eigen::Index>(nodes.size());
    CMatrix g(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        g(k, k) = cplx(s.measure() / (2.0 * pi), 0.0);
        for (Eigen::Index j = 0; j < k; ++j) {
            g(j, k) = kernel(s, nodes[static_cast<std::size_t>(j)], nodes[static_cast<std::size_t>(k)]);
            g(k, j) = std::conj(g(j, k));
        }
    }
    return g;
}

/// f(x) = sum_k coeffs[k] K(x, nodes[k]); an element of PW_S by construction.
struct PWFunction {
    Spectrum spectrum;
    std::vector<double> nodes;
    CVector coeffs;

    cplx operator()(double x) const {
        cplx v = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            v += coeffs[static_cast<Eigen::Index>(k)] * kernel(spectrum, x, nodes[k]);
        return v;
    }

    CVector eval(std::span<const double> xs) const { return cross_kernel(spectrum, xs, nodes) * coeffs; }

    /// L2 norm from the coefficients: sqrt(c* G c).
    double norm(const CMatrix& g) const { return std::sqrt(std::max(0.0, coeffs.dot(g * coeffs).real())); }
    double norm() const { return norm(gram(spectrum, nodes)); }
};

struct InterpolationReport {
    std::size_t index = 0; ///< position of the target in the evaluation list
    double node = 0.0;
    double mu = 0.0;
    double residual_l2 = 0.0; ///< ||f|_points - e_j||
    double norm_l2 = 0.0;     ///< ||f||_{L2}
    double window_lo = 0.0;
    double window_hi = 0.0;
};

inline constexpr double ill_conditioning_threshold = 1e12;

/// Ridge solver on a fixed node set: (G + mu I) c = e_j, sharing one
/// eigendecomposition of G across targets and regularization values.
class RidgeSolver {
public:
    RidgeSolver(Spectrum s, std::vector<double> nodes)
        : spectrum_(std::move(s)), nodes_(std::move(nodes)), gram_(gram(spectrum_, nodes_)), eig_(gram_) {
        if (eig_.info() != Eigen::Success)
            throw Error(ErrorKind::ill_conditioned, "Gram eigendecomposition failed");
    }

    const CMatrix& gram_matrix() const noexcept { return gram_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const Spectrum& spectrum() const noexcept { return spectrum_; }

    RVector eigenvalues() const { return eig_.eigenvalues(); }

    double condition() const {
        const double hi = eig_.eigenvalues().maxCoeff();
        const double lo = eig_.eigenvalues().minCoeff();
        return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }

    std::pair<PWFunction, InterpolationReport> solve(std::size_t j, double mu) const {
        if (j >= nodes_.size())
            throw Error(ErrorKind::invalid_parameter, "target index " + std::to_string(j) + " out of range");
        if (!(mu >= 0.0) || !std::isfinite(mu))
            throw Error(ErrorKind::invalid_parameter, "regularization mu must be finite and >= 0");
        if (mu == 0.0 && condition() > ill_conditioning_threshold)
            throw Error(ErrorKind::ill_conditioned,
                        "Gram condition number " + std::to_string(condition()) +
                            " exceeds 1e12; use mu > 0");
        const auto& u = eig_.eigenvectors();
        const RVector lam = eig_.eigenvalues().cwiseMax(0.0);
        const CVector proj = u.row(static_cast<Eigen::Index>(j)).adjoint();
        CVector scaled(proj.size());
        for (Eigen::Index i = 0; i < proj.size(); ++i) {
            const double den = lam[i] + mu;
            scaled[i] = den > 0.0 ? proj[i] / den : cplx(0.0);
        }
        PWFunction f{spectrum_, nodes_, u * scaled};
        CVector r = gram_ * f.coeffs;
        r[static_cast<Eigen::Index>(j)] -= 1.0;
        InterpolationReport rep;
        rep.index = j;
        rep.node = nodes_[j];
        rep.mu = mu;
        rep.residual_l2 = r.norm();
        rep.norm_l2 = f.norm(gram_);
        rep.window_lo = nodes_.front();
        rep.window_hi = nodes_.back();
        return {std::move(f), rep};
    }

private:
    Spectrum spectrum_;
    std::vector<double> nodes_;
    CMatrix gram_;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig_;
};

inline std::pair<PWFunction, InterpolationReport> ridge_interpolant(const Spectrum& s, std::vector<double> nodes,
                                                                    std::size_t j, double mu) {
    return RidgeSolver(s, std::move(nodes)).solve(j, mu);
}

/// Least-squares ridge against a wider evaluation set E containing the nodes:
/// minimize ||A c - e_j||^2 + mu c* G c with A = K(E, nodes). With E equal to
/// the nodes this is the plain ridge. Residuals count every point of E, so
/// functions that leak outside the kernel window are charged for it.
class ExtendedRidge {
public:
    struct Batch {
        CMatrix coeffs;                   ///< nodes x targets
        std::vector<double> residual_l2;  ///< per target, over all of E
        std::vector<double> norm_l2;
    };

    ExtendedRidge(Spectrum s, std::vector<double> nodes, std::vector<double> eval_points)
        : spectrum_(std::move(s)), nodes_(std::move(nodes)), eval_(std::move(eval_points)) {
        check_distinct(eval_);
        gram_ = gram(spectrum_, nodes_);
        a_ = cross_kernel(spectrum_, eval_, nodes_);
        normal_ = CMatrix::Zero(a_.cols(), a_.cols());
        normal_.selfadjointView<Eigen::Lower>().rankUpdate(a_.adjoint());
        normal_ = normal_.selfadjointView<Eigen::Lower>();
    }

    const Spectrum& spectrum() const noexcept { return spectrum_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& eval_points() const noexcept { return eval_; }
    const CMatrix& gram_matrix() const noexcept { return gram_; }
    const CMatrix& design() const noexcept { return a_; }

    double normal_condition() const {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(normal_, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        return lo > 0.0 ? es.eigenvalues().maxCoeff() / lo : std::numeric_limits<double>::infinity();
    }

    /// Solves for the delta targets at the given evaluation indices.
    /// Residuals are evaluated directly as ||A c - e||.
    Batch solve(std::span<const std::size_t> targets, double mu) const {
        if (!(mu >= 0.0) || !std::isfinite(mu))
            throw Error(ErrorKind::invalid_parameter, "regularization mu must be finite and >= 0");
        if (mu == 0.0 && normal_condition() > ill_conditioning_threshold)
            throw Error(ErrorKind::ill_conditioned, "normal matrix is ill-conditioned at mu = 0; use mu > 0");
        const auto m = static_cast<Eigen::Index>(targets.size());
        CMatrix rhs(a_.cols(), m);
        for (Eigen::Index t = 0; t < m; ++t) {
            const auto i = static_cast<Eigen::Index>(targets[static_cast<std::size_t>(t)]);
            if (i >= a_.rows())
                throw Error(ErrorKind::invalid_parameter, "target index out of range");
            rhs.col(t) = a_.row(i).adjoint();
        }
        CMatrix h = normal_ + mu * gram_;
        Batch out;
        out.coeffs = h.ldlt().solve(rhs);
        CMatrix res = a_ * out.coeffs;
        CMatrix gc = gram_ * out.coeffs;
        out.residual_l2.resize(targets.size());
        out.norm_l2.resize(targets.size());
        for (Eigen::Index t = 0; t < m; ++t) {
            res(static_cast<Eigen::Index>(targets[static_cast<std::size_t>(t)]), t) -= 1.0;
            out.residual_l2[static_cast<std::size_t>(t)] = res.col(t).norm();
            out.norm_l2[static_cast<std::size_t>(t)] =
                std::sqrt(std::max(0.0, out.coeffs.col(t).dot(gc.col(t)).real()));
        }
        return out;
    }

private:
    Spectrum spectrum_;
    std::vector<double> nodes_;
    std::vector<double> eval_;
    CMatrix gram_;
    CMatrix a_;
    CMatrix normal_;
};

struct FrameBound {
    double constant = 0.0; ///< largest C with ||f|| >= C ||f|_nodes|| on PW_S
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    bool rank_deficient = false;
};

/// ||f|_nodes||^2 <= lambda_max(G) ||f||^2 for all f in PW_S, so C = 1/sqrt(lambda_max).
inline FrameBound empirical_frame_bound(const Spectrum& s, std::span<const double> nodes) {
    const CMatrix g = gram(s, nodes);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
    FrameBound fb;
    fb.lambda_max = es.eigenvalues().maxCoeff();
    fb.lambda_min = es.eigenvalues().minCoeff();
    fb.constant = 1.0 / std::sqrt(fb.lambda_max);
    fb.rank_deficient = fb.lambda_min <= 1e-12 * fb.lambda_max;
    return fb;
}

} // namespace pwdens
