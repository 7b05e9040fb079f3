#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pwdens/error.hpp"
#include "pwdens/numeric.hpp"
#include "pwdens/pwkernel.hpp"
#include "pwdens/spectrum.hpp"

namespace pwdens {

struct ConcentrationOptions {
    std::size_t n_nodes = 512;
    double trace_tolerance = 0.05; ///< relative trace error that triggers a resolution error
};

/// Discretized time-band concentration operator
///   (A f)(x) = int_Q K_S(x, y) f(y) dy
/// on Gauss-Legendre nodes of each interval of Q, symmetrized as D^{1/2} K D^{1/2}.
struct ConcentrationReport {
    Spectrum spectrum;
    Spectrum region;
    RVector eigenvalues; ///< nonincreasing
    double trace = 0.0;          ///< sum of computed eigenvalues
    double trace_expected = 0.0; ///< mes Q * mes S / (2 pi)
    std::vector<std::size_t> nodes_per_interval;
    QuadratureRule rule;

    double trace_relative_error() const { return std::abs(trace - trace_expected) / trace_expected; }

    std::size_t count_at_least(double c) const {
        return static_cast<std::size_t>((eigenvalues.array() >= c).count());
    }

    /// mes Q * mes S / (2 pi c)
    double landau_bound(double c) const { return trace_expected / c; }

    bool eigenvalues_in_unit_range(double tol = 1e-6) const {
        return eigenvalues.size() == 0 ||
               (eigenvalues.minCoeff() >= -tol && eigenvalues.maxCoeff() <= 1.0 + tol);
    }
};

namespace detail {

/// Nodes needed to resolve e^{i Omega x} over an interval of the given length.
inline std::size_t required_nodes(double omega, double length) {
    return static_cast<std::size_t>(std::ceil(0.5 * omega * length)) + 16;
}

} // namespace detail

inline ConcentrationReport concentration_operator(const Spectrum& s, const Spectrum& q,
                                                  const ConcentrationOptions& opts = {}) {
    if (opts.n_nodes < 32)
        throw Error(ErrorKind::invalid_parameter, "concentration operator needs n_nodes >= 32");
    ConcentrationReport rep;
    rep.spectrum = s;
    rep.region = q;
    const double total_len = q.measure();
    const double omega = s.max_abs();
    std::size_t suggested = 0;
    bool coarse = false;
    for (const auto& iv : q.intervals()) {
        const auto ni = std::max<std::size_t>(
            16, static_cast<std::size_t>(std::llround(static_cast<double>(opts.n_nodes) * iv.length() / total_len)));
        const auto need = detail::required_nodes(omega, iv.length());
        if (ni < need)
            coarse = true;
        suggested += 2 * std::max(ni, need);
        rep.nodes_per_interval.push_back(ni);
        rep.rule.append(gauss_legendre(ni, iv.left, iv.right));
    }
    if (coarse)
        throw ResolutionError("quadrature too coarse for the kernel bandwidth", suggested);

    const auto n = static_cast<Eigen::Index>(rep.rule.size());
    RVector sw(n);
    for (Eigen::Index i = 0; i < n; ++i)
        sw[i] = std::sqrt(rep.rule.weights[static_cast<std::size_t>(i)]);
    CMatrix m(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index i = k; i < n; ++i) {
            m(i, k) = sw[i] * sw[k] *
                      kernel(s, rep.rule.nodes[static_cast<std::size_t>(i)], rep.rule.nodes[static_cast<std::size_t>(k)]);
            m(k, i) = std::conj(m(i, k));
        }
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    rep.eigenvalues = es.eigenvalues().reverse();
    rep.trace = rep.eigenvalues.sum();
    rep.trace_expected = q.measure() * s.measure() / (2.0 * pi);
    if (rep.trace_relative_error() > opts.trace_tolerance)
        throw ResolutionError("trace " + std::to_string(rep.trace) + " deviates from " +
                                  std::to_string(rep.trace_expected),
                              suggested);
    return rep;
}

/// Quadrature used to measure mass on Q against total mass on the line.
/// The total is a trapezoid sum over [domain_lo, domain_hi] with spacing
/// below pi / bandwidth, which is exact for |g|^2 when g has spectrum in
/// [-bandwidth, bandwidth] (up to truncation of the domain).
struct MassQuadrature {
    Spectrum region;
    double domain_lo = 0.0;
    double domain_hi = 0.0;
    double bandwidth = pi; ///< max |t| over the spectrum of the basis functions
    std::size_t order = 16;
};

struct SubspaceConcentration {
    double c = 0.0;          ///< clamped to [0, 1]
    double raw_c = 0.0;
    double total_min = 0.0;  ///< min over unit coefficient vectors of ||sum c_m b_m||^2
    double total_max = 0.0;
    std::size_t dim = 0;
    std::size_t region_points = 0;
    std::size_t total_points = 0;
};

/// Smallest ratio int_Q |f|^2 / ||f||^2 over the span of the basis.
/// `eval(xs)` returns an |xs| x dim matrix of basis values.
template <class Eval>
SubspaceConcentration concentration_of_subspace(const Eval& eval, const MassQuadrature& mq) {
    if (!(mq.domain_lo <= mq.region.lower() && mq.region.upper() <= mq.domain_hi))
        throw Error(ErrorKind::invalid_parameter, "mass domain must contain the region Q");
    if (!(mq.bandwidth > 0.0))
        throw Error(ErrorKind::invalid_parameter, "bandwidth must be > 0");
    const double panel = std::min(2.0, static_cast<double>(mq.order) / (2.0 * mq.bandwidth));
    const auto region_rule = composite_gauss_legendre(mq.region, panel, mq.order);
    const auto total_rule = uniform_grid(mq.domain_lo, mq.domain_hi, 0.8 * pi / mq.bandwidth);

    auto mass = [&](const QuadratureRule& rule) {
        const CMatrix b = eval(std::span<const double>(rule.nodes));
        const Eigen::Map<const RVector> w(rule.weights.data(), static_cast<Eigen::Index>(rule.weights.size()));
        CMatrix out = b.adjoint() * w.asDiagonal() * b;
        return CMatrix(0.5 * (out + out.adjoint()));
    };
    const CMatrix on_q = mass(region_rule);
    const CMatrix total = mass(total_rule);

    SubspaceConcentration out;
    out.dim = static_cast<std::size_t>(total.cols());
    out.region_points = region_rule.size();
    out.total_points = total_rule.size();
    if (out.dim == 0)
        throw Error(ErrorKind::degenerate_subspace, "empty basis");
    Eigen::SelfAdjointEigenSolver<CMatrix> te(total, Eigen::EigenvaluesOnly);
    out.total_min = te.eigenvalues().minCoeff();
    out.total_max = te.eigenvalues().maxCoeff();
    if (!(out.total_min > 1e-12 * out.total_max))
        throw Error(ErrorKind::degenerate_subspace, "basis is numerically rank-deficient on the grid");
    Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> ge(on_q, total, Eigen::EigenvaluesOnly | Eigen::ABx_lx);
    out.raw_c = ge.eigenvalues().minCoeff();
    out.c = std::clamp(out.raw_c, 0.0, 1.0);
    return out;
}

struct LandauCheck {
    double bound = 0.0; ///< mes Q * mes S / (2 pi c)
    double slack = 0.0; ///< bound - dim X
    bool pass = false;
};

inline LandauCheck landau_bound_check(std::size_t dim, double c, const Spectrum& s, const Spectrum& q,
                                      double tol = 1e-9) {
    if (!(c > 0.0 && c <= 1.0))
        throw Error(ErrorKind::invalid_parameter, "concentration level c must lie in (0, 1]");
    LandauCheck lc;
    lc.bound = q.measure() * s.measure() / (2.0 * pi * c);
    lc.slack = lc.bound - static_cast<double>(dim);
    lc.pass = lc.slack >= -tol;
    return lc;
}

} // namespace pwdens
