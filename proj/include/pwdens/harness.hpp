#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pwdens/concentration.hpp"
#include "pwdens/error.hpp"
#include "pwdens/numeric.hpp"
#include "pwdens/pointset.hpp"
#include "pwdens/pwkernel.hpp"
#include "pwdens/spectrum.hpp"
#include "pwdens/width.hpp"
#include "pwdens/windows.hpp"

namespace pwdens {

/// Norm growth model ||f_j|| <= C exp(|j|^gamma).
struct Growth {
    double C = 1.0;
    double gamma = 0.5;

    /// Budget for the point labelled j (labels relative to 0); |j| is floored
    /// at 1 so the origin gets the same budget as its neighbours.
    double budget(long j) const {
        const double m = std::max(1.0, std::abs(static_cast<double>(j)));
        return C * std::exp(std::pow(m, gamma));
    }
};

enum class BoundMode { theorem1, theorem2 };

inline std::string_view to_string(BoundMode m) noexcept {
    return m == BoundMode::theorem1 ? "theorem1-D+" : "theorem2-D*";
}

struct TheoremInstance {
    std::string id;
    Spectrum spectrum;
    PointSet points;
    std::vector<double> radii{25.0, 50.0, 100.0};
    std::vector<double> centers; ///< empty: 0 if inside the data range, else its midpoint
    std::vector<double> mu_grid{0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0};
    std::optional<double> alpha;
    double delta = 0.05;
    double epsilon = 0.05;
    std::optional<Growth> growth;
    std::optional<double> beta;        ///< product-window decay; default (1 + gamma) / 2
    std::optional<double> norm_budget; ///< Theorem 1; default 10 sqrt(2 pi / mes S)
    double kernel_span = 3.0;          ///< kernel nodes: Lambda(a, kernel_span r)
    double eval_span = 20.0;           ///< residual counted over Lambda(a, eval_span r)
    std::vector<double> density_radii; ///< empty: geometric schedule from max radius
};

inline double default_norm_budget(const Spectrum& s) { return 10.0 * std::sqrt(2.0 * pi / s.measure()); }

inline double default_alpha(double d) { return d < 1e-12 ? 2.0 : 0.5 * (1.0 + 1.0 / d); }

inline double effective_beta(const TheoremInstance& inst) {
    if (inst.beta)
        return *inst.beta;
    return inst.growth ? 0.5 * (1.0 + inst.growth->gamma) : 0.5;
}

inline std::vector<double> effective_centers(const TheoremInstance& inst, BoundMode mode) {
    if (mode == BoundMode::theorem2)
        return {0.0};
    if (!inst.centers.empty())
        return inst.centers;
    const double lo = inst.points.lo();
    const double hi = inst.points.hi();
    return {lo <= 0.0 && 0.0 <= hi ? 0.0 : 0.5 * (lo + hi)};
}

inline std::vector<double> effective_density_radii(const TheoremInstance& inst, BoundMode mode) {
    if (!inst.density_radii.empty())
        return inst.density_radii;
    const double reach = mode == BoundMode::theorem1 ? inst.points.hi() - inst.points.lo()
                                                     : 2.0 * std::max(inst.points.hi(), -inst.points.lo());
    const double r0 = inst.radii.back();
    std::vector<double> out{mode == BoundMode::theorem1 ? r0 : r0};
    while (2.0 * out.back() <= 0.5 * reach)
        out.push_back(2.0 * out.back());
    return out;
}

inline void validate(const TheoremInstance& inst, BoundMode mode) {
    detail::check_radii(inst.radii);
    if (inst.mu_grid.empty())
        throw Error(ErrorKind::invalid_parameter, "mu grid is empty");
    for (double mu : inst.mu_grid)
        if (!(mu >= 0.0) || !std::isfinite(mu))
            throw Error(ErrorKind::invalid_parameter, "mu grid values must be finite and >= 0");
    if (!(inst.delta > 0.0))
        throw Error(ErrorKind::invalid_parameter, "delta must be > 0");
    if (!(inst.epsilon > 0.0 && inst.epsilon < 1.0))
        throw Error(ErrorKind::invalid_parameter, "epsilon must lie in (0, 1)");
    if (inst.alpha && !(*inst.alpha > 1.0))
        throw Error(ErrorKind::invalid_parameter, "alpha must be > 1");
    if (inst.norm_budget && !(*inst.norm_budget > 0.0))
        throw Error(ErrorKind::invalid_parameter, "norm budget must be > 0");
    if (!(inst.kernel_span >= 1.0) || !(inst.eval_span >= inst.kernel_span))
        throw Error(ErrorKind::invalid_parameter, "need 1 <= kernel_span <= eval_span");
    if (mode == BoundMode::theorem2) {
        if (!inst.growth)
            throw Error(ErrorKind::invalid_parameter, "Theorem 2 mode needs a growth model");
        const auto& g = *inst.growth;
        if (!(g.C > 0.0))
            throw Error(ErrorKind::invalid_parameter, "growth constant C must be > 0");
        if (!(g.gamma > 0.0 && g.gamma < 1.0))
            throw Error(ErrorKind::invalid_parameter, "growth exponent gamma must lie in (0, 1)");
        const double beta = effective_beta(inst);
        if (!(beta > g.gamma && beta < 1.0))
            throw Error(ErrorKind::invalid_parameter, "need gamma < beta < 1");
    }
}

// --- window certificates ------------------------------------------------------

struct IndexCertificate {
    double node = 0.0;
    long label = 0;                 ///< position relative to the first point >= 0
    std::size_t eval_index = 0;     ///< row of the target within eval_points
    double mu = 0.0;
    double residual_l2 = 0.0;       ///< ||f_j|_E - e_j||, evaluated directly
    double norm_l2 = 0.0;
    double budget = 0.0;
};

/// Explicit functions f_j (one per point of Lambda(a, r)) with their
/// residuals over the evaluation set and norms. d_hat and norm_sup are maxima
/// over these witnesses.
struct WindowCertificate {
    double radius = 0.0;
    double center = 0.0;
    std::vector<double> kernel_nodes;
    std::vector<double> eval_points;
    std::vector<IndexCertificate> entries;
    CMatrix coeffs; ///< kernel_nodes x entries
    double d_hat = 0.0;
    double norm_sup = 0.0;
    double d_hat_all = 0.0; ///< worst residual over every kernel-window index
    bool eval_truncated = false;

    std::vector<double> target_points() const {
        std::vector<double> out;
        out.reserve(entries.size());
        for (const auto& e : entries)
            out.push_back(e.node);
        return out;
    }

    PWFunction function(const Spectrum& s, std::size_t i) const {
        return {s, kernel_nodes, coeffs.col(static_cast<Eigen::Index>(i))};
    }
};

namespace detail {

/// Tikhonov problem min ||A c - e||^2 + mu ||f||^2 in an L2-orthonormal
/// basis of the kernel span: c = P z with P = V Lambda^{-1/2} over the
/// well-conditioned part of G, B = A P = U Sigma W*. Every (target, mu)
/// residual and norm then follows from beta = U* e_j.
class SpectralRidge {
public:
    SpectralRidge(const Spectrum& s, const std::vector<double>& nodes, const std::vector<double>& eval) {
        const CMatrix g = gram(s, nodes);
        Eigen::SelfAdjointEigenSolver<CMatrix> ge(g);
        const RVector lam = ge.eigenvalues();
        const double lmax = lam.maxCoeff();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            if (lam[i] > 1e-14 * lmax)
                keep.push_back(i);
        full_rank_gram_ = keep.size() == static_cast<std::size_t>(lam.size());
        p_.resize(g.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c)
            p_.col(static_cast<Eigen::Index>(c)) = ge.eigenvectors().col(keep[c]) / std::sqrt(lam[keep[c]]);
        a_ = cross_kernel(s, eval, nodes);
        b_ = a_ * p_;
        CMatrix m = CMatrix::Zero(b_.cols(), b_.cols());
        m.selfadjointView<Eigen::Lower>().rankUpdate(b_.adjoint());
        m = m.selfadjointView<Eigen::Lower>();
        Eigen::SelfAdjointEigenSolver<CMatrix> me(m);
        const RVector sig2 = me.eigenvalues();
        const double smax = sig2.maxCoeff();
        for (Eigen::Index i = 0; i < sig2.size(); ++i) {
            if (sig2[i] > 1e-14 * smax) {
                sigma2_.push_back(sig2[i]);
                w_cols_.push_back(i);
            }
        }
        w_.resize(m.rows(), static_cast<Eigen::Index>(w_cols_.size()));
        for (std::size_t c = 0; c < w_cols_.size(); ++c)
            w_.col(static_cast<Eigen::Index>(c)) = me.eigenvectors().col(w_cols_[c]);
        const double smin = sig2.minCoeff();
        unregularized_ok_ = full_rank_gram_ && smin > 0.0 && smax / smin <= ill_conditioning_threshold;
    }

    /// Whether mu = 0 is admissible (normal matrix condition <= 1e12).
    bool unregularized_ok() const noexcept { return unregularized_ok_; }
    const CMatrix& design() const noexcept { return a_; }

    /// beta_i = (u_i* e_j) for each kept singular direction.
    CVector projections(std::size_t row) const {
        CVector ub = (b_.row(static_cast<Eigen::Index>(row)) * w_).transpose();
        CVector beta(ub.size());
        for (Eigen::Index i = 0; i < ub.size(); ++i)
            beta[i] = std::conj(ub[i]) / std::sqrt(sigma2_[static_cast<std::size_t>(i)]);
        return beta;
    }

    std::pair<double, double> residual_and_norm(const CVector& beta, double mu) const {
        double res2 = 0.0, norm2 = 0.0, captured = 0.0;
        for (Eigen::Index i = 0; i < beta.size(); ++i) {
            const double s2 = sigma2_[static_cast<std::size_t>(i)];
            const double b2 = std::norm(beta[i]);
            const double damp = mu / (s2 + mu);
            res2 += damp * damp * b2;
            norm2 += s2 / ((s2 + mu) * (s2 + mu)) * b2;
            captured += b2;
        }
        res2 += std::max(0.0, 1.0 - captured);
        return {std::sqrt(std::max(0.0, res2)), std::sqrt(norm2)};
    }

    CVector coefficients(const CVector& beta, double mu) const {
        CVector z(beta.size());
        for (Eigen::Index i = 0; i < beta.size(); ++i) {
            const double s2 = sigma2_[static_cast<std::size_t>(i)];
            z[i] = std::sqrt(s2) / (s2 + mu) * beta[i];
        }
        return p_ * (w_ * z);
    }

private:
    CMatrix p_, a_, b_, w_;
    std::vector<double> sigma2_;
    std::vector<Eigen::Index> w_cols_;
    bool full_rank_gram_ = false;
    bool unregularized_ok_ = false;
};

} // namespace detail

/// Builds and verifies f_j for every point of Lambda(a, r). For each target,
/// mu is the grid value with the smallest residual among those meeting the
/// target's norm budget.
inline WindowCertificate certify_window(const Spectrum& s, const PointSet& ps, double r, double a,
                                        const std::vector<double>& mu_grid, double kernel_span, double eval_span,
                                        const std::function<double(long)>& budget) {
    WindowCertificate cert;
    cert.radius = r;
    cert.center = a;
    const auto kw = ps.window(a, kernel_span * r);
    const auto ew = ps.window(a, eval_span * r);
    const auto tw = ps.window(a, r);
    if (tw.count == 0)
        throw Error(ErrorKind::insufficient_data, "window (a - r, a + r) contains no points");
    cert.kernel_nodes = kw.points;
    cert.eval_points = ew.points;
    cert.eval_truncated = a - eval_span * r < ps.lo() || a + eval_span * r > ps.hi();

    const detail::SpectralRidge ridge(s, cert.kernel_nodes, cert.eval_points);
    std::vector<double> mus;
    for (double mu : mu_grid)
        if (mu > 0.0 || ridge.unregularized_ok())
            mus.push_back(mu);
    if (mus.empty())
        throw Error(ErrorKind::ill_conditioned, "no admissible regularization value in the mu grid");

    struct Choice {
        double mu = 0.0;
        double residual = std::numeric_limits<double>::infinity();
        bool feasible = false;
    };
    auto choose = [&](const CVector& beta, double cap) {
        Choice best;
        for (double mu : mus) {
            const auto [res, nrm] = ridge.residual_and_norm(beta, mu);
            if (nrm <= cap && res < best.residual) {
                best = {mu, res, true};
            }
        }
        return best;
    };

    // All kernel-window indices, for the transparency figure.
    for (std::size_t k = 0; k < kw.count; ++k) {
        const std::size_t row = kw.first + k - ew.first;
        const auto c = choose(ridge.projections(row), budget(ps.label(kw.first + k)));
        if (c.feasible)
            cert.d_hat_all = std::max(cert.d_hat_all, c.residual);
        else
            cert.d_hat_all = std::numeric_limits<double>::infinity();
    }

    const auto m = static_cast<Eigen::Index>(tw.count);
    cert.coeffs.resize(static_cast<Eigen::Index>(kw.count), m);
    cert.entries.resize(tw.count);
    for (std::size_t t = 0; t < tw.count; ++t) {
        auto& e = cert.entries[t];
        const std::size_t full = tw.first + t;
        e.node = ps[full];
        e.label = ps.label(full);
        e.eval_index = full - ew.first;
        e.budget = budget(e.label);
        const CVector beta = ridge.projections(e.eval_index);
        const auto c = choose(beta, e.budget);
        if (!c.feasible)
            throw Error(ErrorKind::no_bound, "no mu in the grid meets the norm budget " + std::to_string(e.budget) +
                                                 " at point " + std::to_string(e.node));
        e.mu = c.mu;
        cert.coeffs.col(static_cast<Eigen::Index>(t)) = ridge.coefficients(beta, c.mu);
    }

    // Reported values come from direct evaluation of the stored coefficients.
    const CMatrix g = gram(s, cert.kernel_nodes);
    auto measure = [&](const CMatrix& coeffs, std::vector<double>& res, std::vector<double>& nrm) {
        CMatrix values = ridge.design() * coeffs;
        const CMatrix gc = g * coeffs;
        res.resize(tw.count);
        nrm.resize(tw.count);
        for (std::size_t t = 0; t < tw.count; ++t) {
            const auto ti = static_cast<Eigen::Index>(t);
            values(static_cast<Eigen::Index>(cert.entries[t].eval_index), ti) -= 1.0;
            res[t] = values.col(ti).norm();
            nrm[t] = std::sqrt(std::max(0.0, coeffs.col(ti).dot(gc.col(ti)).real()));
        }
    };
    std::vector<double> res, nrm;
    measure(cert.coeffs, res, nrm);

    // The spectral solve drops near-null Gram directions. Solving the normal
    // equations at the chosen mu keeps them; use that witness where it verifies better.
    const ExtendedRidge direct(s, cert.kernel_nodes, cert.eval_points);
    std::vector<double> mus_used;
    for (const auto& e : cert.entries)
        if (std::find(mus_used.begin(), mus_used.end(), e.mu) == mus_used.end())
            mus_used.push_back(e.mu);
    for (double mu : mus_used) {
        std::vector<std::size_t> rows, cols;
        for (std::size_t t = 0; t < tw.count; ++t) {
            if (cert.entries[t].mu == mu) {
                rows.push_back(cert.entries[t].eval_index);
                cols.push_back(t);
            }
        }
        std::optional<ExtendedRidge::Batch> batch;
        try {
            batch = direct.solve(rows, mu);
        } catch (const Error&) {
            continue;
        }
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::size_t t = cols[k];
            if (batch->norm_l2[k] <= cert.entries[t].budget && batch->residual_l2[k] < res[t]) {
                res[t] = batch->residual_l2[k];
                nrm[t] = batch->norm_l2[k];
                cert.coeffs.col(static_cast<Eigen::Index>(t)) = batch->coeffs.col(static_cast<Eigen::Index>(k));
            }
        }
    }
    for (std::size_t t = 0; t < tw.count; ++t) {
        auto& e = cert.entries[t];
        e.residual_l2 = res[t];
        e.norm_l2 = nrm[t];
        cert.d_hat = std::max(cert.d_hat, e.residual_l2);
        cert.norm_sup = std::max(cert.norm_sup, e.norm_l2);
    }
    cert.d_hat_all = std::max(cert.d_hat_all, cert.d_hat);
    return cert;
}

inline std::function<double(long)> budget_for(const TheoremInstance& inst, BoundMode mode) {
    if (mode == BoundMode::theorem2) {
        const Growth g = *inst.growth;
        return [g](long j) { return g.budget(j); };
    }
    const double cap = inst.norm_budget.value_or(default_norm_budget(inst.spectrum));
    return [cap](long) { return cap; };
}

// --- bound reports --------------------------------------------------------------

struct RadiusRow {
    double radius = 0.0;
    double d_hat = 0.0;
    double d_hat_all = 0.0;
    double norm_sup = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double sharpness_ratio = 0.0;
    std::size_t certified = 0;
};

struct BoundReport {
    std::string instance_id;
    BoundMode mode = BoundMode::theorem1;
    Spectrum spectrum;
    double mes_s = 0.0;
    double d_hat = 0.0;
    double d_hat_all = 0.0;
    double norm_sup = 0.0;
    double norm_budget = 0.0; ///< Theorem 1 budget, or the budget at label 0 in Theorem 2 mode
    DensityEstimate density;
    double rhs = 0.0;
    double slack = 0.0;
    double sharpness_ratio = 0.0;
    std::vector<double> centers;
    std::vector<RadiusRow> per_radius;
    std::vector<WindowCertificate> certificates; ///< largest radius, one per center
    bool eval_truncated = false;
};

inline double bound_rhs(double mes_s, double d) { return mes_s / (2.0 * pi * (1.0 - d * d)); }

inline BoundReport verify(const TheoremInstance& inst, BoundMode mode) {
    validate(inst, mode);
    BoundReport rep;
    rep.instance_id = inst.id;
    rep.mode = mode;
    rep.spectrum = inst.spectrum;
    rep.mes_s = inst.spectrum.measure();
    rep.centers = effective_centers(inst, mode);
    const auto budget = budget_for(inst, mode);
    rep.norm_budget = budget(0);

    const auto dradii = effective_density_radii(inst, mode);
    rep.density = mode == BoundMode::theorem1 ? upper_uniform_density(inst.points, dradii)
                                              : upper_density(inst.points, dradii);

    for (double r : inst.radii) {
        RadiusRow row;
        row.radius = r;
        std::vector<WindowCertificate> certs(rep.centers.size());
        parallel_for(rep.centers.size(), [&](std::size_t i) {
            certs[i] = certify_window(inst.spectrum, inst.points, r, rep.centers[i], inst.mu_grid, inst.kernel_span,
                                      inst.eval_span, budget);
        });
        for (const auto& c : certs) {
            row.d_hat = std::max(row.d_hat, c.d_hat);
            row.d_hat_all = std::max(row.d_hat_all, c.d_hat_all);
            row.norm_sup = std::max(row.norm_sup, c.norm_sup);
            row.certified += c.entries.size();
            rep.eval_truncated = rep.eval_truncated || c.eval_truncated;
        }
        if (row.d_hat < 1.0) {
            row.rhs = bound_rhs(rep.mes_s, row.d_hat);
            row.slack = row.rhs - rep.density.value;
            row.sharpness_ratio = 2.0 * pi * (1.0 - row.d_hat * row.d_hat) * rep.density.value / rep.mes_s;
        } else {
            row.rhs = std::numeric_limits<double>::infinity();
            row.slack = std::numeric_limits<double>::infinity();
        }
        rep.per_radius.push_back(row);
        if (r == inst.radii.back())
            rep.certificates = std::move(certs);
    }
    const auto& last = rep.per_radius.back();
    rep.d_hat = last.d_hat;
    rep.d_hat_all = last.d_hat_all;
    rep.norm_sup = last.norm_sup;
    if (!(rep.d_hat < 1.0))
        throw Error(ErrorKind::no_bound, "d_hat = " + std::to_string(rep.d_hat) +
                                             " >= 1: the hypothesis is not witnessed");
    rep.rhs = last.rhs;
    rep.slack = last.slack;
    rep.sharpness_ratio = last.sharpness_ratio;
    return rep;
}

inline BoundReport verify_theorem1(const TheoremInstance& inst) { return verify(inst, BoundMode::theorem1); }
inline BoundReport verify_theorem2(const TheoremInstance& inst) { return verify(inst, BoundMode::theorem2); }

/// Verifies many instances; Theorem 2 mode where a growth model is set.
inline std::vector<BoundReport> run_sweep(const std::vector<TheoremInstance>& instances) {
    std::vector<BoundReport> out(instances.size());
    parallel_for(instances.size(), [&](std::size_t i) {
        out[i] = verify(instances[i], instances[i].growth ? BoundMode::theorem2 : BoundMode::theorem1);
    });
    return out;
}

// --- sharp example ------------------------------------------------------------

struct SharpReport {
    double a = 0.0;
    std::size_t n_terms = 0;
    double series = 0.0;      ///< sum_{0<|k|<=N} (sin(ak)/(pi k))^2
    double error_sq = 0.0;    ///< series + (a/pi - 1)^2
    double target = 0.0;      ///< 1 - a/pi
    double deviation = 0.0;
    double identity_target = 0.0; ///< a/pi - a^2/pi^2
    double identity_deviation = 0.0;
    double tolerance = 0.0;        ///< 2/(pi^2 N) + 1e-12
    DensityEstimate density;
    double sharpness_ratio = 0.0;
    bool pass = false;
};

/// S = [-a, a], Lambda = Z, f_j = sin(a(x - j))/(pi(x - j)).
inline SharpReport sharp_example(double a, std::size_t n_terms, double density_radius = 100.0) {
    if (!(a > 0.0 && a < pi))
        throw Error(ErrorKind::invalid_parameter, "sharp example needs 0 < a < pi");
    if (n_terms < 100)
        throw Error(ErrorKind::invalid_parameter, "sharp example needs N >= 100");
    SharpReport rep;
    rep.a = a;
    rep.n_terms = n_terms;
    double sum = 0.0;
    for (std::size_t k = n_terms; k >= 1; --k) {
        const auto kd = static_cast<double>(k);
        const double v = std::sin(a * kd) / (pi * kd);
        sum += v * v;
    }
    rep.series = 2.0 * sum;
    const double q = a / pi;
    rep.error_sq = rep.series + (q - 1.0) * (q - 1.0);
    rep.target = 1.0 - q;
    rep.deviation = std::abs(rep.error_sq - rep.target);
    rep.identity_target = q - q * q;
    rep.identity_deviation = std::abs(rep.series - rep.identity_target);
    rep.tolerance = 2.0 / (pi * pi * static_cast<double>(n_terms)) + 1e-12;
    rep.pass = rep.deviation <= rep.tolerance && rep.identity_deviation <= rep.tolerance;
    const auto integers = PointSet::from(PointDescriptor{ArithmeticSet{1.0, 0.0, -2.0 * density_radius, 2.0 * density_radius}});
    const std::vector<double> radii{density_radius};
    rep.density = upper_uniform_density(integers, radii);
    rep.sharpness_ratio = 2.0 * pi * (1.0 - rep.error_sq) * rep.density.value / (2.0 * a);
    return rep;
}

// --- proof pipeline -------------------------------------------------------------

struct PipelineReport {
    BoundMode mode = BoundMode::theorem1;
    double radius = 0.0;
    double center = 0.0;
    double delta = 0.0;
    double epsilon = 0.0;
    double alpha = 0.0;
    double beta = 0.0; ///< product-window exponent (Theorem 2 mode)
    std::size_t window_points = 0;
    double d = 0.0;    ///< certified d_hat for the window
    double norm_sup = 0.0;
    // perturbation precondition ||v_j - e_j|| <= d
    double max_perturbation = 0.0;
    bool precondition_ok = false;
    // subspace extraction
    std::size_t dim = 0;
    double certified_bound = 0.0;
    double measured_bound = 0.0;
    bool subspace_ok = false;
    bool stated_constant_met = false;
    bool t2_profile_ok = false;
    // lower bound of the synthesis form in L2 on X
    double synthesis_constant = 0.0; ///< min over X of ||sum c_j g_j||^2 / |c|^2
    double frame_constant = 0.0;     ///< 1/sqrt(lambda_max) for PW_{S(delta)} on the window
    bool synthesis_ok = false;
    // concentration and the Landau bound
    double concentration = 0.0;
    bool epsilon_met = false;
    double mes_q = 0.0;
    double mes_s_delta = 0.0;
    LandauCheck landau;
    double emitted_lower_bound = 0.0; ///< 2 pi c dim X / mes Q
    double display_bound = 0.0;       ///< 2 pi c (1 - alpha^2 d^2)(n - 1) / (2 r (1 + delta))
    bool emitted_ok = false;

    bool all_ok() const { return precondition_ok && subspace_ok && synthesis_ok && landau.pass && emitted_ok; }
};

/// Runs the finite-window version of the density argument at radius r and center a:
/// windowed certificates, subspace extraction, concentration on
/// (a - r - delta r, a + r + delta r), and the Landau dimension bound.
inline PipelineReport run_proof_pipeline(const TheoremInstance& inst, double r, double a,
                                         BoundMode mode = BoundMode::theorem1) {
    validate(inst, mode);
    if (mode == BoundMode::theorem2)
        a = 0.0;
    PipelineReport rep;
    rep.mode = mode;
    rep.radius = r;
    rep.center = a;
    rep.delta = inst.delta;
    rep.epsilon = inst.epsilon;
    const auto tw = inst.points.window(a, r);
    if (tw.count < 3)
        throw Error(ErrorKind::insufficient_data, "pipeline window must contain at least 3 points");
    rep.window_points = tw.count;

    const auto cert = certify_window(inst.spectrum, inst.points, r, a, inst.mu_grid, inst.kernel_span, inst.eval_span,
                                     budget_for(inst, mode));
    rep.d = cert.d_hat;
    rep.norm_sup = cert.norm_sup;
    if (!(rep.d < 1.0))
        throw Error(ErrorKind::no_bound, "d_hat >= 1 on the pipeline window");
    rep.alpha = inst.alpha.value_or(default_alpha(rep.d));
    if (rep.d > 0.0 && !(rep.alpha * rep.d < 1.0))
        throw Error(ErrorKind::invalid_parameter, "alpha must lie in (1, 1/d)");

    const AnyWindow window = mode == BoundMode::theorem1 ? AnyWindow(FejerWindow(inst.delta))
                                                         : AnyWindow(ProductWindow(inst.delta, effective_beta(inst)));
    rep.beta = mode == BoundMode::theorem2 ? effective_beta(inst) : 0.0;

    return std::visit(
        [&](const auto& win) {
            using Win = std::decay_t<decltype(win)>;
            const WindowedFamily<Win> family(inst.spectrum, cert.kernel_nodes, cert.coeffs, cert.target_points(), win);
            const Spectrum s_delta = family.spectrum();
            rep.mes_s_delta = s_delta.measure();

            const CMatrix t1 = family.eval(tw.points); // t1(k, j) = g_j(lambda_k)
            const auto width = extract_subspace(t1, rep.d, rep.alpha);
            rep.max_perturbation = width.max_perturbation;
            rep.precondition_ok = true;
            rep.dim = width.dim;
            rep.certified_bound = width.certified_bound;
            rep.measured_bound = width.measured_bound;
            rep.subspace_ok = width.measured_bound >= width.certified_bound * (1.0 - 1e-12);
            rep.stated_constant_met = width.stated_constant_met;
            rep.t2_profile_ok = width.t2_profile_ok;

            const double reach = r * (1.0 + inst.delta);
            const Spectrum q{{a - reach, a + reach}};
            rep.mes_q = q.measure();
            MassQuadrature mq;
            mq.region = q;
            mq.domain_lo = a - reach - 10.0 * r;
            mq.domain_hi = a + reach + 10.0 * r;
            mq.bandwidth = s_delta.max_abs();
            const CMatrix& basis = width.subspace_basis;
            const auto conc = concentration_of_subspace(
                [&](std::span<const double> xs) { return CMatrix(family.eval(xs) * basis); }, mq);
            rep.concentration = conc.c;
            rep.epsilon_met = conc.c >= 1.0 - inst.epsilon;
            rep.synthesis_constant = conc.total_min;
            const auto fb = empirical_frame_bound(s_delta, tw.points);
            rep.frame_constant = fb.constant;
            rep.synthesis_ok =
                rep.synthesis_constant >= fb.constant * fb.constant * width.measured_bound * (1.0 - 1e-6);

            if (conc.c > 0.0) {
                rep.landau = landau_bound_check(rep.dim, conc.c, s_delta, q);
            } else {
                rep.landau = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), true};
            }
            rep.emitted_lower_bound = 2.0 * pi * conc.c * static_cast<double>(rep.dim) / rep.mes_q;
            const double ad = rep.alpha * rep.d;
            rep.display_bound = 2.0 * pi * conc.c * (1.0 - ad * ad) * (static_cast<double>(tw.count) - 1.0) /
                                (2.0 * r * (1.0 + inst.delta));
            rep.emitted_ok = rep.emitted_lower_bound <= rep.mes_s_delta + 1e-3;
            return rep;
        },
        window);
}

} // namespace pwdens
