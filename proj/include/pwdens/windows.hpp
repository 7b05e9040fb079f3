#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pwdens/error.hpp"
#include "pwdens/numeric.hpp"
#include "pwdens/pwkernel.hpp"
#include "pwdens/spectrum.hpp"

namespace pwdens {

/// phi(x) = (sin(delta x / 2) / (delta x / 2))^2; band-limited to [-delta, delta], phi(0) = 1.
class FejerWindow {
public:
    explicit FejerWindow(double delta) : delta_(delta) {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw Error(ErrorKind::invalid_parameter, "window bandwidth delta must be > 0");
    }

    double delta() const noexcept { return delta_; }
    double bandwidth() const noexcept { return delta_; }

    double operator()(double x) const noexcept {
        const double s = sinc(0.5 * delta_ * x);
        return s * s;
    }

private:
    double delta_;
};

/// psi(x) = prod_j sinc(delta_j x) with delta_j = delta * j^{-s} / zeta(s), s = 1/beta,
/// kept while delta_j >= floor. sum delta_j <= delta, so psi is band-limited
/// to [-delta, delta]; |psi| decays like exp(-c |x|^beta).
class ProductWindow {
public:
    ProductWindow(double delta, double beta, double floor = 1e-8) : delta_(delta), beta_(beta) {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw Error(ErrorKind::invalid_parameter, "window bandwidth delta must be > 0");
        if (!(beta > 0.0 && beta < 1.0))
            throw Error(ErrorKind::invalid_parameter, "decay exponent beta must lie in (0, 1)");
        if (!(floor > 0.0))
            throw Error(ErrorKind::invalid_parameter, "truncation floor must be > 0");
        const double s = 1.0 / beta;
        const double scale = delta / std::riemann_zeta(s);
        for (std::size_t j = 1;; ++j) {
            const double dj = scale * std::pow(static_cast<double>(j), -s);
            if (dj < floor)
                break;
            deltas_.push_back(dj);
        }
        // Suffix sums of delta_j^{2,4,6,8} for the small-argument tail.
        const std::size_t n = deltas_.size();
        for (auto* v : {&tail2_, &tail4_, &tail6_, &tail8_})
            v->assign(n + 1, 0.0);
        for (std::size_t j = n; j-- > 0;) {
            const double d2 = deltas_[j] * deltas_[j];
            tail2_[j] = tail2_[j + 1] + d2;
            tail4_[j] = tail4_[j + 1] + d2 * d2;
            tail6_[j] = tail6_[j + 1] + d2 * d2 * d2;
            tail8_[j] = tail8_[j + 1] + d2 * d2 * d2 * d2;
        }
    }

    double delta() const noexcept { return delta_; }
    double beta() const noexcept { return beta_; }
    std::size_t terms() const noexcept { return deltas_.size(); }
    const std::vector<double>& deltas() const noexcept { return deltas_; }

    double bandwidth() const noexcept {
        double s = 0.0;
        for (double d : deltas_)
            s += d;
        return s;
    }

    double operator()(double x) const noexcept {
        if (x == 0.0)
            return 1.0;
        const double ax = std::abs(x);
        // Factors with delta_j |x| <= 0.02 are folded into
        // log sinc(y) = -y^2/6 - y^4/180 - y^6/2835 - y^8/37800 - ...
        const double cut = 0.02 / ax;
        const auto split = static_cast<std::size_t>(
            std::upper_bound(deltas_.begin(), deltas_.end(), cut, std::greater<>()) - deltas_.begin());
        double prod = 1.0;
        for (std::size_t j = 0; j < split; ++j) {
            prod *= sinc(deltas_[j] * ax);
            if (prod == 0.0)
                return 0.0;
        }
        const double x2 = ax * ax;
        const double log_tail = -(x2 * tail2_[split] / 6.0 + x2 * x2 * tail4_[split] / 180.0 +
                                  x2 * x2 * x2 * tail6_[split] / 2835.0 +
                                  x2 * x2 * x2 * x2 * tail8_[split] / 37800.0);
        return prod * std::exp(log_tail);
    }

    /// min over m of prod_{j<=m} 1/(delta_j |x|): the tail-free bound on |psi(x)|.
    double product_bound(double x) const noexcept {
        const double ax = std::abs(x);
        double best = 1.0;
        double running = 1.0;
        for (double d : deltas_) {
            running /= d * ax;
            best = std::min(best, running);
            if (d * ax < 1.0)
                break;
        }
        return best;
    }

private:
    double delta_;
    double beta_;
    std::vector<double> deltas_;
    std::vector<double> tail2_, tail4_, tail6_, tail8_;
};

/// log|psi(x)| ~ log C - c |x|^b fitted to the running max of |psi| from the right.
struct DecayFit {
    double exponent = 0.0; ///< b
    double rate = 0.0;     ///< c
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::size_t samples = 0;

    double envelope(double x) const { return std::exp(-rate * std::pow(std::abs(x), exponent)); }
};

inline DecayFit fit_decay(const ProductWindow& w, double x_lo, double x_hi, std::size_t samples = 4000) {
    if (!(x_lo > 0.0 && x_hi > x_lo) || samples < 16)
        throw Error(ErrorKind::invalid_parameter, "decay fit needs 0 < x_lo < x_hi and >= 16 samples");
    // Envelope over [x, 2 x_hi] so the right end is not biased by the cutoff.
    const double x_end = 2.0 * x_hi;
    const std::size_t total = 2 * samples * static_cast<std::size_t>(std::ceil(x_end / (x_hi - x_lo)));
    const double h = (x_end - x_lo) / static_cast<double>(total);
    std::vector<double> xs(total + 1), env(total + 1);
    for (std::size_t k = 0; k <= total; ++k) {
        xs[k] = x_lo + static_cast<double>(k) * h;
        env[k] = std::abs(w(xs[k]));
    }
    for (std::size_t k = total; k-- > 0;)
        env[k] = std::max(env[k], env[k + 1]);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k <= total && xs[k] <= x_hi; ++k) {
        if (!(env[k] > 0.0 && env[k] < 1.0))
            continue;
        const double lx = std::log(xs[k]);
        const double ly = std::log(-std::log(env[k]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2)
        throw Error(ErrorKind::insufficient_data, "envelope fit has fewer than two usable samples");
    const double nd = static_cast<double>(n);
    DecayFit fit;
    fit.exponent = (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
    fit.rate = std::exp((sy - fit.exponent * sx) / nd);
    fit.x_lo = x_lo;
    fit.x_hi = x_hi;
    fit.samples = n;
    return fit;
}

using AnyWindow = std::variant<FejerWindow, ProductWindow>;

inline double window_bandwidth(const AnyWindow& w) {
    return std::visit([](const auto& v) { return v.bandwidth(); }, w);
}

/// Family g_j(x) = f_j(x) w(x - center_j) where the f_j share one kernel node
/// set (column j of `coeffs` holds f_j). Products lie in PW of S dilated by
/// the window bandwidth.
template <class Win>
class WindowedFamily {
public:
    WindowedFamily(Spectrum s, std::vector<double> nodes, CMatrix coeffs, std::vector<double> centers, Win window)
        : spectrum_(std::move(s)), nodes_(std::move(nodes)), coeffs_(std::move(coeffs)),
          centers_(std::move(centers)), window_(std::move(window)) {
        if (static_cast<std::size_t>(coeffs_.rows()) != nodes_.size() ||
            static_cast<std::size_t>(coeffs_.cols()) != centers_.size())
            throw Error(ErrorKind::invalid_input, "windowed family: coefficient shape mismatch");
    }

    std::size_t size() const noexcept { return centers_.size(); }
    const Win& window() const noexcept { return window_; }
    const std::vector<double>& centers() const noexcept { return centers_; }

    Spectrum spectrum() const { return spectrum_.dilate(window_.bandwidth()); }

    /// Unwindowed f_j at xs (rows) for every j (cols).
    CMatrix eval_base(std::span<const double> xs) const { return cross_kernel(spectrum_, xs, nodes_) * coeffs_; }

    /// g_j(xs[i]) as an |xs| x size() matrix.
    CMatrix eval(std::span<const double> xs) const {
        CMatrix out = eval_base(xs);
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i)
                out(i, j) *= window_(xs[static_cast<std::size_t>(i)] - centers_[static_cast<std::size_t>(j)]);
        return out;
    }

private:
    Spectrum spectrum_;
    std::vector<double> nodes_;
    CMatrix coeffs_;
    std::vector<double> centers_;
    Win window_;
};

/// Explicit form of the tail estimate for a Fejer-windowed family over the
/// window (a - r, a + r): with |f_j| <= sup_f everywhere and n members,
///   int_{|x-a| >= r + delta r} |sum c_j g_j|^2 <= n sup_f^2 * 32 / (3 delta^7 r^3) * sum |c_j|^2.
inline double fejer_tail_bound(std::size_t members, double sup_f, double delta, double r, double coeff_sq) {
    return static_cast<double>(members) * sup_f * sup_f * 32.0 /
           (3.0 * std::pow(delta, 7) * r * r * r) * coeff_sq;
}

} // namespace pwdens
