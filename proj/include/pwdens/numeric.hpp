#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "pwdens/error.hpp"
#include "pwdens/spectrum.hpp"

namespace pwdens {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;

/// sin(z)/z with the removable singularity filled in.
inline double sinc(double z) noexcept {
    const double az = std::abs(z);
    if (az < 1e-4) {
        const double z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }

    void append(const QuadratureRule& other) {
        nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
        weights.insert(weights.end(), other.weights.begin(), other.weights.end());
    }
};

/// n-point Gauss-Legendre rule on [lo, hi] (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
    if (n == 0)
        throw Error(ErrorKind::invalid_parameter, "Gauss-Legendre rule needs n >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const auto nd = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const auto kd = static_cast<double>(k);
                const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = nd * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    if (n == 1) {
        rule.nodes[0] = mid;
        rule.weights[0] = 2.0 * half;
    }
    return rule;
}

/// Composite Gauss-Legendre on each interval of `set`, panels no longer than
/// `panel_length`, `order` nodes per panel.
inline QuadratureRule composite_gauss_legendre(const Spectrum& set, double panel_length,
                                               std::size_t order) {
    QuadratureRule rule;
    for (const auto& iv : set.intervals()) {
        const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(iv.length() / panel_length)));
        const double h = iv.length() / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            const double a = iv.left + static_cast<double>(p) * h;
            rule.append(gauss_legendre(order, a, a + h));
        }
    }
    return rule;
}

/// Trapezoid nodes on [lo, hi] with spacing <= h; exact over the whole line
/// for integrands band-limited below 2*pi/h, up to truncation.
inline QuadratureRule uniform_grid(double lo, double hi, double h) {
    QuadratureRule rule;
    const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / h));
    const double step = (hi - lo) / static_cast<double>(steps);
    rule.nodes.resize(steps + 1);
    rule.weights.assign(steps + 1, step);
    for (std::size_t k = 0; k <= steps; ++k)
        rule.nodes[k] = lo + static_cast<double>(k) * step;
    rule.weights.front() = rule.weights.back() = 0.5 * step;
    return rule;
}

/// Worker count: PWDENS_THREADS if set, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("PWDENS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index is
/// processed exactly once; results must be written to per-index slots.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers)
                    body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace pwdens
