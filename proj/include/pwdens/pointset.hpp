#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pwdens/error.hpp"

namespace pwdens {

// Generator descriptors. A generator is a finite truncation of an infinite
// uniformly discrete set to the closed range [lo, hi].

struct ArithmeticSet {
    double step = 1.0;
    double offset = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct ExplicitSet {
    std::vector<double> values;
};

/// Lattice step*k + offset, each point moved uniformly within +-max_jitter.
struct JitterSet {
    double step = 1.0;
    double max_jitter = 0.0;
    std::uint64_t seed = 0;
    double lo = 0.0;
    double hi = 0.0;
};

struct PointDescriptor;

struct UnionSet {
    std::vector<PointDescriptor> parts;
};

struct PointDescriptor {
    std::variant<ArithmeticSet, ExplicitSet, JitterSet, UnionSet> kind;
};

/// Points of a window, with their position in the parent list.
struct Window {
    std::vector<double> points;
    std::size_t first = 0;
    std::size_t count = 0;
};

/// Sorted finite list of points standing in for a uniformly discrete set.
class PointSet {
public:
    static PointSet from_points(std::vector<double> values) {
        return from(PointDescriptor{ExplicitSet{std::move(values)}});
    }

    static PointSet from(const PointDescriptor& desc) {
        PointSet ps;
        ps.descriptor_ = desc;
        ps.build(desc);
        return ps;
    }

    std::span<const double> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }

    /// Guaranteed lower bound on the gap between consecutive points.
    double separation() const noexcept { return separation_; }

    /// Range on which the truncation is faithful to the generated set.
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

    std::optional<double> closed_form_density() const noexcept { return closed_form_; }
    const PointDescriptor& descriptor() const noexcept { return descriptor_; }

    /// Points in the open interval (a - r, a + r).
    Window window(double a, double r) const {
        if (!(r > 0.0))
            throw Error(ErrorKind::invalid_parameter,
                        "window radius must be > 0, got " + std::to_string(r));
        Window w;
        const auto [first, last] = open_range(a - r, a + r);
        w.first = first;
        w.count = last - first;
        w.points.assign(points_.begin() + static_cast<std::ptrdiff_t>(first),
                        points_.begin() + static_cast<std::ptrdiff_t>(last));
        return w;
    }

    /// #(points in the open interval (left, right)).
    std::size_t count_open(double left, double right) const {
        const auto [first, last] = open_range(left, right);
        return last - first;
    }

    /// Index of the first point >= 0, or size() if all are negative.
    std::size_t origin_index() const {
        return static_cast<std::size_t>(
            std::lower_bound(points_.begin(), points_.end(), 0.0) - points_.begin());
    }

    /// Signed label of point i relative to 0: the first nonnegative point is 0.
    long label(std::size_t i) const {
        return static_cast<long>(i) - static_cast<long>(origin_index());
    }

private:
    std::pair<std::size_t, std::size_t> open_range(double left, double right) const {
        auto b = std::upper_bound(points_.begin(), points_.end(), left);
        auto e = std::lower_bound(b, points_.end(), right);
        return {static_cast<std::size_t>(b - points_.begin()),
                static_cast<std::size_t>(e - points_.begin())};
    }

    struct Built {
        std::vector<double> pts;
        double separation;
        double lo;
        double hi;
        std::optional<double> density;
    };

    static void check_range(double lo, double hi, const char* what) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi))
            throw Error(ErrorKind::invalid_input, std::string(what) + ": range must satisfy lo <= hi");
    }

    static double min_gap(const std::vector<double>& pts) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < pts.size(); ++i)
            gap = std::min(gap, pts[i] - pts[i - 1]);
        return gap;
    }

    static Built generate(const PointDescriptor& desc) {
        return std::visit([](const auto& d) { return generate_one(d); }, desc.kind);
    }

    static Built generate_one(const ArithmeticSet& d) {
        if (!(d.step > 0.0) || !std::isfinite(d.step) || !std::isfinite(d.offset))
            throw Error(ErrorKind::invalid_input, "arithmetic: step must be finite and > 0");
        check_range(d.lo, d.hi, "arithmetic");
        Built b;
        const auto k0 = static_cast<long long>(std::ceil((d.lo - d.offset) / d.step));
        const auto k1 = static_cast<long long>(std::floor((d.hi - d.offset) / d.step));
        for (long long k = k0; k <= k1; ++k)
            b.pts.push_back(d.offset + d.step * static_cast<double>(k));
        b.separation = d.step;
        b.lo = d.lo;
        b.hi = d.hi;
        b.density = 1.0 / d.step;
        return b;
    }

    static Built generate_one(const ExplicitSet& d) {
        if (d.values.empty())
            throw Error(ErrorKind::invalid_input, "explicit: empty point list");
        Built b;
        b.pts = d.values;
        for (double v : b.pts)
            if (!std::isfinite(v))
                throw Error(ErrorKind::invalid_input, "explicit: non-finite point");
        for (std::size_t i = 1; i < b.pts.size(); ++i)
            if (!(b.pts[i] > b.pts[i - 1]))
                throw Error(ErrorKind::invalid_input,
                            "explicit: values must be strictly increasing (index " +
                                std::to_string(i) + ")");
        b.separation = min_gap(b.pts);
        b.lo = b.pts.front();
        b.hi = b.pts.back();
        return b;
    }

    static Built generate_one(const JitterSet& d) {
        if (!(d.step > 0.0) || !std::isfinite(d.step))
            throw Error(ErrorKind::invalid_input, "jitter: step must be finite and > 0");
        if (!(d.max_jitter >= 0.0) || !(2.0 * d.max_jitter < d.step))
            throw Error(ErrorKind::invalid_input, "jitter: need 0 <= max_jitter < step/2");
        check_range(d.lo, d.hi, "jitter");
        Built b;
        std::mt19937_64 rng(d.seed);
        std::uniform_real_distribution<double> u(-d.max_jitter, d.max_jitter);
        const auto k0 = static_cast<long long>(std::ceil(d.lo / d.step));
        const auto k1 = static_cast<long long>(std::floor(d.hi / d.step));
        for (long long k = k0; k <= k1; ++k) {
            const double jitter = d.max_jitter > 0.0 ? u(rng) : 0.0;
            b.pts.push_back(d.step * static_cast<double>(k) + jitter);
        }
        b.separation = d.step - 2.0 * d.max_jitter;
        b.lo = d.lo;
        b.hi = d.hi;
        return b;
    }

    static Built generate_one(const UnionSet& d) {
        if (d.parts.empty())
            throw Error(ErrorKind::invalid_input, "union: no parts");
        Built b;
        b.lo = -std::numeric_limits<double>::infinity();
        b.hi = std::numeric_limits<double>::infinity();
        double density = 0.0;
        bool exact = true;
        for (const auto& part : d.parts) {
            auto sub = generate(part);
            b.pts.insert(b.pts.end(), sub.pts.begin(), sub.pts.end());
            b.lo = std::max(b.lo, sub.lo);
            b.hi = std::min(b.hi, sub.hi);
            if (sub.density)
                density += *sub.density;
            else
                exact = false;
        }
        std::sort(b.pts.begin(), b.pts.end());
        // A set union: coincident points collapse, which breaks additivity of densities.
        const double scale = std::max({1.0, std::abs(b.pts.front()), std::abs(b.pts.back())});
        std::vector<double> merged;
        merged.reserve(b.pts.size());
        for (double p : b.pts) {
            if (!merged.empty() && p - merged.back() <= 1e-12 * scale) {
                exact = false;
                continue;
            }
            merged.push_back(p);
        }
        b.pts = std::move(merged);
        b.separation = min_gap(b.pts);
        if (!(b.lo <= b.hi))
            throw Error(ErrorKind::invalid_input, "union: part ranges do not overlap");
        if (exact)
            b.density = density;
        return b;
    }

    void build(const PointDescriptor& desc) {
        auto b = generate(desc);
        if (b.pts.empty())
            throw Error(ErrorKind::invalid_input, "point set is empty over its range");
        points_ = std::move(b.pts);
        separation_ = b.separation;
        lo_ = b.lo;
        hi_ = b.hi;
        closed_form_ = b.density;
        if (!(separation_ > 0.0))
            throw Error(ErrorKind::invalid_input, "point set is not uniformly discrete");
    }

    PointDescriptor descriptor_;
    std::vector<double> points_;
    double separation_ = 0.0;
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::optional<double> closed_form_;
};

// --- density estimation -----------------------------------------------------

enum class DensityKind { upper_uniform, upper };

struct RadiusRatio {
    double radius = 0.0;
    double ratio = 0.0;
    std::size_t count = 0;
    double anchor = 0.0; ///< window start (D+) or center (D*) that attained the ratio
};

struct DensityEstimate {
    DensityKind kind = DensityKind::upper_uniform;
    double value = 0.0;
    std::vector<double> window_radii;
    std::vector<RadiusRatio> per_radius;
    bool exact = false;
};

namespace detail {

inline void check_radii(std::span<const double> radii) {
    if (radii.empty())
        throw Error(ErrorKind::invalid_parameter, "radius schedule is empty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || !std::isfinite(radii[i]))
            throw Error(ErrorKind::invalid_parameter, "radii must be finite and > 0");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw Error(ErrorKind::invalid_parameter, "radii must be strictly increasing");
    }
}

} // namespace detail

/// Max over window positions a of #(points in (a, a + r)).
/// Exact sweep: the max is attained by a window whose left end sits just
/// below some point, so it suffices to count [p_i, p_i + r) for each i.
/// Returns (count, p_i) for the first maximizer.
inline std::pair<std::size_t, double> max_open_count(std::span<const double> pts, double r) {
    std::size_t best = 0;
    double anchor = pts.empty() ? 0.0 : pts.front();
    std::size_t j = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (j < i)
            j = i;
        while (j < pts.size() && pts[j] < pts[i] + r)
            ++j;
        if (j - i > best) {
            best = j - i;
            anchor = pts[i];
        }
    }
    return {best, anchor};
}

/// Grid scan over window starts a = lo, lo + h, ... with h capped at separation/2.
inline std::pair<std::size_t, double> max_open_count_grid(const PointSet& ps, double r, double spacing) {
    double h = spacing;
    if (std::isfinite(ps.separation()))
        h = std::min(h, 0.5 * ps.separation());
    const double start = ps.points().front() - h;
    const double stop = ps.points().back();
    std::size_t best = 0;
    double anchor = start;
    const auto steps = static_cast<std::size_t>(std::ceil((stop - start) / h));
    for (std::size_t k = 0; k <= steps; ++k) {
        const double a = start + static_cast<double>(k) * h;
        const auto c = ps.count_open(a, a + r);
        if (c > best) {
            best = c;
            anchor = a;
        }
    }
    return {best, anchor};
}

/// Upper uniform (Beurling) density: for each r, max_a #(a, a+r) / r.
/// `scan_spacing` > 0 selects a grid scan over window starts; 0 uses the exact sweep.
/// For generators with a closed-form density the value is that density and
/// exact is set; otherwise the value is the ratio at the largest radius.
inline DensityEstimate upper_uniform_density(const PointSet& ps, std::span<const double> radii,
                                             double scan_spacing = 0.0) {
    detail::check_radii(radii);
    if (ps.hi() - ps.lo() < radii.back())
        throw Error(ErrorKind::insufficient_data,
                    "data range " + std::to_string(ps.hi() - ps.lo()) +
                        " is narrower than the largest radius " + std::to_string(radii.back()));
    if (scan_spacing < 0.0)
        throw Error(ErrorKind::invalid_parameter, "scan spacing must be >= 0");
    DensityEstimate est;
    est.kind = DensityKind::upper_uniform;
    est.window_radii.assign(radii.begin(), radii.end());
    for (double r : radii) {
        auto [count, anchor] =
            scan_spacing > 0.0 ? max_open_count_grid(ps, r, scan_spacing) : max_open_count(ps.points(), r);
        est.per_radius.push_back({r, static_cast<double>(count) / r, count, anchor});
    }
    if (auto cf = ps.closed_form_density()) {
        est.value = *cf;
        est.exact = true;
    } else {
        est.value = est.per_radius.back().ratio;
    }
    return est;
}

/// Upper density D*: #(points in (-r, r)) / (2r) per radius; the value is the
/// max over the tail (last half, rounded up) of the schedule.
inline DensityEstimate upper_density(const PointSet& ps, std::span<const double> radii) {
    detail::check_radii(radii);
    if (std::max(ps.hi(), -ps.lo()) < radii.back())
        throw Error(ErrorKind::insufficient_data,
                    "data does not reach the largest radius " + std::to_string(radii.back()) +
                        " on either side of 0");
    DensityEstimate est;
    est.kind = DensityKind::upper;
    est.window_radii.assign(radii.begin(), radii.end());
    for (double r : radii) {
        const auto c = ps.count_open(-r, r);
        est.per_radius.push_back({r, static_cast<double>(c) / (2.0 * r), c, 0.0});
    }
    const std::size_t tail = (radii.size() + 1) / 2;
    est.value = 0.0;
    for (std::size_t i = radii.size() - tail; i < radii.size(); ++i)
        est.value = std::max(est.value, est.per_radius[i].ratio);
    return est;
}

} // namespace pwdens
