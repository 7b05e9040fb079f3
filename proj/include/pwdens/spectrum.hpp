#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "pwdens/error.hpp"

namespace pwdens {

struct Interval {
    double left = 0.0;
    double right = 0.0;

    double length() const noexcept { return right - left; }
    double mid() const noexcept { return 0.5 * (left + right); }
    bool operator==(const Interval&) const = default;
};

/// Compact set of frequencies (radians per unit length) stored as a sorted
/// union of disjoint closed intervals. Touching intervals are merged.
/// Also used for time-side sets Q.
class Spectrum {
public:
    Spectrum() = default;
    Spectrum(std::initializer_list<Interval> raw) : Spectrum(normalize(std::vector<Interval>(raw))) {}

    static Spectrum normalize(std::vector<Interval> raw) {
        if (raw.empty())
            throw Error(ErrorKind::invalid_spectrum, "empty interval list");
        for (const auto& iv : raw) {
            if (!std::isfinite(iv.left) || !std::isfinite(iv.right))
                throw Error(ErrorKind::invalid_spectrum,
                            "non-finite interval [" + std::to_string(iv.left) + ", " +
                                std::to_string(iv.right) + "]");
            if (!(iv.left < iv.right))
                throw Error(ErrorKind::invalid_spectrum,
                            "degenerate interval [" + std::to_string(iv.left) + ", " +
                                std::to_string(iv.right) + "] (left must be < right)");
        }
        std::sort(raw.begin(), raw.end(),
                  [](const Interval& a, const Interval& b) { return a.left < b.left; });
        Spectrum s;
        s.intervals_.push_back(raw.front());
        for (std::size_t i = 1; i < raw.size(); ++i) {
            auto& last = s.intervals_.back();
            if (raw[i].left <= last.right)
                last.right = std::max(last.right, raw[i].right);
            else
                s.intervals_.push_back(raw[i]);
        }
        return s;
    }

    const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    std::size_t size() const noexcept { return intervals_.size(); }

    double measure() const noexcept {
        double m = 0.0;
        for (const auto& iv : intervals_)
            m += iv.length();
        return m;
    }

    double lower() const { return intervals_.front().left; }
    double upper() const { return intervals_.back().right; }

    /// Largest |t| over the set.
    double max_abs() const { return std::max(std::abs(lower()), std::abs(upper())); }

    bool contains(double t) const noexcept {
        return std::any_of(intervals_.begin(), intervals_.end(),
                           [t](const Interval& iv) { return iv.left <= t && t <= iv.right; });
    }

    bool is_symmetric(double tol = 1e-12) const noexcept {
        const auto n = intervals_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = intervals_[i];
            const auto& b = intervals_[n - 1 - i];
            if (std::abs(a.left + b.right) > tol || std::abs(a.right + b.left) > tol)
                return false;
        }
        return true;
    }

    /// Minkowski sum S + [-delta, delta].
    Spectrum dilate(double delta) const {
        if (!(delta >= 0.0) || !std::isfinite(delta))
            throw Error(ErrorKind::invalid_parameter,
                        "dilation must be finite and >= 0, got " + std::to_string(delta));
        std::vector<Interval> grown;
        grown.reserve(intervals_.size());
        for (const auto& iv : intervals_)
            grown.push_back({iv.left - delta, iv.right + delta});
        return normalize(std::move(grown));
    }

    bool operator==(const Spectrum&) const = default;

private:
    std::vector<Interval> intervals_;
};

} // namespace pwdens
