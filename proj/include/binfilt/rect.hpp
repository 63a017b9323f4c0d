#pragma once

#include "binfilt/rational.hpp"

#include <vector>

namespace binfilt {

/// Axis-aligned rectangle in [0,1]^d. Coordinates are kept exactly as
/// rationals (doubles embed exactly) with cached double views for numerics.
class Rect {
public:
    Rect() = default;
    Rect(std::vector<Rational> lo, std::vector<Rational> hi);
    static Rect unit_cube(int dim);
    static Rect from_doubles(const std::vector<double>& lo, const std::vector<double>& hi);

    int dim() const { return static_cast<int>(lo_.size()); }
    const Rational& lo(int s) const { return lo_[s]; }
    const Rational& hi(int s) const { return hi_[s]; }
    double lo_d(int s) const { return lo_d_[s]; }
    double hi_d(int s) const { return hi_d_[s]; }
    Rational side(int s) const { return hi_[s] - lo_[s]; }
    double side_d(int s) const { return hi_d_[s] - lo_d_[s]; }

    Rational volume() const;
    double volume_d() const;
    double log2_volume() const;

    bool contains(const std::vector<double>& x) const;
    bool contains_rect(const Rect& other) const;
    bool disjoint(const Rect& other) const;  // up to measure zero
    /// Intersection; empty optional when the overlap has measure zero.
    std::optional<Rect> intersect(const Rect& other) const;

    bool operator==(const Rect& other) const { return lo_ == other.lo_ && hi_ == other.hi_; }

private:
    std::vector<Rational> lo_, hi_;
    std::vector<double> lo_d_, hi_d_;
};

}  // namespace binfilt
