#include "binfilt/rect.hpp"

#include "binfilt/util.hpp"

namespace binfilt {

Rect::Rect(std::vector<Rational> lo, std::vector<Rational> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size()) throw InvalidArgument("rect: lo/hi dimension mismatch");
    lo_d_.reserve(lo_.size());
    hi_d_.reserve(hi_.size());
    for (std::size_t s = 0; s < lo_.size(); ++s) {
        if (!(lo_[s] < hi_[s])) throw InvalidArgument("rect: requires lo < hi on every axis");
        lo_d_.push_back(to_double(lo_[s]));
        hi_d_.push_back(to_double(hi_[s]));
    }
}

Rect Rect::unit_cube(int dim) {
    std::vector<Rational> lo(dim, Rational(0)), hi(dim, Rational(1));
    return Rect(std::move(lo), std::move(hi));
}

Rect Rect::from_doubles(const std::vector<double>& lo, const std::vector<double>& hi) {
    std::vector<Rational> rlo, rhi;
    rlo.reserve(lo.size());
    rhi.reserve(hi.size());
    for (double v : lo) rlo.emplace_back(v);
    for (double v : hi) rhi.emplace_back(v);
    return Rect(std::move(rlo), std::move(rhi));
}

Rational Rect::volume() const {
    Rational v(1);
    for (int s = 0; s < dim(); ++s) v *= side(s);
    return v;
}

double Rect::volume_d() const {
    double v = 1;
    for (int s = 0; s < dim(); ++s) v *= side_d(s);
    return v;
}

double Rect::log2_volume() const { return log2_rational(volume()); }

bool Rect::contains(const std::vector<double>& x) const {
    for (int s = 0; s < dim(); ++s)
        if (x[s] < lo_d_[s] || x[s] > hi_d_[s]) return false;
    return true;
}

bool Rect::contains_rect(const Rect& other) const {
    for (int s = 0; s < dim(); ++s)
        if (other.lo(s) < lo_[s] || other.hi(s) > hi_[s]) return false;
    return true;
}

bool Rect::disjoint(const Rect& other) const {
    for (int s = 0; s < dim(); ++s)
        if (other.hi(s) <= lo_[s] || other.lo(s) >= hi_[s]) return true;
    return false;
}

std::optional<Rect> Rect::intersect(const Rect& other) const {
    std::vector<Rational> lo, hi;
    lo.reserve(dim());
    hi.reserve(dim());
    for (int s = 0; s < dim(); ++s) {
        Rational a = std::max(lo_[s], other.lo(s));
        Rational b = std::min(hi_[s], other.hi(s));
        if (!(a < b)) return std::nullopt;
        lo.push_back(a);
        hi.push_back(b);
    }
    return Rect(std::move(lo), std::move(hi));
}

}  // namespace binfilt
