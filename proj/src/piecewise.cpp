#include "binfilt/piecewise.hpp"

#include "binfilt/quadrature.hpp"
#include "binfilt/util.hpp"

#include <cmath>

namespace binfilt {

namespace {

double tensor_gauss(const std::function<double(const std::vector<double>&)>& fn, const Rect& box,
                    const std::vector<int>& nodes) {
    const int d = box.dim();
    std::function<double(std::vector<double>&, int)> rec = [&](std::vector<double>& x, int axis) -> double {
        if (axis == d) return fn(x);
        const GaussRule& rule = gauss_legendre(nodes[static_cast<std::size_t>(axis)]);
        const double mid = 0.5 * (box.lo_d(axis) + box.hi_d(axis));
        const double half = 0.5 * box.side_d(axis);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            x[static_cast<std::size_t>(axis)] = mid + half * rule.nodes[i];
            acc += rule.weights[i] * rec(x, axis + 1);
        }
        return acc * half;
    };
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    return rec(x, 0);
}

}  // namespace

double integrate_product(const Poly& a, const Poly& b, const Rect& box) {
    const int d = box.dim();
    std::vector<int> nodes(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s)
        nodes[static_cast<std::size_t>(s)] =
            (a.degree()[static_cast<std::size_t>(s)] + b.degree()[static_cast<std::size_t>(s)]) / 2 + 1;
    return tensor_gauss([&](const std::vector<double>& x) { return a.eval(x) * b.eval(x); }, box,
                        nodes);
}

double integrate_poly(const Poly& a, const Rect& box) {
    const int d = box.dim();
    std::vector<int> nodes(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s)
        nodes[static_cast<std::size_t>(s)] = a.degree()[static_cast<std::size_t>(s)] / 2 + 1;
    return tensor_gauss([&](const std::vector<double>& x) { return a.eval(x); }, box, nodes);
}

namespace {

void add_into(std::map<AtomId, Poly>& pieces, AtomId leaf, Poly local) {
    auto it = pieces.find(leaf);
    if (it == pieces.end()) {
        pieces.emplace(leaf, std::move(local));
        return;
    }
    if (it->second.degree() == local.degree()) {
        it->second += local;
        return;
    }
    std::vector<int> env(local.degree().size());
    for (std::size_t s = 0; s < env.size(); ++s)
        env[s] = std::max(local.degree()[s], it->second.degree()[s]);
    Poly merged = it->second.promote(env);
    merged += local.promote(env);
    it->second = std::move(merged);
}

}  // namespace

void LeafFunction::add_on_atom(AtomId atom, const Poly& poly) {
    for (AtomId leaf : f_->leaves_under(atom))
        add_into(pieces_, leaf, poly.restrict_to(f_->atom(leaf).rect));
}

void LeafFunction::add_on_ring(const Ring& ring, const Poly& poly) {
    // chi_R = chi_outer - chi_inner on the tree: add on every leaf below the
    // outer atom except those below the inner atom
    for (AtomId leaf : f_->leaves_under(ring.outer)) {
        if (f_->is_ancestor(ring.inner, leaf)) continue;
        add_into(pieces_, leaf, poly.restrict_to(f_->atom(leaf).rect));
    }
}

void LeafFunction::add_scaled(const LeafFunction& other, double c) {
    for (const auto& [leaf, poly] : other.pieces_) {
        Poly scaled = poly;
        scaled *= c;
        add_into(pieces_, leaf, std::move(scaled));
    }
}

double LeafFunction::eval(const std::vector<double>& x) const {
    AtomId cur = f_->root();
    if (!f_->atom(cur).rect.contains(x)) return 0.0;
    while (!f_->atom(cur).is_leaf()) {
        const Atom& a = f_->atom(cur);
        cur = f_->atom(a.small_child).rect.contains(x) ? a.small_child : a.large_child;
    }
    auto it = pieces_.find(cur);
    return it == pieces_.end() ? 0.0 : it->second.eval(x);
}

double LeafFunction::lp(double p) const {
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& [leaf, poly] : pieces_) m = std::max(m, sup_norm(poly, f_->atom(leaf).rect));
        return m;
    }
    double acc = 0.0;
    for (const auto& [leaf, poly] : pieces_) {
        double v = lp_norm_box(poly, f_->atom(leaf).rect, p);
        acc += std::pow(v, p);
    }
    return std::pow(acc, 1.0 / p);
}

double LeafFunction::lp_under(AtomId atom, double p) const {
    double acc = 0.0;
    for (const auto& [leaf, poly] : pieces_) {
        if (!f_->is_ancestor(atom, leaf)) continue;
        double v = lp_norm_box(poly, f_->atom(leaf).rect, p);
        if (std::isinf(p))
            acc = std::max(acc, v);
        else
            acc += std::pow(v, p);
    }
    return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

double LeafFunction::inner_on_atom(const Poly& q, AtomId atom) const {
    double acc = 0.0;
    for (const auto& [leaf, poly] : pieces_) {
        if (!f_->is_ancestor(atom, leaf)) continue;
        acc += integrate_product(poly, q, f_->atom(leaf).rect);
    }
    return acc;
}

double LeafFunction::inner(const LeafFunction& other) const {
    double acc = 0.0;
    for (const auto& [leaf, poly] : pieces_) {
        auto it = other.pieces_.find(leaf);
        if (it == other.pieces_.end()) continue;
        acc += integrate_product(poly, it->second, f_->atom(leaf).rect);
    }
    return acc;
}

LeafFunction LeafFunction::operator-(const LeafFunction& other) const {
    LeafFunction out = *this;
    out.add_scaled(other, -1.0);
    return out;
}

}  // namespace binfilt
