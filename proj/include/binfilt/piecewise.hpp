#pragma once

#include "binfilt/partition.hpp"
#include "binfilt/polyspace.hpp"

#include <map>

namespace binfilt {

/// Exact integral of a product of two polynomials over a box.
double integrate_product(const Poly& a, const Poly& b, const Rect& box);
/// Exact integral of a single polynomial over a box.
double integrate_poly(const Poly& a, const Rect& box);

/// Function that is polynomial on each leaf of a fixed filtration; absent
/// leaves are zero. This is the working representation for elements of
/// Sigma_n, projector outputs and approximants.
class LeafFunction {
public:
    explicit LeafFunction(const Filtration& f) : f_(&f) {}

    const Filtration& filtration() const { return *f_; }
    const std::map<AtomId, Poly>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }

    /// Adds poly * chi_atom (the poly is restricted to each leaf below atom).
    void add_on_atom(AtomId atom, const Poly& poly);
    /// Adds poly * chi_{ring} for a geometric ring.
    void add_on_ring(const Ring& ring, const Poly& poly);
    void add_scaled(const LeafFunction& other, double c);

    double eval(const std::vector<double>& x) const;
    double lp(double p) const;          // global L^p norm
    double lp_under(AtomId atom, double p) const;
    /// Inner product with a polynomial over everything below `atom`.
    double inner_on_atom(const Poly& q, AtomId atom) const;
    double inner(const LeafFunction& other) const;

    LeafFunction operator-(const LeafFunction& other) const;

private:
    const Filtration* f_;
    std::map<AtomId, Poly> pieces_;
};

}  // namespace binfilt
