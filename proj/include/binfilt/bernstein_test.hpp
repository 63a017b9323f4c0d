#pragma once

#include "binfilt/orthosystem.hpp"

namespace binfilt {

/// Sum of polynomial pieces on (not necessarily disjoint) atoms.
struct SigmaElement {
    std::vector<std::pair<Poly, AtomId>> terms;
    int n() const { return static_cast<int>(terms.size()); }
};

/// One disjoint piece: a polynomial times the indicator of an atom or ring.
struct RingSigmaPiece {
    Poly poly;
    bool is_atom = true;
    AtomId atom = kNoAtom;
    Ring ring;
};

struct RingSigmaElement {
    std::vector<RingSigmaPiece> pieces;
};

struct BiReport {
    int n = 1;
    double p = 2.0, tau = 1.0;
    double beta = 0.0;  // 1/tau - 1/p
    double constant_estimate = 0.0;
    SigmaElement witness;
    long restarts = 0;
    long evaluations = 0;
    bool search_limited = false;
};

/// LHS of the Bernstein inequality: (||P_0 g||_p^tau + sum_k ||Q_k g||_p^tau)^{1/tau}
/// (each split counted once).
double bi_lhs(const LeafFunction& g, const SystemPhi& system, double tau);

struct BiParams {
    double tau = 1.0;
    int depth_cap = 14;
    std::uint64_t seed = 1;
    long budget = 2000;  // objective evaluations for the randomized search
};

/// Exhaustive single-atom supremum (n = 1 case).
BiReport bi_atoms_constant(const SystemPhi& system, const BiParams& prm);
/// Exhaustive single-ring supremum.
BiReport bi_rings_constant(const SystemPhi& system, const BiParams& prm);
/// Randomized lower-bound search over Sigma_n.
BiReport bi_constant(const SystemPhi& system, int n, const BiParams& prm);

LeafFunction sigma_to_leaf(const Filtration& f, const SigmaElement& g);
LeafFunction ring_sigma_to_leaf(const Filtration& f, const RingSigmaElement& g);

/// Rewrites a Sigma_n element as a sum over pairwise disjoint atoms and
/// rings (tree-based; pieces carry the accumulated polynomial of all marked
/// ancestors). Throws when an atom id does not belong to the filtration.
RingSigmaElement disjointify(const Filtration& f, const SigmaElement& g);

/// L^p norms of the individual pieces (used for the Hoelder bridge check).
std::vector<double> piece_norms(const Filtration& f, const RingSigmaElement& g, double p);

}  // namespace binfilt
