#include "binfilt/bernstein_test.hpp"

#include "binfilt/util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace binfilt {

double bi_lhs(const LeafFunction& g, const SystemPhi& system, double tau) {
    const Filtration& f = *system.filt;
    if (system.p == 2.0) {
        // orthonormal frames: ||Q_k g||_2 is the coefficient norm, no assembly
        Coefficients c = analyze(g, system);
        double acc = 0.0, lvl = 0.0;
        for (double v : c.level0_phi) lvl += v * v;
        acc = std::pow(std::sqrt(lvl), tau);
        for (const auto& block : c.split_phi) {
            double sq = 0.0;
            for (double v : block) sq += v * v;
            acc += std::pow(std::sqrt(sq), tau);
        }
        return std::pow(acc, 1.0 / tau);
    }
    double acc = std::pow(apply_Q(g, system, 0).lp(system.p), tau);
    for (int k = 1; k <= f.split_count(); ++k)
        acc += std::pow(q_norm(g, system, k, system.p).value, tau);
    return std::pow(acc, 1.0 / tau);
}

LeafFunction sigma_to_leaf(const Filtration& f, const SigmaElement& g) {
    LeafFunction out(f);
    for (const auto& [poly, atom] : g.terms) out.add_on_atom(atom, poly);
    return out;
}

LeafFunction ring_sigma_to_leaf(const Filtration& f, const RingSigmaElement& g) {
    LeafFunction out(f);
    for (const RingSigmaPiece& piece : g.pieces) {
        if (piece.is_atom)
            out.add_on_atom(piece.atom, piece.poly);
        else
            out.add_on_ring(piece.ring, piece.poly);
    }
    return out;
}

namespace {

Poly combine_basis(const std::vector<Poly>& basis, const Eigen::VectorXd& c) {
    Poly out = basis[0];
    out *= c(0);
    for (int i = 1; i < static_cast<int>(basis.size()); ++i) {
        Poly t = basis[static_cast<std::size_t>(i)];
        t *= c(i);
        out += t;
    }
    return out;
}

/// Cheap sphere maximization: exact for m = 1, an angular scan with golden
/// refinement for m = 2, coordinate ascent from seeded starts otherwise.
double maximize_sphere(const std::function<double(const Eigen::VectorXd&)>& fn, int m,
                       std::uint64_t seed, Eigen::VectorXd* arg) {
    if (m == 1) {
        Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
        if (arg) *arg = one;
        return fn(one);
    }
    if (m == 2) {
        auto at = [&](double theta) {
            Eigen::VectorXd c(2);
            c << std::cos(theta), std::sin(theta);
            return fn(c);
        };
        const int grid = 24;
        double best = -1.0, best_t = 0.0;
        for (int k = 0; k < grid; ++k) {
            double t = M_PI * k / grid;
            double v = at(t);
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
        double lo = best_t - M_PI / grid, hi = best_t + M_PI / grid;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = at(x1), f2 = at(x2);
        for (int it = 0; it < 24; ++it) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = at(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = at(x1);
            }
        }
        double t = f1 > f2 ? x1 : x2;
        double v = std::max(f1, f2);
        if (v < best) {
            t = best_t;
            v = best;
        }
        if (arg) {
            arg->resize(2);
            (*arg) << std::cos(t), std::sin(t);
        }
        return v;
    }
    std::mt19937_64 rng = seeded_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = -1.0;
    Eigen::VectorXd best_c = Eigen::VectorXd::Unit(m, 0);
    for (int s = 0; s < m + 4; ++s) {
        Eigen::VectorXd c(m);
        if (s < m) {
            c.setZero();
            c(s) = 1.0;
        } else {
            for (int i = 0; i < m; ++i) c(i) = gauss(rng);
            c.normalize();
        }
        double val = fn(c);
        double step = 0.5;
        while (step > 1e-3) {
            bool improved = false;
            for (int i = 0; i < m; ++i)
                for (double sgn : {1.0, -1.0}) {
                    Eigen::VectorXd t = c;
                    t(i) += sgn * step;
                    t.normalize();
                    double v = fn(t);
                    if (v > val * (1.0 + 1e-10)) {
                        val = v;
                        c = t;
                        improved = true;
                    }
                }
            if (!improved) step *= 0.5;
        }
        if (val > best) {
            best = val;
            best_c = c;
        }
    }
    if (arg) *arg = best_c;
    return best;
}

}  // namespace

BiReport bi_atoms_constant(const SystemPhi& system, const BiParams& prm) {
    const Filtration& f = *system.filt;
    const SpaceSpec& S = system.space;
    BiReport rep;
    rep.n = 1;
    rep.p = system.p;
    rep.tau = prm.tau;
    rep.beta = 1.0 / prm.tau - 1.0 / system.p;
    const int m = S.dim_space();
    for (AtomId id : f.all_atoms()) {
        if (f.atom(id).depth > prm.depth_cap) continue;
        std::vector<Poly> basis = space_basis(S, f.atom(id).rect);
        auto ratio = [&](const Eigen::VectorXd& coef) {
            LeafFunction g(f);
            g.add_on_atom(id, combine_basis(basis, coef));
            double den = g.lp(system.p);
            if (den <= 0) return 0.0;
            ++rep.evaluations;
            return bi_lhs(g, system, prm.tau) / den;
        };
        Eigen::VectorXd arg;
        double best = maximize_sphere(ratio, m, prm.seed ^ static_cast<std::uint64_t>(id), &arg);
        if (best > rep.constant_estimate) {
            rep.constant_estimate = best;
            rep.witness.terms = {{combine_basis(basis, arg), id}};
        }
    }
    return rep;
}

BiReport bi_rings_constant(const SystemPhi& system, const BiParams& prm) {
    const Filtration& f = *system.filt;
    const SpaceSpec& S = system.space;
    BiReport rep;
    rep.n = 1;
    rep.p = system.p;
    rep.tau = prm.tau;
    rep.beta = 1.0 / prm.tau - 1.0 / system.p;
    const int m = S.dim_space();
    for (AtomId outer : f.all_atoms()) {
        if (f.atom(outer).depth > prm.depth_cap) continue;
        for (AtomId inner : f.all_atoms()) {
            if (inner == outer || !f.is_ancestor(outer, inner)) continue;
            if (f.atom(inner).parent == outer) continue;  // ring would be an atom
            if (f.atom(inner).depth > prm.depth_cap) continue;
            Ring ring = make_ring(f, outer, inner);
            std::vector<Poly> basis = space_basis(S, f.atom(outer).rect);
            auto eval_coef = [&](const Eigen::VectorXd& coef) {
                LeafFunction g(f);
                g.add_on_ring(ring, combine_basis(basis, coef));
                double den = g.lp(system.p);
                if (den <= 0) return 0.0;
                ++rep.evaluations;
                return bi_lhs(g, system, prm.tau) / den;
            };
            Eigen::VectorXd arg;
            double best = maximize_sphere(
                eval_coef, m, prm.seed ^ static_cast<std::uint64_t>(outer * 131 + inner), &arg);
            if (best > rep.constant_estimate) {
                rep.constant_estimate = best;
                rep.witness.terms = {{combine_basis(basis, arg), outer}};
                // the ring itself is recorded through the two-term representation
                Poly neg = combine_basis(basis, arg);
                neg *= -1.0;
                rep.witness.terms.push_back({neg.restrict_to(f.atom(inner).rect), inner});
            }
        }
    }
    return rep;
}

BiReport bi_constant(const SystemPhi& system, int n, const BiParams& prm) {
    if (n < 1) throw InvalidArgument("bi_constant: n must be >= 1");
    const Filtration& f = *system.filt;
    const SpaceSpec& S = system.space;
    BiReport rep;
    rep.n = n;
    rep.p = system.p;
    rep.tau = prm.tau;
    rep.beta = 1.0 / prm.tau - 1.0 / system.p;
    const int m = S.dim_space();
    const double nbeta = std::pow(static_cast<double>(n), rep.beta);

    std::vector<AtomId> pool;
    for (AtomId id : f.all_atoms())
        if (f.atom(id).depth <= prm.depth_cap) pool.push_back(id);
    std::vector<Chain> chains = enumerate_fat_chains(f, 0.5, 2);
    std::sort(chains.begin(), chains.end(),
              [&](const Chain& a, const Chain& b) { return a.length() > b.length(); });

    std::mt19937_64 rng = seeded_rng(prm.seed, 99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_atom(0, pool.empty() ? 0 : pool.size() - 1);

    auto objective = [&](const std::vector<AtomId>& atoms, const Eigen::VectorXd& coef,
                         SigmaElement* out) {
        SigmaElement sig;
        for (int i = 0; i < n; ++i) {
            std::vector<Poly> basis = space_basis(S, f.atom(atoms[static_cast<std::size_t>(i)]).rect);
            sig.terms.push_back({combine_basis(basis, coef.segment(i * m, m)),
                                 atoms[static_cast<std::size_t>(i)]});
        }
        LeafFunction g = sigma_to_leaf(f, sig);
        double den = g.lp(system.p);
        if (den <= 0) return 0.0;
        ++rep.evaluations;
        if (out) *out = sig;
        return bi_lhs(g, system, prm.tau) / (nbeta * den);
    };

    while (rep.evaluations < prm.budget) {
        ++rep.restarts;
        std::vector<AtomId> atoms;
        bool use_chain = !chains.empty() && (rng() & 1U);
        if (use_chain) {
            const Chain& c = chains[rng() % std::min<std::size_t>(chains.size(), 8)];
            for (int i = 0; i < n; ++i)
                atoms.push_back(c.atoms[rng() % static_cast<std::size_t>(c.length())]);
        } else {
            for (int i = 0; i < n; ++i) atoms.push_back(pool[pick_atom(rng)]);
        }
        Eigen::VectorXd coef(n * m);
        for (int i = 0; i < n * m; ++i) coef(i) = gauss(rng);
        coef.normalize();
        SigmaElement sig;
        double val = objective(atoms, coef, &sig);
        double step = 0.5;
        while (step > 1e-2 && rep.evaluations < prm.budget) {
            bool improved = false;
            for (int i = 0; i < n * m && rep.evaluations < prm.budget; ++i)
                for (double sgn : {1.0, -1.0}) {
                    Eigen::VectorXd t = coef;
                    t(i) += sgn * step;
                    t.normalize();
                    SigmaElement cand;
                    double v = objective(atoms, t, &cand);
                    if (v > val * (1.0 + 1e-10)) {
                        val = v;
                        coef = t;
                        sig = cand;
                        improved = true;
                    }
                }
            if (!improved) step *= 0.5;
        }
        if (val > rep.constant_estimate) {
            rep.constant_estimate = val;
            rep.witness = sig;
        }
    }
    rep.search_limited = rep.evaluations >= prm.budget;
    return rep;
}

namespace {

AtomId tree_lca(const Filtration& f, AtomId a, AtomId b) {
    while (a != b) {
        if (f.atom(a).depth >= f.atom(b).depth)
            a = f.atom(a).parent;
        else
            b = f.atom(b).parent;
        if (a == kNoAtom || b == kNoAtom) throw NumericalError("lca: disconnected atoms");
    }
    return a;
}

void emit_cover(const Filtration& f, AtomId top, const std::vector<AtomId>& holes, const Poly& value,
                std::vector<RingSigmaPiece>& out) {
    if (holes.empty()) {
        RingSigmaPiece piece;
        piece.is_atom = true;
        piece.atom = top;
        piece.poly = value.restrict_to(f.atom(top).rect);
        out.push_back(std::move(piece));
        return;
    }
    AtomId c = holes[0];
    for (std::size_t i = 1; i < holes.size(); ++i) c = tree_lca(f, c, holes[i]);
    if (holes.size() == 1) {
        if (c == top) return;  // fully covered by the hole
        RingSigmaPiece piece;
        if (f.atom(c).parent == top) {
            // degenerate ring = the buddy atom
            piece.is_atom = true;
            piece.atom = f.buddy(c);
            piece.poly = value.restrict_to(f.atom(piece.atom).rect);
        } else {
            piece.is_atom = false;
            piece.ring = make_ring(f, top, c);
            piece.poly = value.restrict_to(f.atom(top).rect);
        }
        out.push_back(std::move(piece));
        return;
    }
    if (c != top) {
        RingSigmaPiece piece;
        if (f.atom(c).parent == top) {
            piece.is_atom = true;
            piece.atom = f.buddy(c);
            piece.poly = value.restrict_to(f.atom(piece.atom).rect);
        } else {
            piece.is_atom = false;
            piece.ring = make_ring(f, top, c);
            piece.poly = value.restrict_to(f.atom(top).rect);
        }
        out.push_back(std::move(piece));
    }
    const Atom& ca = f.atom(c);
    std::vector<AtomId> left, right;
    for (AtomId h : holes)
        (f.is_ancestor(ca.small_child, h) ? left : right).push_back(h);
    emit_cover(f, ca.small_child, left, value, out);
    emit_cover(f, ca.large_child, right, value, out);
}

}  // namespace

RingSigmaElement disjointify(const Filtration& f, const SigmaElement& g) {
    for (const auto& [poly, atom] : g.terms)
        if (atom < 0 || atom >= f.atom_count())
            throw InvalidArgument("disjointify: atom does not belong to this filtration");

    // deduplicate identical atoms by summing coefficients
    std::map<AtomId, Poly> marked;
    for (const auto& [poly, atom] : g.terms) {
        auto it = marked.find(atom);
        if (it == marked.end()) {
            marked.emplace(atom, poly);
        } else {
            std::vector<int> env(poly.degree().size());
            for (std::size_t s = 0; s < env.size(); ++s)
                env[s] = std::max(poly.degree()[s], it->second.degree()[s]);
            Poly merged = it->second.promote(env);
            merged += poly.promote(env);
            it->second = std::move(merged);
        }
    }

    // nesting forest: nearest marked proper ancestor
    std::map<AtomId, AtomId> parent_marked;
    std::map<AtomId, std::vector<AtomId>> children;
    for (const auto& [atom, poly] : marked) {
        AtomId cur = f.atom(atom).parent;
        while (cur != kNoAtom && !marked.count(cur)) cur = f.atom(cur).parent;
        parent_marked[atom] = cur;
        if (cur != kNoAtom) children[cur].push_back(atom);
    }

    // accumulated value on each marked region
    std::map<AtomId, Poly> value;
    std::function<Poly(AtomId)> accumulate = [&](AtomId a) -> Poly {
        auto it = value.find(a);
        if (it != value.end()) return it->second;
        Poly v = marked.at(a);
        AtomId up = parent_marked.at(a);
        if (up != kNoAtom) {
            Poly pv = accumulate(up).restrict_to(f.atom(a).rect);
            std::vector<int> env(v.degree().size());
            for (std::size_t s = 0; s < env.size(); ++s)
                env[s] = std::max(v.degree()[s], pv.degree()[s]);
            Poly merged = v.promote(env);
            merged += pv.promote(env);
            v = std::move(merged);
        }
        value.emplace(a, v);
        return v;
    };

    RingSigmaElement out;
    for (const auto& [atom, poly] : marked) {
        Poly v = accumulate(atom);
        std::vector<AtomId> holes = children.count(atom) ? children[atom] : std::vector<AtomId>{};
        emit_cover(f, atom, holes, v, out.pieces);
    }
    return out;
}

std::vector<double> piece_norms(const Filtration& f, const RingSigmaElement& g, double p) {
    std::vector<double> out;
    for (const RingSigmaPiece& piece : g.pieces) {
        if (piece.is_atom) {
            out.push_back(lp_norm(piece.poly, Region::of_box(f.atom(piece.atom).rect), p).value);
        } else {
            LeafFunction lf(f);
            lf.add_on_ring(piece.ring, piece.poly);
            out.push_back(lf.lp(p));
        }
    }
    return out;
}

}  // namespace binfilt
