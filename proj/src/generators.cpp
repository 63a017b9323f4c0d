#include "binfilt/generators.hpp"

#include "binfilt/util.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace binfilt {

LambdaSequence lambda_sequence(double gamma, int n) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("lambda_sequence: gamma must be in (0,1)");
    if (n < 0) throw InvalidArgument("lambda_sequence: n must be >= 0");
    LambdaSequence seq;
    seq.gamma = gamma;
    seq.n = n;

    const double inv_gamma = 1.0 / gamma;
    const long q = std::lround(inv_gamma);
    const bool exact = std::abs(inv_gamma - static_cast<double>(q)) < 1e-12;

    std::vector<double> cur{1.0, 1.0};
    std::vector<Rational> cur_exact;
    if (exact) cur_exact = {Rational(1), Rational(1)};
    for (int m = 1; m <= n; ++m) {
        const double mu = std::pow(2.0, -static_cast<double>(m) * inv_gamma);
        std::vector<double> next;
        next.reserve(cur.size() * 2 - 1);
        for (std::size_t k = 0; k + 1 < cur.size(); ++k) {
            next.push_back(cur[k]);
            next.push_back(mu);
        }
        next.push_back(cur.back());
        cur = std::move(next);
        if (exact) {
            Rational mu_exact(BigInt(1), BigInt(1) << static_cast<unsigned>(m * q));
            std::vector<Rational> nexte;
            nexte.reserve(cur_exact.size() * 2 - 1);
            for (std::size_t k = 0; k + 1 < cur_exact.size(); ++k) {
                nexte.push_back(cur_exact[k]);
                nexte.push_back(mu_exact);
            }
            nexte.push_back(cur_exact.back());
            cur_exact = std::move(nexte);
        }
    }
    seq.values = std::move(cur);
    seq.exact = std::move(cur_exact);
    return seq;
}

Filtration filtration_from_fractions(const std::vector<Rational>& fractions,
                                     SplitSchedule schedule) {
    for (const Rational& t : fractions)
        if (!(Rational(0) < t && t <= Rational(1, 2)))
            throw InvalidArgument("filtration_from_fractions: fractions must lie in (0, 1/2]");
    Filtration f = Filtration::abstract_root();
    if (schedule == SplitSchedule::ChainDescent) {
        AtomId cur = f.root();
        for (const Rational& t : fractions) {
            int k = f.apply_split_fraction(cur, t);
            cur = f.split(k).large_id;  // continue on the surviving piece
        }
    } else {
        std::deque<AtomId> queue{f.root()};
        for (const Rational& t : fractions) {
            AtomId id = queue.front();
            queue.pop_front();
            int k = f.apply_split_fraction(id, t);
            queue.push_back(f.split(k).small_id);
            queue.push_back(f.split(k).large_id);
        }
    }
    return f;
}

std::vector<Rational> fractions_for_buddies(const std::vector<Rational>& buddies,
                                            const Rational& final_measure) {
    Rational remaining = final_measure;
    for (const Rational& b : buddies) remaining += b;
    std::vector<Rational> out;
    for (const Rational& b : buddies) {
        out.push_back(b / remaining);
        remaining -= b;
    }
    return out;
}

GeneratedFiltration thm42_filtration(double tau0, double p, int i_max) {
    if (!(tau0 > 0.0 && tau0 < p)) throw InvalidArgument("thm42_filtration: requires 0 < tau0 < p");
    if (i_max < 1) throw InvalidArgument("thm42_filtration: i_max must be >= 1");
    const double gamma = tau0 / p;

    GeneratedFiltration out{Filtration::unit_cube(1), {}, {}};
    Filtration& f = out.filtration;
    AtomId rest = f.root();
    Rational rest_lo(0), rest_hi(1);
    for (int i = 1; i <= i_max; ++i) {
        LambdaSequence lam = lambda_sequence(gamma, i);
        out.lambdas.push_back(lam);
        const Rational width = pow_rational(Rational(1, 2), i);

        // the left piece of width 2^{-i} hosts the chain; the right piece is
        // carried on (and the final remainder stays an unsplit leaf)
        Rational cut = rest_lo + width;
        int k = f.apply_split(rest, 0, cut);
        AtomId a = f.split(k).small_id, b = f.split(k).large_id;
        AtomId region = f.atom(a).rect.lo(0) == rest_lo ? a : b;
        rest = (region == a) ? b : a;
        rest_lo = cut;

        // chain with buddy measures z * lambda_{i,j}, j = 1..2^i
        Chain chain;
        chain.atoms.push_back(region);
        Rational total(0);
        if (lam.has_exact())
            for (const Rational& v : lam.exact) total += v;
        else
            for (double v : lam.values) total += Rational(v);
        const Rational region_measure = f.atom(region).measure;
        const Rational z = region_measure / total;
        AtomId cur = region;
        for (std::size_t j = 1; j < (lam.has_exact() ? lam.exact.size() : lam.values.size()); ++j) {
            Rational buddy = z * (lam.has_exact() ? lam.exact[j] : Rational(lam.values[j]));
            Rational cut = f.atom(cur).rect.lo(0) + buddy;
            int k = f.apply_split(cur, 0, cut);
            AtomId a = f.split(k).small_id, b = f.split(k).large_id;
            AtomId next = f.atom(a).rect.lo(0) == cut ? a : b;
            chain.atoms.push_back(next);
            cur = next;
        }
        out.designated_chains.push_back(std::move(chain));
    }
    return out;
}

GeneratedFiltration example55_chain(int n, double p, double tau, int r, const Rational& rho) {
    if (!(rho > 0 && rho < 1)) throw InvalidArgument("example55: rho must be in (0,1)");
    if (!(tau > 0.0 && tau < p)) throw InvalidArgument("example55: requires 0 < tau < p");
    const double omega = p * r + 1.0;
    const Rational& rho_rat = rho;
    const Rational c = (Rational(1) - rho_rat) / 4;

    // h = 2^{-omega n}, exact when omega is an integer
    const long omega_int = std::lround(omega);
    Rational h;
    if (std::abs(omega - static_cast<double>(omega_int)) < 1e-12) {
        h = Rational(BigInt(1), BigInt(1) << static_cast<unsigned>(omega_int * n));
    } else {
        double hd = std::pow(2.0, -omega * n);
        if (hd <= 0.0)
            throw InvalidArgument("example55: 2^{-omega n} underflows for non-integer omega");
        h = Rational(hd);
    }
    // precondition n 2^{-omega n} <= (1-rho)/2
    if (Rational(n) * h > (Rational(1) - rho_rat) / 2) {
        int minimal = n;
        while (true) {
            ++minimal;
            Rational hm =
                std::abs(omega - static_cast<double>(omega_int)) < 1e-12
                    ? Rational(BigInt(1), BigInt(1) << static_cast<unsigned>(omega_int * minimal))
                    : Rational(std::pow(2.0, -omega * minimal));
            if (Rational(minimal) * hm <= (Rational(1) - rho_rat) / 2) break;
            if (minimal > 64 * n + 64) throw NumericalError("example55: no admissible n found");
        }
        throw InvalidArgument("example55: n too small for rho; minimal admissible n is " +
                              std::to_string(minimal));
    }

    GeneratedFiltration out{Filtration::unit_cube(1), {}, {}};
    Filtration& f = out.filtration;
    Chain chain;
    chain.atoms.push_back(f.root());  // X_{-1} = [0,1]

    AtomId cur = f.root();
    auto descend = [&](const Rational& cut, bool keep_right) {
        int k = f.apply_split(cur, 0, cut);
        AtomId a = f.split(k).small_id, b = f.split(k).large_id;
        AtomId next;
        if (keep_right)
            next = f.atom(a).rect.lo(0) == cut ? a : b;
        else
            next = f.atom(a).rect.hi(0) == cut ? a : b;
        chain.atoms.push_back(next);
        cur = next;
    };

    // X_0: cut the right buddy of measure c (s = 0 term)
    Rational right = Rational(1) - c;  // current right endpoint after the cut
    descend(right, false);
    for (int l = 1; l <= n; ++l) {
        // X_{2l-1}: left buddy of measure h
        Rational left = Rational(l) * h;
        descend(left, true);
        // X_{2l}: right buddy of measure c 2^{-l}
        right -= c * pow_rational(Rational(1, 2), l);
        descend(right, false);
    }
    out.designated_chains.push_back(std::move(chain));
    return out;
}

GeneratedFiltration example58_partition(int dim, int kappa, int axis_i, int off_depth, int chain_n,
                                        double p, double tau, const Rational& rho) {
    if (dim < 2) throw InvalidArgument("example58: requires d >= 2");
    if (axis_i < 0 || axis_i >= dim) throw InvalidArgument("example58: axis out of range");

    // template chain on [0,1] along the designated axis
    GeneratedFiltration tmpl = example55_chain(chain_n, p, tau, kappa, rho);
    const Filtration& tf = tmpl.filtration;

    GeneratedFiltration out{Filtration::unit_cube(dim), {}, {}};
    Filtration& f = out.filtration;

    // off-axis halving splits, breadth first over the cycling off-axes
    std::vector<AtomId> cells{f.root()};
    int axis_cycle = 0;
    for (int lev = 0; lev < off_depth; ++lev) {
        int ax = axis_cycle % (dim - 1);
        int real_axis = ax >= axis_i ? ax + 1 : ax;
        ++axis_cycle;
        std::vector<AtomId> next;
        for (AtomId id : cells) {
            const Rect& rect = f.atom(id).rect;
            Rational cut = (rect.lo(real_axis) + rect.hi(real_axis)) / 2;
            int k = f.apply_split(id, real_axis, cut);
            next.push_back(f.split(k).small_id);
            next.push_back(f.split(k).large_id);
        }
        cells = std::move(next);
    }

    // embed the template chain in every cell along axis_i
    for (AtomId cell : cells) {
        Chain chain;
        chain.atoms.push_back(cell);
        AtomId cur = cell;
        const Rational lo = f.atom(cell).rect.lo(axis_i);
        const Rational wid = f.atom(cell).rect.side(axis_i);
        // replay the template's splits along its designated chain
        const Chain& tc = tmpl.designated_chains[0];
        for (int j = 1; j < tc.length(); ++j) {
            const Rect& trect = tf.atom(tc.atoms[static_cast<std::size_t>(j)]).rect;
            const Rect& prev = tf.atom(tc.atoms[static_cast<std::size_t>(j - 1)]).rect;
            bool left_moved = trect.lo(0) != prev.lo(0);
            Rational tcut = left_moved ? trect.lo(0) : trect.hi(0);
            Rational cut = lo + tcut * wid;
            int k = f.apply_split(cur, axis_i, cut);
            AtomId a = f.split(k).small_id, b = f.split(k).large_id;
            AtomId nxt = left_moved ? (f.atom(a).rect.lo(axis_i) == cut ? a : b)
                                    : (f.atom(a).rect.hi(axis_i) == cut ? a : b);
            chain.atoms.push_back(nxt);
            cur = nxt;
        }
        out.designated_chains.push_back(std::move(chain));
    }
    return out;
}

Filtration dyadic_filtration(int dim, int levels) {
    Filtration f = Filtration::unit_cube(dim);
    std::vector<AtomId> level{f.root()};
    for (int lev = 0; lev < levels; ++lev) {
        int axis = lev % dim;
        std::vector<AtomId> next;
        for (AtomId id : level) {
            const Rect& rect = f.atom(id).rect;
            Rational cut = (rect.lo(axis) + rect.hi(axis)) / 2;
            int k = f.apply_split(id, axis, cut);
            next.push_back(f.split(k).small_id);
            next.push_back(f.split(k).large_id);
        }
        level = std::move(next);
    }
    return f;
}

Filtration regular_filtration(int levels, const Rational& t) {
    if (!(Rational(0) < t && t < Rational(1)))
        throw InvalidArgument("regular_filtration: fraction out of range");
    Filtration f = Filtration::unit_cube(1);
    std::vector<AtomId> level{f.root()};
    for (int lev = 0; lev < levels; ++lev) {
        std::vector<AtomId> next;
        for (AtomId id : level) {
            const Rect& rect = f.atom(id).rect;
            Rational cut = rect.lo(0) + t * rect.side(0);
            int k = f.apply_split(id, 0, cut);
            next.push_back(f.split(k).small_id);
            next.push_back(f.split(k).large_id);
        }
        level = std::move(next);
    }
    return f;
}

Filtration random_filtration(std::uint64_t seed, int dim, int n_splits, int max_depth) {
    Filtration f = Filtration::unit_cube(dim);
    std::mt19937_64 rng = seeded_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < n_splits; ++k) {
        std::vector<AtomId> leaves;
        for (AtomId id : f.leaves())
            if (f.atom(id).depth < max_depth) leaves.push_back(id);
        if (leaves.empty()) break;
        AtomId id = leaves[rng() % leaves.size()];
        int axis = static_cast<int>(rng() % static_cast<std::uint64_t>(dim));
        // mostly balanced cuts with an occasional strongly unbalanced one
        double t = unif(rng) < 0.15 ? 0.02 + 0.18 * unif(rng) : 0.2 + 0.6 * unif(rng);
        const Rect& rect = f.atom(id).rect;
        Rational cut = rect.lo(axis) + Rational(t) * rect.side(axis);
        f.apply_split(id, axis, cut);
    }
    return f;
}

}  // namespace binfilt
