#include "binfilt/generators.hpp"
#include "binfilt/partition.hpp"
#include "binfilt/util.hpp"

#include "doctest.h"

#include <cmath>

using namespace binfilt;

namespace {

/// Chain of left children of a repeatedly halved interval: |X_i| = 2^{1-i}.
Filtration halving_chain(int steps) {
    Filtration f = Filtration::unit_cube(1);
    AtomId cur = f.root();
    for (int i = 0; i < steps; ++i) {
        const Rect& r = f.atom(cur).rect;
        int k = f.apply_split(cur, 0, (r.lo(0) + r.hi(0)) / 2);
        cur = f.split(k).small_id;
    }
    return f;
}

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("apply_split basics") {
    Filtration f = Filtration::abstract_root();
    f.apply_split_fraction(0, Rational(1, 2));
    CHECK(f.atom(1).measure == Rational(1, 2));
    CHECK(f.atom(2).measure == Rational(1, 2));
    // tie: the lexicographically lower piece is small
    CHECK(f.atom(1).rect.lo(0) == Rational(0));

    Filtration g = Filtration::unit_cube(2);
    g.apply_split(0, 0, Rational(1, 4));
    CHECK(g.atom(1).measure == Rational(1, 4));
    CHECK(g.atom(1).rect.hi(0) == Rational(1, 4));
    CHECK(g.atom(1).rect.hi(1) == Rational(1));
    CHECK(g.atom(2).measure == Rational(3, 4));

    CHECK_THROWS_AS(f.apply_split_fraction(0, Rational(1, 2)), InvalidArgument);  // non-leaf
    CHECK_THROWS_AS(f.apply_split_fraction(1, Rational(0)), InvalidArgument);     // empty atom
    CHECK_THROWS_AS(g.apply_split(1, 0, Rational(1, 2)), InvalidArgument);        // cut outside
}

TEST_CASE("deterministic ids: k-th split makes 2k-1 and 2k") {
    Filtration f = dyadic_filtration(1, 2);
    CHECK(f.split(1).small_id == 1);
    CHECK(f.split(1).large_id == 2);
    CHECK(f.split(2).small_id == 3);
    CHECK(f.split(3).large_id == 6);
}

TEST_CASE("relatives") {
    Filtration f = dyadic_filtration(1, 1);
    Relatives r = f.relatives(1);
    CHECK(*r.pp == 0);
    CHECK(*r.buddy == 2);
    CHECK(r.in_A_prime);

    Filtration g = Filtration::unit_cube(1);
    g.apply_split(0, 0, Rational(1, 4));
    CHECK(g.atom(*g.relatives(0).small).measure == Rational(1, 4));

    CHECK_THROWS_WITH_AS(g.pp(0), doctest::Contains("A not in A*"), InvalidArgument);
}

TEST_CASE("chain_of") {
    Filtration f = dyadic_filtration(1, 3);
    CHECK(f.chain_of(f.root()).length() == 1);
    AtomId leaf = f.leaves().front();
    Chain c = f.chain_of(leaf);
    CHECK(c.length() == 4);
    for (int i = 0; i + 1 < c.length(); ++i) {
        const Atom& a = f.atom(c.atoms[static_cast<std::size_t>(i)]);
        bool child = c.atoms[static_cast<std::size_t>(i + 1)] == a.small_child ||
                     c.atoms[static_cast<std::size_t>(i + 1)] == a.large_child;
        CHECK(child);
        CHECK(f.atom(c.atoms[static_cast<std::size_t>(i + 1)]).measure_d <
              f.atom(c.atoms[static_cast<std::size_t>(i)]).measure_d);
    }
}

TEST_CASE("decompose_fat traces the induction") {
    Filtration f = halving_chain(7);
    // X_1 = root, ..., X_8 with |X_i| = 2^{1-i}
    Chain c;
    AtomId cur = f.root();
    c.atoms.push_back(cur);
    while (!f.atom(cur).is_leaf()) {
        cur = f.atom(cur).small_child;
        c.atoms.push_back(cur);
    }
    CHECK(c.length() == 8);

    auto pieces = decompose_fat(f, c, 0.5);
    CHECK(pieces.size() == 4);
    CHECK(pieces[0].length() == 2);
    CHECK(pieces[0].atoms[0] == c.atoms[6]);  // first piece is (X_7, X_8)
    CHECK(pieces[0].atoms[1] == c.atoms[7]);
    // pieces are fat, concatenate to the input, and min-measures are ordered
    std::vector<AtomId> concat;
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it)
        concat.insert(concat.end(), it->atoms.begin(), it->atoms.end());
    CHECK(concat == c.atoms);
    for (std::size_t s = 0; s + 1 < pieces.size(); ++s) {
        double min_s = f.atom(pieces[s].bottom()).measure_d;
        double min_s1 = f.atom(pieces[s + 1].bottom()).measure_d;
        CHECK(min_s < 0.5 * min_s1);
        CHECK(is_fat(f, pieces[s], 0.5));
    }

    // an already-fat chain stays in one piece
    Chain top2 = c.subchain(0, 1);
    CHECK(decompose_fat(f, top2, 0.5).size() == 1);

    // 0.9-fat input at rho = 0.5: k <= 1 + log 0.9 / log 0.5 -> one piece
    Filtration g = Filtration::unit_cube(1);
    int k = g.apply_split(0, 0, Rational(1, 20));
    Chain fat{{0, g.split(k).large_id}};  // measures 1 and 0.95
    CHECK(is_fat(g, fat, 0.9));
    CHECK(decompose_fat(g, fat, 0.5).size() == 1);
}

TEST_CASE("enumerate_fat_chains") {
    Filtration f = dyadic_filtration(1, 1);
    auto chains = enumerate_fat_chains(f, 0.5, 2);
    REQUIRE(chains.size() == 2);
    CHECK(chains[0].top() == 0);
    CHECK(chains[0].bottom() == 1);
    CHECK(chains[1].bottom() == 2);

    // regular tree with |A''| <= c3 |A|: length <= 1 + log rho / log c3
    Filtration reg = regular_filtration(8, Rational(1, 4));
    const double c3 = 0.75, rho = 0.5;
    const double bound = 1.0 + std::log(rho) / std::log(c3);
    for (const Chain& c : enumerate_fat_chains(reg, rho, 2))
        CHECK(static_cast<double>(c.length()) <= bound);

    // a smaller rho yields every chain of the larger rho as a subchain
    Filtration rnd = random_filtration(3, 1, 40, 12);
    auto big = enumerate_fat_chains(rnd, 0.75, 2);
    auto small = enumerate_fat_chains(rnd, 0.5, 2);
    for (const Chain& c : big) {
        bool found = false;
        for (const Chain& s : small) {
            if (s.length() < c.length()) continue;
            for (int off = 0; off + c.length() <= s.length() && !found; ++off) {
                bool match = true;
                for (int i = 0; i < c.length() && match; ++i)
                    match = s.atoms[static_cast<std::size_t>(off + i)] ==
                            c.atoms[static_cast<std::size_t>(i)];
                found = match;
            }
            if (found) break;
        }
        CHECK(found);
    }
}

TEST_CASE("measure conservation") {
    Filtration f = random_filtration(7, 2, 60, 10);
    Rational total(0);
    for (AtomId id : f.leaves()) total += f.atom(id).measure;
    CHECK(total == Rational(1));  // exact, rationals all the way down

    Filtration a = filtration_from_fractions(
        {Rational(1, 3), Rational(1, 2), Rational(2, 5)}, SplitSchedule::Breadth);
    Rational atot(0);
    for (AtomId id : a.leaves()) atot += a.atom(id).measure;
    CHECK(atot == Rational(1));
}

TEST_CASE("rings") {
    // d = 1: I = [0,1], J = [0.3, 0.6]
    Filtration f = Filtration::unit_cube(1);
    f.apply_split(0, 0, Rational(3, 10));   // [0,.3] | [.3,1]
    f.apply_split(2, 0, Rational(6, 10));   // [.3,.6] | [.6,1]
    AtomId inner = 3;
    CHECK(f.atom(inner).rect.lo(0) == Rational(3, 10));
    Ring ring = make_ring(f, 0, inner);
    CHECK(!ring.degenerate);
    CHECK(ring_measure(f, ring) == Rational(7, 10));

    auto rects = ring_rectangles(f, ring);
    REQUIRE(rects.size() == 2);
    CHECK(rects[0].has_value());
    CHECK(rects[0]->hi(0) == Rational(3, 10));
    CHECK(rects[1]->lo(0) == Rational(6, 10));

    RingSides sides = ring_sides(f, ring, 0);
    CHECK(sides.minus_len() == Rational(3, 10));
    CHECK(sides.plus_len() == Rational(4, 10));

    // degenerate: inner is a direct child
    Ring deg = make_ring(f, 0, 1);
    CHECK(deg.degenerate);
    CHECK_THROWS_AS(make_ring(f, 0, 0), InvalidArgument);
    CHECK_THROWS_AS(make_ring(f, 1, 3), InvalidArgument);  // incomparable

    // d = 2: J = [0.25,1] x [0,1] leaves one nonempty rectangle
    Filtration g = Filtration::unit_cube(2);
    g.apply_split(0, 0, Rational(1, 4));
    g.apply_split(2, 0, Rational(1, 2));
    Ring r2 = make_ring(g, 0, 3);  // [0.25,0.5]x[0,1]
    auto rr = ring_rectangles(g, r2);
    int nonempty = 0;
    for (const auto& r : rr) nonempty += r.has_value() ? 1 : 0;
    CHECK(nonempty == 2);  // left gap on axis 0ish and right gap
    // disjoint boxes cover the ring measure exactly
    Rational cover(0);
    for (const Rect& b : ring_disjoint_boxes(g, r2)) cover += b.volume();
    CHECK(cover == ring_measure(g, r2));

    // J touching the boundary on all axes but one gap: one nonempty side
    Ring touch = make_ring(g, 0, 2);  // [0.25,1]x[0,1], degenerate ring
    CHECK(touch.degenerate);
    auto tr = ring_rectangles(g, touch);
    int cnt = 0;
    for (const auto& r : tr) cnt += r.has_value() ? 1 : 0;
    CHECK(cnt == 1);
    CHECK(tr[0]->hi(0) == Rational(1, 4));
}

TEST_CASE("in_A_lambda") {
    Filtration f = Filtration::abstract_root();
    f.apply_split_fraction(0, Rational(1, 2));
    CHECK(f.in_A_lambda(1, 0.5));
    CHECK(f.in_A_lambda(1, 1.0));
    Filtration g = Filtration::abstract_root();
    g.apply_split_fraction(0, Rational(1, 10));
    CHECK(!g.in_A_lambda(2, 0.5));  // |A| = 0.9 |pp|
    CHECK(g.in_A_lambda(2, 1.0));
    CHECK_THROWS_AS(f.in_A_lambda(0, 0.5), InvalidArgument);
}

TEST_CASE("filtration file round trip") {
    Filtration f = Filtration::unit_cube(2);
    f.apply_split(0, 1, parse_rational("1/3"), true);
    f.apply_split(2, 0, Rational(0.25));
    nlohmann::json j = f.to_json();
    CHECK(j["splits"][0]["cut"] == "1/3");
    CHECK(j["splits"][0]["axis"] == 2);
    CHECK(j["splits"][1]["cut"] == 0.25);
    Filtration g = Filtration::from_json(j);
    CHECK(g.to_json() == j);
    CHECK(g.atom(3).measure == f.atom(3).measure);

    Filtration a = filtration_from_fractions({Rational(1, 3)}, SplitSchedule::Breadth);
    nlohmann::json ja = a.to_json();
    CHECK(ja["mode"] == "abstract");
    CHECK(Filtration::from_json(ja).to_json() == ja);
}

}  // TEST_SUITE
