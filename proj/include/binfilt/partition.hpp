#pragma once

#include "binfilt/rect.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace binfilt {

enum class Mode { Geometric, Abstract };

using AtomId = int;
constexpr AtomId kNoAtom = -1;

/// Node of the binary split tree. In geometric mode every atom carries a
/// rectangle; in abstract mode only the measure is meaningful (internally the
/// tree is realized as nested subintervals of [0,1], which is measure
/// equivalent and lets constant-space code share one path).
struct Atom {
    AtomId id = kNoAtom;
    Rect rect;
    Rational measure;
    double measure_d = 0.0;
    double log2_measure = 0.0;
    AtomId parent = kNoAtom;
    AtomId small_child = kNoAtom;
    AtomId large_child = kNoAtom;
    /// 1-based index of the split that divided this atom, 0 when it is a leaf.
    int split_index = 0;
    int depth = 0;

    bool is_leaf() const { return small_child == kNoAtom; }
};

struct SplitRecord {
    AtomId atom = kNoAtom;
    int axis = 0;           // geometric mode
    Rational cut;           // geometric mode: absolute coordinate
    Rational fraction;      // abstract mode: measure fraction of the first piece
    bool by_fraction = false;
    bool textual = false;   // cut/fraction arrived as a "p/q" string; re-emit as such
    AtomId small_id = kNoAtom;
    AtomId large_id = kNoAtom;
};

/// Descending sequence of atoms, each a child of the previous one.
struct Chain {
    std::vector<AtomId> atoms;  // top first

    int length() const { return static_cast<int>(atoms.size()); }
    AtomId top() const { return atoms.front(); }
    AtomId bottom() const { return atoms.back(); }
    Chain subchain(int first, int last) const {  // inclusive indices
        return Chain{std::vector<AtomId>(atoms.begin() + first, atoms.begin() + last + 1)};
    }
};

/// Difference of two nested atoms. Degenerate when it coincides with an atom
/// (inner is a direct child of outer).
struct Ring {
    AtomId outer = kNoAtom;
    AtomId inner = kNoAtom;
    bool degenerate = false;
};

struct Relatives {
    std::optional<AtomId> pp;
    std::optional<AtomId> buddy;
    std::optional<AtomId> small;
    std::optional<AtomId> large;
    bool in_A_prime = false;   // A = small(pp(A))
    bool in_A_dprime = false;  // A = large(pp(A))
};

/// One-dimensional gaps of a ring along a fixed axis plus the matching slabs.
struct RingSides {
    int axis = 0;
    std::optional<Rational> minus_lo, minus_hi;  // R_-^s, empty when no gap
    std::optional<Rational> plus_lo, plus_hi;    // R_+^s
    std::optional<Rect> k_minus;                 // K_s^-
    std::optional<Rect> k_plus;                  // K_s^+

    bool has_minus() const { return minus_lo.has_value(); }
    bool has_plus() const { return plus_lo.has_value(); }
    Rational minus_len() const { return *minus_hi - *minus_lo; }
    Rational plus_len() const { return *plus_hi - *plus_lo; }
};

class Filtration {
public:
    /// Geometric filtration over [0,1]^dim.
    static Filtration unit_cube(int dim);
    /// Abstract filtration over a probability space (measures only).
    static Filtration abstract_root();

    int dim() const { return dim_; }
    Mode mode() const { return mode_; }
    AtomId root() const { return 0; }
    int atom_count() const { return static_cast<int>(atoms_.size()); }
    int split_count() const { return static_cast<int>(splits_.size()); }
    const Atom& atom(AtomId id) const;
    const SplitRecord& split(int k) const;  // 1-based
    const std::vector<Atom>& atoms() const { return atoms_; }

    /// Splits a leaf along an axis at an interior coordinate (geometric mode).
    /// Returns the 1-based split index; the k-th split creates atom ids 2k-1
    /// (small) and 2k (large).
    int apply_split(AtomId atom, int axis, const Rational& cut, bool textual = false);
    /// Splits a leaf by measure fraction t in (0,1) (abstract mode).
    int apply_split_fraction(AtomId atom, const Rational& t, bool textual = false);

    bool is_leaf(AtomId id) const { return atom(id).is_leaf(); }
    std::vector<AtomId> leaves() const;
    std::vector<AtomId> leaves_under(AtomId id) const;
    /// All atoms of the final sigma-algebra (every node of the tree).
    std::vector<AtomId> all_atoms() const;
    int max_depth() const;

    Relatives relatives(AtomId id) const;
    AtomId pp(AtomId id) const;     // throws on root ("A not in A*")
    AtomId buddy(AtomId id) const;  // throws on root
    Chain chain_of(AtomId id) const;
    bool in_A_lambda(AtomId id, const Rational& lambda) const;
    bool in_A_lambda(AtomId id, double lambda) const;

    Rational measure_ratio(AtomId child, AtomId ancestor) const;
    bool is_ancestor(AtomId anc, AtomId desc) const;  // non-strict

    nlohmann::json to_json() const;
    static Filtration from_json(const nlohmann::json& j);

private:
    Filtration() = default;
    int dim_ = 1;
    Mode mode_ = Mode::Geometric;
    std::vector<Atom> atoms_;
    std::vector<SplitRecord> splits_;
};

bool is_full_chain(const Filtration& f, const Chain& c);
bool is_fat(const Filtration& f, const Chain& c, double rho);

/// Decomposition of a full chain into rho-fat pieces; pieces are emitted
/// bottom-up and concatenate (in reverse emission order) to the input. The
/// minimal measures of consecutive pieces satisfy min|X_s| < rho * min|X_{s+1}|.
std::vector<Chain> decompose_fat(const Filtration& f, const Chain& c, double rho);

/// All maximal full-chain segments (X_1..X_n) with |X_n| >= rho |X_1| and
/// n >= min_len, ordered by top atom id, then length, then bottom id.
/// Every fat segment is a contiguous subchain of some emitted chain.
std::vector<Chain> enumerate_fat_chains(const Filtration& f, double rho, int min_len);

Ring ring_of(const Filtration& f, const Chain& c);
Ring make_ring(const Filtration& f, AtomId outer, AtomId inner);
Rational ring_measure(const Filtration& f, const Ring& r);

/// The 2d covering slabs of a geometric ring (left gap then right gap per
/// axis); entries without a gap are absent. For d > 1 the slabs overlap.
std::vector<std::optional<Rect>> ring_rectangles(const Filtration& f, const Ring& r);
RingSides ring_sides(const Filtration& f, const Ring& r, int axis);
/// Pairwise disjoint boxes with union R (used for integration).
std::vector<Rect> ring_disjoint_boxes(const Filtration& f, const Ring& r);

}  // namespace binfilt
