#include "binfilt/partition.hpp"

#include "binfilt/util.hpp"

#include <algorithm>

namespace binfilt {

Filtration Filtration::unit_cube(int dim) {
    if (dim < 1) throw InvalidArgument("filtration: dim must be >= 1");
    Filtration f;
    f.dim_ = dim;
    f.mode_ = Mode::Geometric;
    Atom root;
    root.id = 0;
    root.rect = Rect::unit_cube(dim);
    root.measure = Rational(1);
    root.measure_d = 1.0;
    root.log2_measure = 0.0;
    f.atoms_.push_back(std::move(root));
    return f;
}

Filtration Filtration::abstract_root() {
    Filtration f = unit_cube(1);
    f.mode_ = Mode::Abstract;
    return f;
}

const Atom& Filtration::atom(AtomId id) const {
    if (id < 0 || id >= atom_count()) throw InvalidArgument("unknown atom id");
    return atoms_[static_cast<std::size_t>(id)];
}

const SplitRecord& Filtration::split(int k) const {
    if (k < 1 || k > split_count()) throw InvalidArgument("unknown split index");
    return splits_[static_cast<std::size_t>(k - 1)];
}

int Filtration::apply_split(AtomId id, int axis, const Rational& cut, bool textual) {
    if (mode_ != Mode::Geometric)
        throw InvalidArgument("apply_split: axis+cut splits require geometric mode");
    const Atom& a = atom(id);
    if (!a.is_leaf()) throw InvalidArgument("apply_split: atom is not a current leaf");
    if (axis < 0 || axis >= dim_) throw InvalidArgument("apply_split: axis out of range");
    if (!(a.rect.lo(axis) < cut && cut < a.rect.hi(axis)))
        throw InvalidArgument("apply_split: cut must lie strictly inside the atom");

    std::vector<Rational> lo1, hi1, lo2, hi2;
    for (int s = 0; s < dim_; ++s) {
        lo1.push_back(a.rect.lo(s));
        hi1.push_back(s == axis ? cut : a.rect.hi(s));
        lo2.push_back(s == axis ? cut : a.rect.lo(s));
        hi2.push_back(a.rect.hi(s));
    }
    Rect left(std::move(lo1), std::move(hi1));
    Rect right(std::move(lo2), std::move(hi2));

    // "small" is the piece of smaller measure; at a tie the lexicographically
    // lower corner wins, which is always the left piece.
    Rational ml = left.volume(), mr = right.volume();
    bool left_is_small = !(mr < ml);

    int k = split_count() + 1;
    Atom small_atom, large_atom;
    small_atom.id = 2 * k - 1;
    large_atom.id = 2 * k;
    small_atom.rect = left_is_small ? left : right;
    large_atom.rect = left_is_small ? right : left;
    small_atom.measure = left_is_small ? ml : mr;
    large_atom.measure = left_is_small ? mr : ml;
    for (Atom* c : {&small_atom, &large_atom}) {
        c->measure_d = to_double(c->measure);
        c->log2_measure = log2_rational(c->measure);
        c->parent = id;
        c->depth = a.depth + 1;
    }

    Atom& mut = atoms_[static_cast<std::size_t>(id)];
    mut.small_child = small_atom.id;
    mut.large_child = large_atom.id;
    mut.split_index = k;

    SplitRecord rec;
    rec.atom = id;
    rec.axis = axis;
    rec.cut = cut;
    rec.by_fraction = false;
    rec.textual = textual;
    rec.small_id = small_atom.id;
    rec.large_id = large_atom.id;
    splits_.push_back(std::move(rec));
    atoms_.push_back(std::move(small_atom));
    atoms_.push_back(std::move(large_atom));
    return k;
}

int Filtration::apply_split_fraction(AtomId id, const Rational& t, bool textual) {
    if (mode_ != Mode::Abstract)
        throw InvalidArgument("apply_split_fraction: fraction splits require abstract mode");
    if (!(Rational(0) < t && t < Rational(1)))
        throw InvalidArgument("apply_split_fraction: fraction must lie in (0,1)");
    const Atom& a = atom(id);
    if (!a.is_leaf()) throw InvalidArgument("apply_split_fraction: atom is not a current leaf");
    // realize on the underlying interval: first piece gets measure t*|A|
    Rational cut = a.rect.lo(0) + t * a.rect.side(0);
    Mode saved = mode_;
    mode_ = Mode::Geometric;
    int k = 0;
    try {
        k = apply_split(id, 0, cut, textual);
    } catch (...) {
        mode_ = saved;
        throw;
    }
    mode_ = saved;
    splits_.back().by_fraction = true;
    splits_.back().fraction = t;
    return k;
}

std::vector<AtomId> Filtration::leaves() const {
    std::vector<AtomId> out;
    for (const Atom& a : atoms_)
        if (a.is_leaf()) out.push_back(a.id);
    return out;
}

std::vector<AtomId> Filtration::leaves_under(AtomId id) const {
    std::vector<AtomId> out, stack{id};
    while (!stack.empty()) {
        AtomId cur = stack.back();
        stack.pop_back();
        const Atom& a = atom(cur);
        if (a.is_leaf()) {
            out.push_back(cur);
        } else {
            stack.push_back(a.large_child);
            stack.push_back(a.small_child);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<AtomId> Filtration::all_atoms() const {
    std::vector<AtomId> out(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) out[i] = static_cast<AtomId>(i);
    return out;
}

int Filtration::max_depth() const {
    int d = 0;
    for (const Atom& a : atoms_) d = std::max(d, a.depth);
    return d;
}

Relatives Filtration::relatives(AtomId id) const {
    const Atom& a = atom(id);
    Relatives r;
    if (a.parent != kNoAtom) {
        r.pp = a.parent;
        const Atom& p = atom(a.parent);
        r.buddy = (p.small_child == id) ? p.large_child : p.small_child;
        r.in_A_prime = p.small_child == id;
        r.in_A_dprime = p.large_child == id;
    }
    if (!a.is_leaf()) {
        r.small = a.small_child;
        r.large = a.large_child;
    }
    return r;
}

AtomId Filtration::pp(AtomId id) const {
    const Atom& a = atom(id);
    if (a.parent == kNoAtom) throw InvalidArgument("A not in A*: the root has no predecessor");
    return a.parent;
}

AtomId Filtration::buddy(AtomId id) const {
    AtomId p = pp(id);
    const Atom& pa = atom(p);
    return pa.small_child == id ? pa.large_child : pa.small_child;
}

Chain Filtration::chain_of(AtomId id) const {
    Chain c;
    AtomId cur = id;
    while (cur != kNoAtom) {
        c.atoms.push_back(cur);
        cur = atom(cur).parent;
    }
    std::reverse(c.atoms.begin(), c.atoms.end());
    return c;
}

bool Filtration::in_A_lambda(AtomId id, const Rational& lambda) const {
    AtomId p = pp(id);
    return atom(id).measure <= lambda * atom(p).measure;
}

bool Filtration::in_A_lambda(AtomId id, double lambda) const {
    return in_A_lambda(id, Rational(lambda));
}

Rational Filtration::measure_ratio(AtomId child, AtomId ancestor) const {
    return atom(child).measure / atom(ancestor).measure;
}

bool Filtration::is_ancestor(AtomId anc, AtomId desc) const {
    AtomId cur = desc;
    while (cur != kNoAtom) {
        if (cur == anc) return true;
        cur = atom(cur).parent;
    }
    return false;
}

bool is_full_chain(const Filtration& f, const Chain& c) {
    if (c.atoms.empty()) return false;
    for (std::size_t i = 0; i + 1 < c.atoms.size(); ++i) {
        const Atom& a = f.atom(c.atoms[i]);
        if (c.atoms[i + 1] != a.small_child && c.atoms[i + 1] != a.large_child) return false;
    }
    return true;
}

bool is_fat(const Filtration& f, const Chain& c, double rho) {
    return f.atom(c.bottom()).measure_d >= rho * f.atom(c.top()).measure_d;
}

std::vector<Chain> decompose_fat(const Filtration& f, const Chain& c, double rho) {
    if (!is_full_chain(f, c)) throw InvalidArgument("decompose_fat: not a full chain");
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("decompose_fat: rho must be in (0,1)");
    const int n = c.length();
    auto m = [&](int j) { return f.atom(c.atoms[j - 1]).measure_d; };  // 1-based as in the induction

    if (m(n) >= rho * m(1)) return {c};

    std::vector<Chain> pieces;
    int i_prev = n;
    double ref = m(n);
    while (true) {
        int i_next = 0;
        for (int j = i_prev; j >= 1; --j) {
            if (ref < rho * m(j)) {
                i_next = j;
                break;
            }
        }
        // i_next = max{ j : |X_{i_prev-ish reference}| < rho |X_j| }, 0 when none
        pieces.push_back(c.subchain(i_next, i_prev - 1));  // paper indices i_next+1 .. i_prev
        if (i_next == 0) break;
        i_prev = i_next;
        ref = m(i_prev);
    }
    return pieces;
}

namespace {

void collect_fat_downward(const Filtration& f, AtomId top, double rho, int min_len,
                          std::vector<AtomId>& path, std::vector<Chain>& out) {
    const Atom& bottom = f.atom(path.back());
    const double mtop = f.atom(top).measure_d;
    bool extendable = false;
    if (!bottom.is_leaf()) {
        for (AtomId child : {bottom.small_child, bottom.large_child}) {
            if (f.atom(child).measure_d >= rho * mtop) {
                extendable = true;
                path.push_back(child);
                collect_fat_downward(f, top, rho, min_len, path, out);
                path.pop_back();
            }
        }
    }
    if (!extendable && static_cast<int>(path.size()) >= min_len) out.push_back(Chain{path});
}

}  // namespace

std::vector<Chain> enumerate_fat_chains(const Filtration& f, double rho, int min_len) {
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("enumerate_fat_chains: rho must be in (0,1)");
    std::vector<Chain> out;
    for (AtomId top : f.all_atoms()) {
        const Atom& t = f.atom(top);
        std::vector<AtomId> path{top};
        std::vector<Chain> local;
        collect_fat_downward(f, top, rho, min_len, path, local);
        for (Chain& c : local) {
            if (t.parent != kNoAtom &&
                f.atom(c.bottom()).measure_d >= rho * f.atom(t.parent).measure_d)
                continue;  // extendable upward, not maximal
            out.push_back(std::move(c));
        }
    }
    std::sort(out.begin(), out.end(), [](const Chain& a, const Chain& b) {
        if (a.top() != b.top()) return a.top() < b.top();
        if (a.length() != b.length()) return a.length() < b.length();
        return a.bottom() < b.bottom();
    });
    return out;
}

Ring ring_of(const Filtration& f, const Chain& c) {
    if (c.length() < 2) throw InvalidArgument("ring_of: chain has no ring (inner = outer)");
    return make_ring(f, c.top(), c.bottom());
}

Ring make_ring(const Filtration& f, AtomId outer, AtomId inner) {
    if (outer == inner) throw InvalidArgument("degenerate ring: inner equals outer");
    if (!f.is_ancestor(outer, inner))
        throw InvalidArgument("ring: atoms are incomparable (inner must be nested in outer)");
    Ring r;
    r.outer = outer;
    r.inner = inner;
    r.degenerate = f.atom(inner).parent == outer;
    return r;
}

Rational ring_measure(const Filtration& f, const Ring& r) {
    return f.atom(r.outer).measure - f.atom(r.inner).measure;
}

std::vector<std::optional<Rect>> ring_rectangles(const Filtration& f, const Ring& r) {
    const Rect& I = f.atom(r.outer).rect;
    const Rect& J = f.atom(r.inner).rect;
    const int d = I.dim();
    std::vector<std::optional<Rect>> out(static_cast<std::size_t>(2 * d));
    for (int i = 0; i < d; ++i) {
        if (I.lo(i) < J.lo(i)) {
            std::vector<Rational> lo, hi;
            for (int s = 0; s < d; ++s) {
                lo.push_back(I.lo(s));
                hi.push_back(s == i ? J.lo(i) : I.hi(s));
            }
            out[static_cast<std::size_t>(i)] = Rect(std::move(lo), std::move(hi));
        }
        if (J.hi(i) < I.hi(i)) {
            std::vector<Rational> lo, hi;
            for (int s = 0; s < d; ++s) {
                lo.push_back(s == i ? J.hi(i) : I.lo(s));
                hi.push_back(I.hi(s));
            }
            out[static_cast<std::size_t>(d + i)] = Rect(std::move(lo), std::move(hi));
        }
    }
    return out;
}

RingSides ring_sides(const Filtration& f, const Ring& r, int axis) {
    const Rect& I = f.atom(r.outer).rect;
    const Rect& J = f.atom(r.inner).rect;
    const int d = I.dim();
    if (axis < 0 || axis >= d) throw InvalidArgument("ring_sides: axis out of range");
    RingSides rs;
    rs.axis = axis;
    if (I.lo(axis) < J.lo(axis)) {
        rs.minus_lo = I.lo(axis);
        rs.minus_hi = J.lo(axis);
        std::vector<Rational> lo, hi;
        for (int s = 0; s < d; ++s) {
            lo.push_back(s == axis ? I.lo(axis) : I.lo(s));
            hi.push_back(s == axis ? J.lo(axis) : I.hi(s));
        }
        rs.k_minus = Rect(std::move(lo), std::move(hi));
    }
    if (J.hi(axis) < I.hi(axis)) {
        rs.plus_lo = J.hi(axis);
        rs.plus_hi = I.hi(axis);
        std::vector<Rational> lo, hi;
        for (int s = 0; s < d; ++s) {
            lo.push_back(s == axis ? J.hi(axis) : I.lo(s));
            hi.push_back(s == axis ? I.hi(axis) : I.hi(s));
        }
        rs.k_plus = Rect(std::move(lo), std::move(hi));
    }
    return rs;
}

std::vector<Rect> ring_disjoint_boxes(const Filtration& f, const Ring& r) {
    const Rect& I = f.atom(r.outer).rect;
    const Rect& J = f.atom(r.inner).rect;
    const int d = I.dim();
    std::vector<Rect> out;
    // peel axis by axis: axes < s pinned to J's range, axis s a gap, axes > s full
    for (int s = 0; s < d; ++s) {
        for (int side = 0; side < 2; ++side) {
            Rational glo = side == 0 ? I.lo(s) : J.hi(s);
            Rational ghi = side == 0 ? J.lo(s) : I.hi(s);
            if (!(glo < ghi)) continue;
            std::vector<Rational> lo, hi;
            for (int t = 0; t < d; ++t) {
                if (t < s) {
                    lo.push_back(J.lo(t));
                    hi.push_back(J.hi(t));
                } else if (t == s) {
                    lo.push_back(glo);
                    hi.push_back(ghi);
                } else {
                    lo.push_back(I.lo(t));
                    hi.push_back(I.hi(t));
                }
            }
            out.emplace_back(std::move(lo), std::move(hi));
        }
    }
    return out;
}

nlohmann::json Filtration::to_json() const {
    nlohmann::json j;
    j["dim"] = dim_;
    j["mode"] = mode_ == Mode::Geometric ? "geometric" : "abstract";
    nlohmann::json splits = nlohmann::json::array();
    for (const SplitRecord& rec : splits_) {
        nlohmann::json s;
        s["atom"] = rec.atom;
        if (rec.by_fraction) {
            if (rec.textual || !fits_double(rec.fraction))
                s["fraction"] = rational_to_string(rec.fraction);
            else
                s["fraction"] = to_double(rec.fraction);
        } else {
            s["axis"] = rec.axis + 1;  // 1-based on disk
            if (rec.textual || !fits_double(rec.cut))
                s["cut"] = rational_to_string(rec.cut);
            else
                s["cut"] = to_double(rec.cut);
        }
        splits.push_back(std::move(s));
    }
    j["splits"] = std::move(splits);
    return j;
}

namespace {

Rational json_number(const nlohmann::json& v, bool& textual) {
    if (v.is_string()) {
        textual = true;
        return parse_rational(v.get<std::string>());
    }
    textual = false;
    return Rational(v.get<double>());
}

}  // namespace

Filtration Filtration::from_json(const nlohmann::json& j) {
    const std::string mode = j.at("mode").get<std::string>();
    Filtration f = mode == "abstract" ? Filtration::abstract_root()
                                      : Filtration::unit_cube(j.at("dim").get<int>());
    for (const auto& s : j.at("splits")) {
        AtomId id = s.at("atom").get<AtomId>();
        bool textual = false;
        if (s.contains("fraction")) {
            Rational t = json_number(s.at("fraction"), textual);
            f.apply_split_fraction(id, t, textual);
        } else {
            Rational cut = json_number(s.at("cut"), textual);
            f.apply_split(id, s.at("axis").get<int>() - 1, cut, textual);
        }
    }
    return f;
}

}  // namespace binfilt
