#include "binfilt/orthosystem.hpp"

#include "binfilt/quadrature.hpp"
#include "binfilt/util.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace binfilt {

namespace {

long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long acc = 1;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return acc;
}

/// Coordinates of a parent local monomial in the child's local-monomial basis
/// under u_parent = alpha + beta * u_child (per axis).
Eigen::MatrixXd mono_restriction_matrix(const SpaceSpec& S, const Rect& parent, const Rect& child) {
    const int m = S.dim_space();
    const int d = S.dim();
    std::vector<double> alpha(static_cast<std::size_t>(d)), beta(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s) {
        alpha[static_cast<std::size_t>(s)] = (child.lo_d(s) - parent.lo_d(s)) / parent.side_d(s);
        beta[static_cast<std::size_t>(s)] = child.side_d(s) / parent.side_d(s);
    }
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
    const auto& support = S.support();
    for (int col = 0; col < m; ++col) {
        const std::vector<int>& e = support[static_cast<std::size_t>(col)];
        for (int row = 0; row < m; ++row) {
            const std::vector<int>& j = support[static_cast<std::size_t>(row)];
            double coeff = 1.0;
            bool ok = true;
            for (int s = 0; s < d; ++s) {
                int es = e[static_cast<std::size_t>(s)], js = j[static_cast<std::size_t>(s)];
                if (js > es) {
                    ok = false;
                    break;
                }
                coeff *= static_cast<double>(binom(es, js)) *
                         std::pow(alpha[static_cast<std::size_t>(s)], es - js) *
                         std::pow(beta[static_cast<std::size_t>(s)], js);
            }
            if (ok) C(row, col) = coeff;
        }
    }
    return C;
}

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

void fix_sign(Eigen::VectorXd& v, const std::vector<Poly>& small_basis, const Rect& small_rect,
              int m) {
    Poly sp = combine_basis(small_basis, v.head(m));
    for (double c : sp.coeffs()) {
        if (std::abs(c) > 1e-11) {
            if (c < 0) v = -v;
            return;
        }
    }
    (void)small_rect;
}

}  // namespace

LocalFrame build_frame(const Filtration& f, const SpaceSpec& S, int split_k) {
    const SplitRecord& rec = f.split(split_k);
    const Atom& A = f.atom(rec.atom);
    const Atom& As = f.atom(rec.small_id);
    const Atom& Al = f.atom(rec.large_id);
    const int m = S.dim_space();

    std::vector<Poly> Bs = space_basis(S, As.rect);
    std::vector<Poly> Bl = space_basis(S, Al.rect);

    Eigen::MatrixXd Gs = gram_matrix(Bs, As.rect);
    Eigen::MatrixXd Gl = gram_matrix(Bl, Al.rect);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    G.topLeftCorner(m, m) = Gs;
    G.bottomRightCorner(m, m) = Gl;

    Eigen::MatrixXd E(2 * m, m);
    E.topRows(m) = mono_restriction_matrix(S, A.rect, As.rect);
    E.bottomRows(m) = mono_restriction_matrix(S, A.rect, Al.rect);

    auto dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return a.dot(G * b);
    };

    // orthonormal basis of S(A) inside V = S(A') + S(A'')
    std::vector<Eigen::VectorXd> w_basis;
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd v = E.col(i);
        for (int pass = 0; pass < 2; ++pass)
            for (const Eigen::VectorXd& w : w_basis) v -= dot(w, v) * w;
        double n2 = dot(v, v);
        if (n2 <= 0) throw NumericalError("build_frame: numerically dependent parent basis");
        w_basis.push_back(v / std::sqrt(n2));
    }

    // complement: Gram-Schmidt of the small-side coordinate functions against
    // S(A), with one re-orthogonalization pass
    std::vector<Eigen::VectorXd> frame_vecs;
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * m);
        v(i) = 1.0;
        double n0 = std::sqrt(dot(v, v));
        if (n0 <= 0) throw NumericalError("build_frame: degenerate child space");
        v /= n0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Eigen::VectorXd& w : w_basis) v -= dot(w, v) * w;
            for (const Eigen::VectorXd& w : frame_vecs) v -= dot(w, v) * w;
        }
        double n2 = dot(v, v);
        if (n2 <= 1e-24)
            throw NumericalError("build_frame: numerically dependent inputs at split " +
                                 std::to_string(split_k));
        v /= std::sqrt(n2);
        fix_sign(v, Bs, As.rect, m);
        frame_vecs.push_back(v);
    }

    LocalFrame frame;
    frame.split_index = split_k;
    frame.atom = rec.atom;
    for (const Eigen::VectorXd& v : frame_vecs)
        frame.functions.emplace_back(combine_basis(Bs, v.head(m)), combine_basis(Bl, v.tail(m)));
    return frame;
}

std::pair<double, double> haar_explicit_values(double measure_small, double measure_large) {
    const double total = measure_small + measure_large;
    return {std::sqrt(measure_large / (measure_small * total)),
            -std::sqrt(measure_small / (measure_large * total))};
}

std::pair<Poly, Poly> haar_explicit(const Filtration& f, AtomId A) {
    const Atom& a = f.atom(A);
    if (a.is_leaf()) throw InvalidArgument("haar_explicit: atom is not split");
    const Atom& as = f.atom(a.small_child);
    const Atom& al = f.atom(a.large_child);
    auto [vs, vl] = haar_explicit_values(as.measure_d, al.measure_d);
    std::vector<int> deg(static_cast<std::size_t>(f.dim()), 0);
    return {Poly(as.rect, deg, {vs}), Poly(al.rect, deg, {vl})};
}

SystemPhi build_system(const Filtration& f, const SpaceSpec& S, double p) {
    SystemPhi sys;
    sys.filt = &f;
    sys.space = S;
    sys.p = p;

    // level 0: orthonormalize S(Omega) in L^2
    const Rect& omega = f.atom(f.root()).rect;
    std::vector<Poly> basis = space_basis(S, omega);
    Eigen::MatrixXd G = gram_matrix(basis, omega);
    std::vector<Eigen::VectorXd> ortho;
    for (int i = 0; i < S.dim_space(); ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(S.dim_space());
        v(i) = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const Eigen::VectorXd& w : ortho) v -= w.dot(G * v) * w;
        double n2 = v.dot(G * v);
        if (n2 <= 0) throw NumericalError("build_system: degenerate space on Omega");
        v /= std::sqrt(n2);
        ortho.push_back(v);
    }
    for (const Eigen::VectorXd& v : ortho) {
        Poly q = combine_basis(basis, v);
        for (double c : q.coeffs())
            if (std::abs(c) > 1e-11) {
                if (c < 0) q *= -1.0;
                break;
            }
        sys.level0_p_norms.push_back(lp_norm_box(q, omega, p));
        sys.level0.push_back(std::move(q));
    }

    for (int k = 1; k <= f.split_count(); ++k) {
        LocalFrame frame = build_frame(f, S, k);
        std::vector<double> norms;
        const SplitRecord& rec = f.split(k);
        for (const auto& [ps, pl] : frame.functions) {
            double ns = std::pow(lp_norm_box(ps, f.atom(rec.small_id).rect, p), p);
            double nl = std::pow(lp_norm_box(pl, f.atom(rec.large_id).rect, p), p);
            norms.push_back(std::pow(ns + nl, 1.0 / p));
        }
        sys.frame_p_norms.push_back(std::move(norms));
        sys.frames.push_back(std::move(frame));
    }
    return sys;
}

int SystemPhi::function_count() const {
    int n = static_cast<int>(level0.size());
    for (const LocalFrame& fr : frames) n += static_cast<int>(fr.functions.size());
    return n;
}

double Coefficients::psi_dual(int split, int idx) const {
    if (split == 0)
        return system->level0_p_norms[static_cast<std::size_t>(idx)] *
               level0_phi[static_cast<std::size_t>(idx)];
    return system->frame_p_norms[static_cast<std::size_t>(split - 1)][static_cast<std::size_t>(idx)] *
           split_phi[static_cast<std::size_t>(split - 1)][static_cast<std::size_t>(idx)];
}

double Coefficients::sum_sq() const {
    double acc = 0.0;
    for (double c : level0_phi) acc += c * c;
    for (const auto& v : split_phi)
        for (double c : v) acc += c * c;
    return acc;
}

Coefficients analyze(const LeafFunction& g, const SystemPhi& system) {
    const Filtration& f = *system.filt;
    Coefficients out;
    out.system = &system;
    for (const Poly& q : system.level0) out.level0_phi.push_back(g.inner_on_atom(q, f.root()));
    for (const LocalFrame& frame : system.frames) {
        const SplitRecord& rec = f.split(frame.split_index);
        std::vector<double> coefs;
        for (const auto& [ps, pl] : frame.functions)
            coefs.push_back(g.inner_on_atom(ps, rec.small_id) + g.inner_on_atom(pl, rec.large_id));
        out.split_phi.push_back(std::move(coefs));
    }
    return out;
}

std::vector<CoefEntry> flatten(const Coefficients& coefs) {
    std::vector<CoefEntry> out;
    const SystemPhi& sys = *coefs.system;
    const Filtration& f = *sys.filt;
    for (std::size_t i = 0; i < coefs.level0_phi.size(); ++i) {
        CoefEntry e;
        e.split = 0;
        e.index = static_cast<int>(i);
        e.atom = f.root();
        e.phi_coef = coefs.level0_phi[i];
        e.psi_dual_coef = coefs.psi_dual(0, static_cast<int>(i));
        out.push_back(e);
    }
    for (std::size_t k = 0; k < coefs.split_phi.size(); ++k)
        for (std::size_t i = 0; i < coefs.split_phi[k].size(); ++i) {
            CoefEntry e;
            e.split = static_cast<int>(k + 1);
            e.index = static_cast<int>(i);
            e.atom = sys.frames[k].atom;
            e.phi_coef = coefs.split_phi[k][i];
            e.psi_dual_coef = coefs.psi_dual(static_cast<int>(k + 1), static_cast<int>(i));
            out.push_back(e);
        }
    return out;
}

std::vector<AtomId> atoms_at_step(const Filtration& f, int n) {
    std::vector<AtomId> out;
    if (n < 0) return out;
    for (const Atom& a : f.atoms()) {
        bool exists = a.id == 0 || (a.id + 1) / 2 <= n;  // created by split <= n
        bool leaf_at_n = a.split_index == 0 || a.split_index > n;
        if (exists && leaf_at_n) out.push_back(a.id);
    }
    return out;
}

LeafFunction project_P(const LeafFunction& g, int n, const Filtration& f, const SpaceSpec& S) {
    LeafFunction out(f);
    if (n < 0) return out;
    for (AtomId id : atoms_at_step(f, n)) {
        const Rect& rect = f.atom(id).rect;
        std::vector<Poly> basis = space_basis(S, rect);
        Eigen::MatrixXd G = gram_matrix(basis, rect);
        Eigen::VectorXd rhs(S.dim_space());
        for (int i = 0; i < S.dim_space(); ++i)
            rhs(i) = g.inner_on_atom(basis[static_cast<std::size_t>(i)], id);
        Eigen::LDLT<Eigen::MatrixXd> solver(G);
        if (solver.info() != Eigen::Success)
            throw NumericalError("project_P: singular Gram matrix on atom " + std::to_string(id));
        Eigen::VectorXd c = solver.solve(rhs);
        Poly q = basis[0];
        q *= c(0);
        for (int i = 1; i < S.dim_space(); ++i) {
            Poly t = basis[static_cast<std::size_t>(i)];
            t *= c(i);
            q += t;
        }
        out.add_on_atom(id, q);
    }
    return out;
}

LeafFunction apply_Q(const LeafFunction& g, const SystemPhi& system, int split_k) {
    const Filtration& f = *system.filt;
    LeafFunction out(f);
    if (split_k == 0) {
        for (const Poly& q : system.level0) {
            double c = g.inner_on_atom(q, f.root());
            Poly t = q;
            t *= c;
            out.add_on_atom(f.root(), t);
        }
        return out;
    }
    const LocalFrame& frame = system.frames[static_cast<std::size_t>(split_k - 1)];
    const SplitRecord& rec = f.split(split_k);
    for (const auto& [ps, pl] : frame.functions) {
        double c = g.inner_on_atom(ps, rec.small_id) + g.inner_on_atom(pl, rec.large_id);
        Poly ts = ps;
        ts *= c;
        Poly tl = pl;
        tl *= c;
        out.add_on_atom(rec.small_id, ts);
        out.add_on_atom(rec.large_id, tl);
    }
    return out;
}

QNormResult q_norm(const LeafFunction& g, const SystemPhi& system, int split_k, double p) {
    QNormResult res;
    LeafFunction Q = apply_Q(g, system, split_k);
    res.value = Q.lp(p);
    double l2 = Q.lp(2.0);
    if (l2 > 0) {
        const Filtration& f = *system.filt;
        double t_measure = split_k == 0 ? f.atom(f.root()).measure_d
                                        : f.atom(f.split(split_k).small_id).measure_d;
        res.equivalence_ratio = res.value / (std::pow(t_measure, 1.0 / p - 0.5) * l2);
    }
    return res;
}

}  // namespace binfilt
