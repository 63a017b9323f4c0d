#include "binfilt/conditions.hpp"

#include "binfilt/util.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace binfilt {

using BF = boost::multiprecision::cpp_bin_float_50;

namespace {

BF bf_of(const Rational& r) { return BF(boost::multiprecision::numerator(r)) / BF(boost::multiprecision::denominator(r)); }

double bf_to_double(const BF& x) { return x.template convert_to<double>(); }

double bf_log2(const BF& x) {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    return bf_to_double(boost::multiprecision::log(x) / boost::multiprecision::log(BF(2)));
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

/// Multi-start coordinate ascent over the unit sphere (64 starts).
double sphere_maximize(const std::function<double(const Eigen::VectorXd&)>& fn, int dim,
                       std::uint64_t seed, Eigen::VectorXd* arg, int starts = 64,
                       double tol = 1e-7) {
    std::mt19937_64 rng = seeded_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Eigen::VectorXd> inits;
    for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
        e(i) = 1.0;
        inits.push_back(e);
    }
    while (static_cast<int>(inits.size()) < starts) {
        Eigen::VectorXd c(dim);
        for (int i = 0; i < dim; ++i) c(i) = gauss(rng);
        c.normalize();
        inits.push_back(c);
    }
    double best = -1.0;
    Eigen::VectorXd best_c = inits[0];
    for (Eigen::VectorXd c : inits) {
        double val = fn(c);
        double step = 0.5;
        while (step > tol) {
            bool improved = false;
            for (int i = 0; i < dim; ++i)
                for (double sgn : {1.0, -1.0}) {
                    Eigen::VectorXd t = c;
                    t(i) += sgn * step;
                    t.normalize();
                    double v = fn(t);
                    if (v > val * (1.0 + 1e-12)) {
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

void ConditionParams::validate() const {
    if (!(p > 1.0) || std::isinf(p)) throw InvalidArgument("condition: requires 1 < p < infinity");
    if (!(tau > 0.0 && tau < p)) throw InvalidArgument("condition: requires 0 < tau < p");
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("condition: requires rho in (0,1)");
}

double rho_rescaled_bound(double M, double rho0, double rho) {
    if (rho >= rho0) return M;
    return (M + 1.0) * (1.0 + std::log(rho) / std::log(rho0));
}

ConditionReport w1_report(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm,
                          double c2) {
    prm.validate();
    ConditionReport rep;
    rep.condition = "w1";
    rep.strategy = "u-sum";
    rep.p = prm.p;
    rep.tau = prm.tau;
    rep.rho = prm.rho;

    std::vector<Chain> chains = enumerate_fat_chains(f, prm.rho, 2);
    if (chains.empty()) {
        rep.empty = true;
        return rep;
    }
    std::map<AtomId, double> u_cache;
    auto u_val = [&](AtomId id) {
        auto it = u_cache.find(id);
        if (it != u_cache.end()) return it->second;
        double v = u_of(f, S, id, prm.p, c2);
        u_cache.emplace(id, v);
        return v;
    };
    for (const Chain& c : chains) {
        double acc = 0.0;
        for (int i = 1; i < c.length(); ++i)
            acc += std::pow(u_val(c.atoms[static_cast<std::size_t>(i)]), prm.tau);
        ++rep.chains_evaluated;
        if (acc > rep.max_ratio) {
            rep.max_ratio = acc;
            rep.witness_chain = c;
        }
    }
    return rep;
}

double w2s_closed_form_ratio(const Filtration& f, const SpaceSpec& S, const Chain& c, double p,
                             double tau) {
    if (S.dim_space() != 1) throw InvalidArgument("closed form requires dim S = 1");
    const double sigma = tau / p;
    double num = 0.0, den = 0.0;
    for (int i = 1; i < c.length(); ++i) {
        AtomId x = c.atoms[static_cast<std::size_t>(i)];
        AtomId b = f.buddy(x);
        double lambda;
        if (S.is_constant()) {
            lambda = f.atom(b).measure_d;
        } else {
            const Poly q = space_basis(S, f.atom(c.top()).rect)[0];
            lambda = std::pow(lp_norm_box(q, f.atom(b).rect, p), p);
        }
        num += std::pow(lambda, sigma);
        den += lambda;
    }
    if (den <= 0.0) return 0.0;
    return std::pow(num, 1.0 / tau) / std::pow(den, 1.0 / p);
}

namespace {

/// Per-chain data for the explicit polynomial criteria. Window sums are
/// accumulated incrementally from per-step values (additions of positive
/// terms only, so no cancellation even on very long chains).
struct ChainGeometry {
    int d = 0;
    int len = 0;
    std::vector<int> axis;          // split axis ahead of element j (j >= 1)
    std::vector<int> side;          // 0 left gap, 1 right gap
    std::vector<BF> step_gap;       // |b(X_j)^axis|
    std::vector<BF> step_gap_pow;   // |b(X_j)^axis|^{tau/p}
    std::vector<std::vector<double>> elem_side_log2;  // [j][s]: log2 side of X_j on axis s
};

/// Running window sums per (axis, side).
struct WindowSums {
    std::vector<std::array<BF, 2>> gap;
    std::vector<std::array<BF, 2>> gap_pow;

    explicit WindowSums(int d) : gap(static_cast<std::size_t>(d)), gap_pow(static_cast<std::size_t>(d)) { reset(); }
    void reset() {
        for (auto& a : gap) a = {BF(0), BF(0)};
        for (auto& a : gap_pow) a = {BF(0), BF(0)};
    }
    void add_step(const ChainGeometry& g, int j) {  // j >= 1: the step into element j
        int ax = g.axis[static_cast<std::size_t>(j - 1)];
        int sd = g.side[static_cast<std::size_t>(j - 1)];
        gap[static_cast<std::size_t>(ax)][static_cast<std::size_t>(sd)] += g.step_gap[static_cast<std::size_t>(j - 1)];
        gap_pow[static_cast<std::size_t>(ax)][static_cast<std::size_t>(sd)] += g.step_gap_pow[static_cast<std::size_t>(j - 1)];
    }
};

ChainGeometry chain_geometry(const Filtration& f, const Chain& c, double sigma) {
    ChainGeometry g;
    g.d = f.dim();
    g.len = c.length();
    g.elem_side_log2.resize(static_cast<std::size_t>(g.len));
    for (int j = 0; j < g.len; ++j) {
        const Rect& r = f.atom(c.atoms[static_cast<std::size_t>(j)]).rect;
        for (int s = 0; s < g.d; ++s)
            g.elem_side_log2[static_cast<std::size_t>(j)].push_back(log2_rational(r.side(s)));
    }
    const BF sig(sigma);
    for (int j = 1; j < g.len; ++j) {
        AtomId xj = c.atoms[static_cast<std::size_t>(j)];
        AtomId parent = f.atom(xj).parent;
        const SplitRecord& rec = f.split(f.atom(parent).split_index);
        const Rect& inner = f.atom(xj).rect;
        const Rect& buddy = f.atom(f.buddy(xj)).rect;
        int ax = rec.by_fraction ? 0 : rec.axis;
        int sd = buddy.hi(ax) <= inner.lo(ax) ? 0 : 1;
        if (sd == 1 && !(buddy.lo(ax) >= inner.hi(ax)))
            throw NumericalError("special criterion: buddy not contained in a unique side slab");
        BF extent = bf_of(buddy.side(ax));
        g.axis.push_back(ax);
        g.side.push_back(sd);
        g.step_gap.push_back(extent);
        g.step_gap_pow.push_back(boost::multiprecision::pow(extent, sig));
    }
    return g;
}

/// Fast log2 of a positive extended-precision value.
double bf_log2_fast(const BF& x) {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    int e = 0;
    BF mant = boost::multiprecision::frexp(x, &e);
    return static_cast<double>(e) + std::log2(mant.template convert_to<double>());
}

double log2_add(double a, double b) {  // log2(2^a + 2^b)
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log2(1.0 + std::exp2(lo - hi));
}

/// log2 of gamma_ell in the multivariate criterion: min over 0 <= j <= r_ell.
double gamma_ell_log2(double rm_log2, double rp_log2, double il_log2, int r_ell, double p,
                      double tau) {
    const double inv_p = 1.0 / p;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= r_ell; ++j) {
        double t1 = rm_log2 == -std::numeric_limits<double>::infinity()
                        ? -std::numeric_limits<double>::infinity()
                        : (j + inv_p) * rm_log2 - j * il_log2;
        double t2 = rp_log2 == -std::numeric_limits<double>::infinity()
                        ? -std::numeric_limits<double>::infinity()
                        : (r_ell - j + inv_p) * rp_log2 + (j - r_ell) * il_log2;
        double val = -inv_p * il_log2 + log2_add(t1, t2);
        best = std::min(best, val);
    }
    if (best == std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
    return tau * best;
}

/// Criterion ratios of the window whose sums are accumulated in `w`, topped
/// at chain element j0. Powers and quotients are evaluated in log2 doubles.
void eval_window(const ChainGeometry& g, const WindowSums& w, int j0, double p, double tau,
                 const std::vector<int>& rvec, std::vector<SideRatio>* sides, double* best,
                 int* best_axis, int* best_side) {
    const double sigma = tau / p;
    const double ninf = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < g.d; ++s) {
        const int rs = rvec[static_cast<std::size_t>(s)];
        const double i_log2 = g.elem_side_log2[static_cast<std::size_t>(j0)][static_cast<std::size_t>(s)];
        for (int t = 0; t < 2; ++t) {
            SideRatio sr;
            sr.axis = s;
            sr.side = t;
            const BF& T_len = w.gap[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
            if (!(T_len > 0)) {
                sr.empty_side = true;
                sr.ratio = 0.0;
                if (sides) sides->push_back(sr);
                continue;
            }
            const double T_log2 = bf_log2_fast(T_len);
            const double lhs_log2 = bf_log2_fast(w.gap_pow[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)]);
            const BF& O_len = w.gap[static_cast<std::size_t>(s)][static_cast<std::size_t>(1 - t)];
            double rhs_log2 = sigma * T_log2;
            if (O_len > 0)
                rhs_log2 = log2_add(rhs_log2, (tau * rs + sigma) * bf_log2_fast(O_len) - tau * rs * i_log2);
            for (int l = 0; l < g.d; ++l) {
                if (l == s) continue;
                const BF& rm = w.gap[static_cast<std::size_t>(l)][0];
                const BF& rp = w.gap[static_cast<std::size_t>(l)][1];
                if (!(rm > 0) && !(rp > 0)) continue;  // gamma_l vanishes
                double rm_log2 = rm > 0 ? bf_log2_fast(rm) : ninf;
                double rp_log2 = rp > 0 ? bf_log2_fast(rp) : ninf;
                double il = g.elem_side_log2[static_cast<std::size_t>(j0)][static_cast<std::size_t>(l)];
                rhs_log2 = log2_add(rhs_log2, sigma * i_log2 +
                                                  gamma_ell_log2(rm_log2, rp_log2, il, rvec[static_cast<std::size_t>(l)], p, tau));
            }
            double ratio = std::exp2(lhs_log2 - rhs_log2);
            sr.lhs_log2 = lhs_log2;
            sr.rhs_log2 = rhs_log2;
            sr.ratio = ratio;
            if (sides) sides->push_back(sr);
            if (best && ratio > *best) {
                *best = ratio;
                if (best_axis) *best_axis = s;
                if (best_side) *best_side = t;
            }
        }
    }
}

}  // namespace

SpecialReport special_multi(const Filtration& f, const Chain& c, double p, double tau,
                            const std::vector<int>& rvec) {
    if (static_cast<int>(rvec.size()) != f.dim())
        throw InvalidArgument("special_multi: degree tuple does not match dimension");
    if (c.length() < 2) throw InvalidArgument("special criterion: chain too short");
    if (!is_full_chain(f, c)) throw InvalidArgument("special criterion: not a full chain");
    const double sigma = tau / p;
    ChainGeometry g = chain_geometry(f, c, sigma);
    WindowSums w(g.d);
    for (int j = 1; j < g.len; ++j) w.add_step(g, j);
    SpecialReport rep;
    double best = 0.0;
    eval_window(g, w, 0, p, tau, rvec, &rep.sides, &best, nullptr, nullptr);
    rep.max_ratio = best;
    return rep;
}

SpecialReport special_1d(const Filtration& f, const Chain& c, double p, double tau, int r) {
    if (f.dim() != 1) throw InvalidArgument("special_1d: requires d = 1");
    return special_multi(f, c, p, tau, {r});
}

SubchainScan scan_special_subchains(const Filtration& f, const Chain& c, double p, double tau,
                                    const std::vector<int>& rvec) {
    if (c.length() < 2) throw InvalidArgument("scan: chain too short");
    const double sigma = tau / p;
    ChainGeometry g = chain_geometry(f, c, sigma);
    SubchainScan out;
    WindowSums w(g.d);
    for (int j0 = 0; j0 + 1 < g.len; ++j0) {
        w.reset();
        for (int j1 = j0 + 1; j1 < g.len; ++j1) {
            w.add_step(g, j1);
            double best = out.max_ratio;
            int ax = 0, sd = 0;
            eval_window(g, w, j0, p, tau, rvec, nullptr, &best, &ax, &sd);
            ++out.subchains;
            if (best > out.max_ratio) {
                out.max_ratio = best;
                out.j0 = j0;
                out.j1 = j1;
                out.axis = ax;
                out.side = sd;
            }
        }
    }
    return out;
}

namespace {

/// Evaluates max over contiguous subchains of a per-window ratio function.
template <typename Fn>
void for_each_window(const Chain& c, int cap, Fn&& fn) {
    const int n = c.length();
    long count = 0;
    for (int j0 = 0; j0 + 1 < n; ++j0)
        for (int j1 = j0 + 1; j1 < n; ++j1) {
            if (cap > 0 && count >= cap) return;
            ++count;
            fn(j0, j1);
        }
}

ConditionReport w2s_direct(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm) {
    ConditionReport rep;
    rep.condition = "w2s";
    rep.strategy = "direct";
    rep.p = prm.p;
    rep.tau = prm.tau;
    rep.rho = prm.rho;
    std::vector<Chain> chains = enumerate_fat_chains(f, prm.rho, 2);
    if (chains.empty()) {
        rep.empty = true;
        return rep;
    }
    const int m = S.dim_space();
    for (const Chain& c : chains) {
        long remaining = prm.max_subchains - rep.chains_evaluated;
        if (remaining <= 0) break;
        // buddy rects once per chain
        std::vector<Rect> buddies;
        for (int i = 1; i < c.length(); ++i)
            buddies.push_back(f.atom(f.buddy(c.atoms[static_cast<std::size_t>(i)])).rect);
        std::vector<Poly> basis = space_basis(S, f.atom(c.top()).rect);
        for_each_window(c, static_cast<int>(remaining), [&](int j0, int j1) {
            auto ratio = [&](const Eigen::VectorXd& coef) {
                Poly u = combine_basis(basis, coef);
                double num = 0.0, den = 0.0;
                for (int i = j0 + 1; i <= j1; ++i) {
                    double v = lp_norm_box(u, buddies[static_cast<std::size_t>(i - 1)], prm.p);
                    num += std::pow(v, prm.tau);
                    den += std::pow(v, prm.p);
                }
                if (den <= 0) return 0.0;
                return std::pow(num, 1.0 / prm.tau) / std::pow(den, 1.0 / prm.p);
            };
            Eigen::VectorXd arg;
            double v = sphere_maximize(ratio, m, prm.seed, &arg, m <= 1 ? 1 : 64);
            ++rep.chains_evaluated;
            if (v > rep.max_ratio) {
                rep.max_ratio = v;
                rep.witness_chain = c.subchain(j0, j1);
                rep.witness_coeffs.assign(arg.data(), arg.data() + arg.size());
            }
        });
    }
    return rep;
}

ConditionReport w2s_closed(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm) {
    ConditionReport rep;
    rep.condition = "w2s";
    rep.strategy = "closed-form";
    rep.p = prm.p;
    rep.tau = prm.tau;
    rep.rho = prm.rho;
    std::vector<Chain> chains = enumerate_fat_chains(f, prm.rho, 2);
    if (chains.empty()) {
        rep.empty = true;
        return rep;
    }
    const double sigma = prm.tau / prm.p;
    for (const Chain& c : chains) {
        // lambda values once, then O(1) per window via prefix sums
        const int n = c.length();
        std::vector<double> lam(static_cast<std::size_t>(n), 0.0);
        for (int i = 1; i < n; ++i) {
            AtomId b = f.buddy(c.atoms[static_cast<std::size_t>(i)]);
            if (S.is_constant()) {
                lam[static_cast<std::size_t>(i)] = f.atom(b).measure_d;
            } else {
                Poly q = space_basis(S, f.atom(c.top()).rect)[0];
                lam[static_cast<std::size_t>(i)] = std::pow(lp_norm_box(q, f.atom(b).rect, prm.p), prm.p);
            }
        }
        std::vector<double> ps(static_cast<std::size_t>(n) + 1, 0.0), pp(static_cast<std::size_t>(n) + 1, 0.0);
        for (int i = 1; i < n; ++i) {
            ps[static_cast<std::size_t>(i) + 1] = ps[static_cast<std::size_t>(i)] + std::pow(lam[static_cast<std::size_t>(i)], sigma);
            pp[static_cast<std::size_t>(i) + 1] = pp[static_cast<std::size_t>(i)] + lam[static_cast<std::size_t>(i)];
        }
        for_each_window(c, 0, [&](int j0, int j1) {
            double num = ps[static_cast<std::size_t>(j1) + 1] - ps[static_cast<std::size_t>(j0) + 1];
            double den = pp[static_cast<std::size_t>(j1) + 1] - pp[static_cast<std::size_t>(j0) + 1];
            ++rep.chains_evaluated;
            if (den <= 0) return;
            double v = std::pow(num, 1.0 / prm.tau) / std::pow(den, 1.0 / prm.p);
            if (v > rep.max_ratio) {
                rep.max_ratio = v;
                rep.witness_chain = c.subchain(j0, j1);
            }
        });
    }
    return rep;
}

ConditionReport w2s_bernstein(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm,
                              const char* strategy_name) {
    ConditionReport rep;
    rep.condition = "w2s";
    rep.strategy = strategy_name;
    rep.p = prm.p;
    rep.tau = prm.tau;
    rep.rho = prm.rho;
    std::vector<Chain> chains = enumerate_fat_chains(f, prm.rho, 2);
    if (chains.empty()) {
        rep.empty = true;
        return rep;
    }
    std::vector<std::vector<int>> gens = S.span_generators();
    for (const Chain& c : chains) {
        for (const auto& rvec : gens) {
            SubchainScan scan = scan_special_subchains(f, c, prm.p, prm.tau, rvec);
            rep.chains_evaluated += scan.subchains;
            if (scan.max_ratio > rep.max_ratio) {
                rep.max_ratio = scan.max_ratio;
                rep.witness_chain = c.subchain(scan.j0, scan.j1);
            }
        }
    }
    return rep;
}

}  // namespace

ConditionReport w2s_report(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm,
                           W2sStrategy strategy) {
    prm.validate();
    if (strategy == W2sStrategy::Auto) {
        if (S.dim_space() == 1) strategy = W2sStrategy::ClosedForm;
        else if (S.kind() == SpaceSpec::Kind::Tensor) strategy = W2sStrategy::BernsteinReduction;
        else if (S.kind() == SpaceSpec::Kind::TotalDegree || S.kind() == SpaceSpec::Kind::SpanSet)
            strategy = W2sStrategy::SpanReduction;
        else strategy = W2sStrategy::Direct;
    }
    switch (strategy) {
        case W2sStrategy::ClosedForm: {
            if (S.dim_space() != 1)
                throw InvalidArgument("w2s closed form requires dim S = 1");
            return w2s_closed(f, S, prm);
        }
        case W2sStrategy::BernsteinReduction: return w2s_bernstein(f, S, prm, "bernstein-reduction");
        case W2sStrategy::SpanReduction: return w2s_bernstein(f, S, prm, "span-reduction");
        case W2sStrategy::Direct: return w2s_direct(f, S, prm);
        case W2sStrategy::Auto: break;
    }
    throw InvalidArgument("w2s_report: unresolved strategy");
}

ConditionReport w2_report(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm) {
    prm.validate();
    ConditionReport rep;
    rep.condition = "w2";
    rep.strategy = "direct-Q";
    rep.p = prm.p;
    rep.tau = prm.tau;
    rep.rho = prm.rho;
    std::vector<Chain> chains = enumerate_fat_chains(f, prm.rho, 2);
    if (chains.empty()) {
        rep.empty = true;
        return rep;
    }
    SystemPhi system = build_system(f, S, prm.p);
    const int m = S.dim_space();
    for (const Chain& c : chains) {
        long remaining = prm.max_subchains - rep.chains_evaluated;
        if (remaining <= 0) break;
        std::vector<Poly> basis = space_basis(S, f.atom(c.top()).rect);
        for_each_window(c, static_cast<int>(remaining), [&](int j0, int j1) {
            Ring ring = make_ring(f, c.atoms[static_cast<std::size_t>(j0)], c.atoms[static_cast<std::size_t>(j1)]);
            auto ratio = [&](const Eigen::VectorXd& coef) {
                Poly u = combine_basis(basis, coef);
                LeafFunction g(f);
                g.add_on_ring(ring, u);
                double den = g.lp(prm.p);
                if (den <= 0) return 0.0;
                double num = 0.0;
                for (int i = j0 + 1; i <= j1; ++i) {
                    AtomId parent = c.atoms[static_cast<std::size_t>(i - 1)];
                    int k = f.atom(parent).split_index;
                    num += std::pow(q_norm(g, system, k, prm.p).value, prm.tau);
                }
                return std::pow(num, 1.0 / prm.tau) / den;
            };
            double v;
            Eigen::VectorXd arg;
            if (m == 1) {
                Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
                v = ratio(one);
                arg = one;
            } else {
                v = sphere_maximize(ratio, m, prm.seed, &arg, 16);
            }
            ++rep.chains_evaluated;
            if (v > rep.max_ratio) {
                rep.max_ratio = v;
                rep.witness_chain = c.subchain(j0, j1);
                rep.witness_coeffs.assign(arg.data(), arg.data() + arg.size());
            }
        });
    }
    return rep;
}

}  // namespace binfilt
