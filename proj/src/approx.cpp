#include "binfilt/approx.hpp"

#include "binfilt/util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace binfilt {

namespace {

std::vector<CoefEntry> sorted_entries(const LeafFunction& f, const SystemPhi& system) {
    Coefficients coefs = analyze(f, system);
    std::vector<CoefEntry> entries = flatten(coefs);
    std::stable_sort(entries.begin(), entries.end(), [](const CoefEntry& a, const CoefEntry& b) {
        double va = std::abs(a.psi_dual_coef), vb = std::abs(b.psi_dual_coef);
        if (va != vb) return va > vb;
        if (a.split != b.split) return a.split < b.split;
        return a.index < b.index;
    });
    return entries;
}

/// Adds the phi-expansion term of one entry: <f, phi> * phi.
void add_term(LeafFunction& g, const SystemPhi& system, const CoefEntry& e) {
    const Filtration& f = *system.filt;
    if (e.split == 0) {
        Poly t = system.level0[static_cast<std::size_t>(e.index)];
        t *= e.phi_coef;
        g.add_on_atom(f.root(), t);
        return;
    }
    const LocalFrame& frame = system.frames[static_cast<std::size_t>(e.split - 1)];
    const SplitRecord& rec = f.split(e.split);
    const auto& [ps, pl] = frame.functions[static_cast<std::size_t>(e.index)];
    Poly ts = ps;
    ts *= e.phi_coef;
    Poly tl = pl;
    tl *= e.phi_coef;
    g.add_on_atom(rec.small_id, ts);
    g.add_on_atom(rec.large_id, tl);
}

}  // namespace

GreedyResult greedy_approx(const LeafFunction& f, const SystemPhi& system, int n) {
    std::vector<CoefEntry> entries = sorted_entries(f, system);
    if (n > static_cast<int>(entries.size())) n = static_cast<int>(entries.size());
    GreedyResult out{{}, LeafFunction(*system.filt), 0.0};
    for (int i = 0; i < n; ++i) {
        out.selected.push_back(entries[static_cast<std::size_t>(i)]);
        add_term(out.approximant, system, entries[static_cast<std::size_t>(i)]);
    }
    out.error = (f - out.approximant).lp(system.p);
    return out;
}

ApproxCurve en_curve_psi(const LeafFunction& f, const SystemPhi& system, int N) {
    std::vector<CoefEntry> entries = sorted_entries(f, system);
    ApproxCurve curve;
    curve.dictionary = "psi";
    curve.method = "greedy";
    LeafFunction approx(*system.filt);
    curve.errors.push_back(f.lp(system.p));
    const int limit = std::min<int>(N, static_cast<int>(entries.size()));
    for (int n = 1; n <= N; ++n) {
        if (n <= limit) add_term(approx, system, entries[static_cast<std::size_t>(n - 1)]);
        curve.errors.push_back((f - approx).lp(system.p));
    }
    return curve;
}

ApproxCurve en_curve_dictionary(const LeafFunction& f, const Filtration& filt, const SpaceSpec& S,
                                double p, int N) {
    ApproxCurve curve;
    curve.dictionary = "C";
    curve.method = "dp-upper-bound";

    const int atoms = filt.atom_count();
    // per-atom data: zero-error (no piece) and best single-piece error, p-th powers
    std::vector<double> zero_err(static_cast<std::size_t>(atoms));
    std::vector<double> fit_err(static_cast<std::size_t>(atoms));
    for (AtomId id = 0; id < atoms; ++id) {
        zero_err[static_cast<std::size_t>(id)] = std::pow(f.lp_under(id, p), p);
        // best fit from S in L^2(A), evaluated in L^p (exact bound at p = 2)
        const Rect& rect = filt.atom(id).rect;
        std::vector<Poly> basis = space_basis(S, rect);
        Eigen::MatrixXd G = gram_matrix(basis, rect);
        Eigen::VectorXd rhs(S.dim_space());
        for (int i = 0; i < S.dim_space(); ++i)
            rhs(i) = f.inner_on_atom(basis[static_cast<std::size_t>(i)], id);
        Eigen::VectorXd c = Eigen::LDLT<Eigen::MatrixXd>(G).solve(rhs);
        LeafFunction fit(filt);
        Poly q = basis[0];
        q *= c(0);
        for (int i = 1; i < S.dim_space(); ++i) {
            Poly t = basis[static_cast<std::size_t>(i)];
            t *= c(i);
            q += t;
        }
        fit.add_on_atom(id, q);
        fit_err[static_cast<std::size_t>(id)] = std::pow((f - fit).lp_under(id, p), p);
    }

    // bottom-up knapsack over the split tree (children have larger ids)
    std::vector<std::vector<double>> dp(static_cast<std::size_t>(atoms));
    for (AtomId id = atoms - 1; id >= 0; --id) {
        const Atom& a = filt.atom(id);
        std::vector<double>& row = dp[static_cast<std::size_t>(id)];
        row.assign(static_cast<std::size_t>(N + 1), 0.0);
        row[0] = zero_err[static_cast<std::size_t>(id)];
        if (a.is_leaf()) {
            for (int j = 1; j <= N; ++j)
                row[static_cast<std::size_t>(j)] = std::min(row[0], fit_err[static_cast<std::size_t>(id)]);
            continue;
        }
        const std::vector<double>& ls = dp[static_cast<std::size_t>(a.small_child)];
        const std::vector<double>& ll = dp[static_cast<std::size_t>(a.large_child)];
        for (int j = 1; j <= N; ++j) {
            double best = fit_err[static_cast<std::size_t>(id)];
            for (int k = 0; k <= j; ++k)
                best = std::min(best, ls[static_cast<std::size_t>(k)] + ll[static_cast<std::size_t>(j - k)]);
            row[static_cast<std::size_t>(j)] = std::min(row[0], best);
        }
    }
    for (int j = 0; j <= N; ++j)
        curve.errors.push_back(std::pow(dp[0][static_cast<std::size_t>(j)], 1.0 / p));
    return curve;
}

QuasinormResult aspace_quasinorm(const ApproxCurve& curve, double alpha, double q,
                                 double base_norm) {
    if (!(q > 0.0)) throw InvalidArgument("aspace_quasinorm: q must be positive");
    QuasinormResult out;
    const int N = static_cast<int>(curve.errors.size()) - 1;
    int K = 0;
    while ((1 << (K + 1)) <= N) ++K;
    out.truncation_index = K;
    double last_term = 0.0;
    if (std::isinf(q)) {
        double sup = 0.0;
        for (int k = 0; k <= K; ++k) {
            double term = std::pow(2.0, k * alpha) * curve.errors[static_cast<std::size_t>(1 << k)];
            sup = std::max(sup, term);
            last_term = term;
        }
        out.value = base_norm + sup;
        out.tail_warning = last_term > 0.01 * sup && sup > 0;
        return out;
    }
    double acc = 0.0;
    for (int k = 0; k <= K; ++k) {
        double term = std::pow(std::pow(2.0, k * alpha) * curve.errors[static_cast<std::size_t>(1 << k)], q);
        acc += term;
        last_term = term;
    }
    out.value = base_norm + std::pow(acc, 1.0 / q);
    out.tail_warning = acc > 0 && last_term > 0.01 * acc;
    return out;
}

double tau_norm(const std::vector<double>& coefficients, double tau) {
    if (!(tau > 0.0)) throw InvalidArgument("tau_norm: tau must be positive");
    double acc = 0.0;
    for (double c : coefficients) acc += std::pow(std::abs(c), tau);
    return std::pow(acc, 1.0 / tau);
}

}  // namespace binfilt
