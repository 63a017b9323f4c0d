#pragma once

#include "binfilt/bernstein_test.hpp"
#include "binfilt/orthosystem.hpp"

namespace binfilt {

struct GreedyResult {
    std::vector<CoefEntry> selected;  // Lambda_n in selection order
    LeafFunction approximant;
    double error = 0.0;
};

/// n-term greedy approximation by the renormalized system Psi: picks the n
/// largest |psi*(f)| (ties by index order) and evaluates the L^p error.
GreedyResult greedy_approx(const LeafFunction& f, const SystemPhi& system, int n);

struct ApproxCurve {
    std::string dictionary;  // "psi" | "C"
    std::string method;      // "greedy" | "exact" | "dp-upper-bound"
    std::vector<double> errors;  // errors[n] = E_n, n = 0..N
};

/// Greedy error curve for the Psi dictionary.
ApproxCurve en_curve_psi(const LeafFunction& f, const SystemPhi& system, int N);
/// Dynamic-program upper bound for the dictionary C = {f chi_A} with disjoint
/// pieces (exact best-fit per atom at p = 2).
ApproxCurve en_curve_dictionary(const LeafFunction& f, const Filtration& filt, const SpaceSpec& S,
                                double p, int N);

struct QuasinormResult {
    double value = 0.0;
    int truncation_index = 0;  // last dyadic level used
    bool tail_warning = false; // last term contributes > 1% of the sum
};

/// ||x|| + || {2^{n alpha} E_{2^n}} ||_{l^q}, truncated at the largest
/// 2^K <= N.
QuasinormResult aspace_quasinorm(const ApproxCurve& curve, double alpha, double q,
                                 double base_norm);

/// Coefficient tau-(quasi)norm (sum |c|^tau)^{1/tau}.
double tau_norm(const std::vector<double>& coefficients, double tau);

}  // namespace binfilt
