#pragma once

#include "binfilt/orthosystem.hpp"

#include <string>

namespace binfilt {

struct ConditionReport {
    std::string condition;  // w1 | w2 | w2s | special1d | specialMulti | haar
    std::string strategy;
    double p = 2.0, tau = 1.0, rho = 0.75;
    double max_ratio = 0.0;  // estimated M (lower bound for direct strategies)
    Chain witness_chain;
    std::vector<double> witness_coeffs;  // direct strategy: coefficients on the space basis
    long chains_evaluated = 0;
    bool empty = false;  // no chains found
};

/// Bound transfer between fatness parameters: a chain constant M measured at
/// rho0 bounds the constant at any rho < rho0 by (M+1)(1+log rho/log rho0).
double rho_rescaled_bound(double M, double rho0, double rho);

struct ConditionParams {
    double p = 2.0;
    double tau = 1.0;
    double rho = 0.75;
    int max_subchains = 20000;  // cap for the direct (optimizing) strategies
    std::uint64_t seed = 1;
    unsigned workers = 1;

    void validate() const;
};

/// Sum of u(A)^tau along fat chains (geometric condition for the one-term
/// Bernstein inequality). c2 feeds lambda = 1 - c2/2.
ConditionReport w1_report(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm,
                          double c2);

enum class W2sStrategy { Auto, ClosedForm, BernsteinReduction, SpanReduction, Direct };

/// Buddy-norm sum condition; strategy selection per space variant.
ConditionReport w2s_report(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm,
                           W2sStrategy strategy = W2sStrategy::Auto);

/// Q-projector sum condition (always direct, uses the orthonormal system).
ConditionReport w2_report(const Filtration& f, const SpaceSpec& S, const ConditionParams& prm);

/// One side of the explicit polynomial criterion.
struct SideRatio {
    int axis = 0;
    int side = 0;  // 0 = minus (left gap), 1 = plus (right gap)
    double lhs_log2 = 0.0;
    double rhs_log2 = 0.0;
    double ratio = 0.0;
    bool empty_side = false;
};

struct SpecialReport {
    std::vector<SideRatio> sides;
    double max_ratio = 0.0;
};

/// Univariate explicit criterion for P_r on one chain (both sides).
SpecialReport special_1d(const Filtration& f, const Chain& c, double p, double tau, int r);
/// Multivariate criterion for P_rvec, including the cross-axis gamma terms.
SpecialReport special_multi(const Filtration& f, const Chain& c, double p, double tau,
                            const std::vector<int>& rvec);

struct SubchainScan {
    double max_ratio = 0.0;
    int j0 = 0, j1 = 0;  // indices into the chain (inclusive)
    int axis = 0, side = 0;
    long subchains = 0;
};

/// Maximum of the explicit criterion ratio over every contiguous subchain.
/// Carried out in extended precision so chains with measures far below the
/// double range (the long counterexample chains) evaluate exactly.
SubchainScan scan_special_subchains(const Filtration& f, const Chain& c, double p, double tau,
                                    const std::vector<int>& rvec);

/// Closed-form w2s ratio of one chain for dim S = 1 spaces.
double w2s_closed_form_ratio(const Filtration& f, const SpaceSpec& S, const Chain& c, double p,
                             double tau);

}  // namespace binfilt
