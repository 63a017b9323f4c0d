#pragma once

#include "binfilt/partition.hpp"

namespace binfilt {

/// Interleaved sequence Lambda_n of length 2^n + 1 built from mu_l = 2^{-l/gamma};
/// exact dyadic rationals when 1/gamma is an integer.
struct LambdaSequence {
    double gamma = 0.5;
    int n = 0;
    std::vector<double> values;
    std::vector<Rational> exact;  // empty when no exact representation
    bool has_exact() const { return !exact.empty(); }
};

LambdaSequence lambda_sequence(double gamma, int n);

enum class SplitSchedule { ChainDescent, Breadth };

/// Abstract filtration with prescribed split fractions. ChainDescent splits
/// the surviving (second) piece of the previous split; Breadth splits atoms
/// in creation order.
Filtration filtration_from_fractions(const std::vector<Rational>& fractions,
                                     SplitSchedule schedule);

/// Fractions realizing prescribed buddy measures along a descending chain:
/// t_j = b_j / (b_j + ... + b_N + final).
std::vector<Rational> fractions_for_buddies(const std::vector<Rational>& buddies,
                                            const Rational& final_measure);

struct GeneratedFiltration {
    Filtration filtration;
    std::vector<Chain> designated_chains;
    std::vector<LambdaSequence> lambdas;  // used by the tau-separating family
};

/// The tau-separating filtration: for i = 1..i_max, a chain with buddy
/// measures z_i * lambda_{i,j} embedded on a region of measure 2^{-i},
/// regions arranged left to right on [0,1] (geometric, Constant space).
GeneratedFiltration thm42_filtration(double tau0, double p, int i_max);

/// The degree-separating chain (d = 1): length 2n+2, left buddies of measure
/// 2^{-omega n} with omega = p r + 1 and geometrically decaying right buddies
/// c 2^{-s}, c = (1-rho)/4. Throws (naming the minimal n) when
/// n 2^{-omega n} > (1-rho)/2.
GeneratedFiltration example55_chain(int n, double p, double tau, int r, const Rational& rho);

/// The degree-separating partition (d >= 2): off-axis splits halve the
/// measure, axis-i splits realize the degree-separating chains for r = kappa.
GeneratedFiltration example58_partition(int dim, int kappa, int axis_i, int off_depth,
                                        int chain_n, double p, double tau, const Rational& rho);

/// Regular builders used throughout the tests.
Filtration dyadic_filtration(int dim, int levels);
/// Breadth-first tree with every split at fraction t (geometric d = 1).
Filtration regular_filtration(int levels, const Rational& t);
Filtration random_filtration(std::uint64_t seed, int dim, int n_splits, int max_depth);

}  // namespace binfilt
