#pragma once

#include "binfilt/polyspace.hpp"
#include "binfilt/rational.hpp"

#include <Eigen/Core>

namespace binfilt {

using RatMat = std::vector<std::vector<Rational>>;

/// Two-point Hermite interpolation: the unique polynomial of degree
/// m0+m1-1 matching f^(k)(0) for k < m0 and f^(k)(1) for k < m1 (local
/// coordinates of the interval). Returned as an operator on local monomial
/// coefficients of degree <= r.
Eigen::MatrixXd hermite_H_matrix(int m0, int m1, int r);
RatMat hermite_H_matrix_exact(int m0, int m1, int r);

/// Applies H_{m0,m1} to a univariate polynomial on its own interval.
Poly hermite_H(int m0, int m1, const Poly& f);

/// Index j minimizing |R_-|^{j+1/p} + |R_+|^{m-j+1/p} (ties -> smallest j).
int choose_j(double r_minus, double r_plus, int m, double p);

/// The composed projections U_m = H_{m+1} o ... o H_r on one axis, for a ring
/// with side lengths (r_minus, r_plus) inside the reference interval [0,1].
struct ProjChain {
    int r = 0;
    double p = 2.0;
    double r_minus = 0.0, r_plus = 0.0;
    std::vector<int> chosen_js;            // j used by H_l for l = r down to 1
    std::vector<Eigen::MatrixXd> U;        // U[m], m = 0..r, on monomial coefficients
    std::vector<RatMat> U_exact;           // same operators with exact entries
};

ProjChain build_U(double r_minus, double r_plus, double p, int r);

/// Tensor operator U_m = U_{m_1}^(1) x ... x U_{m_d}^(d) on tensor monomial
/// coefficients (last axis fastest).
Eigen::MatrixXd tensor_U(const std::vector<ProjChain>& per_axis, const std::vector<int>& mvec);

/// Inclusion-exclusion operator W_M = sum (-1)^{|B|+1} U_{min_B m}.
Eigen::MatrixXd build_W(const std::vector<std::vector<int>>& M,
                        const std::vector<ProjChain>& per_axis);

RatMat tensor_U_exact(const std::vector<ProjChain>& per_axis, const std::vector<int>& mvec);
RatMat build_W_exact(const std::vector<std::vector<int>>& M,
                     const std::vector<ProjChain>& per_axis);

/// Measured operator norm of a univariate monomial-coefficient operator from
/// L^p(R) to L^p(R), R = [0, r_minus] union [1-r_plus, 1].
double op_norm_on_ring(const Eigen::MatrixXd& op, int r, double r_minus, double r_plus, double p,
                       std::uint64_t seed = 1);
/// Same on the full interval [0,1].
double op_norm_on_interval(const Eigen::MatrixXd& op, int r, double p, std::uint64_t seed = 1);

RatMat rat_matmul(const RatMat& a, const RatMat& b);
RatMat rat_identity(int n);
bool rat_equal(const RatMat& a, const RatMat& b);

}  // namespace binfilt
