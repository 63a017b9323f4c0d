#include "binfilt/hermite.hpp"

#include "binfilt/quadrature.hpp"
#include "binfilt/util.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace binfilt {

namespace {

/// Derivative functional row: d^k/du^k at u = 0 or u = 1 applied to monomial
/// coefficients of degree <= deg.
template <typename Scalar>
std::vector<Scalar> derivative_row(int k, bool at_one, int deg) {
    std::vector<Scalar> row(static_cast<std::size_t>(deg + 1), Scalar(0));
    for (int j = k; j <= deg; ++j) {
        long falling = 1;
        for (int t = 0; t < k; ++t) falling *= (j - t);
        if (!at_one && j != k) continue;
        row[static_cast<std::size_t>(j)] = Scalar(falling);
    }
    return row;
}

template <typename Scalar, typename Solve>
std::vector<std::vector<Scalar>> hermite_matrix_impl(int m0, int m1, int r, Solve solve) {
    const int m = m0 + m1;
    if (m < 1) throw InvalidArgument("hermite: m0 + m1 must be >= 1");
    if (m - 1 > r) throw InvalidArgument("hermite: target degree exceeds representation degree");
    // solve M g = R f where rows are the m interpolation conditions,
    // M acts on P_{m-1} coefficients, R on P_r coefficients
    std::vector<std::vector<Scalar>> M(static_cast<std::size_t>(m)),
        R(static_cast<std::size_t>(m));
    int row = 0;
    for (int k = 0; k < m0; ++k, ++row) {
        M[static_cast<std::size_t>(row)] = derivative_row<Scalar>(k, false, m - 1);
        R[static_cast<std::size_t>(row)] = derivative_row<Scalar>(k, false, r);
    }
    for (int k = 0; k < m1; ++k, ++row) {
        M[static_cast<std::size_t>(row)] = derivative_row<Scalar>(k, true, m - 1);
        R[static_cast<std::size_t>(row)] = derivative_row<Scalar>(k, true, r);
    }
    // out = M^{-1} R embedded into (r+1)x(r+1)
    std::vector<std::vector<Scalar>> inv = solve(M);
    std::vector<std::vector<Scalar>> out(static_cast<std::size_t>(r + 1),
                                         std::vector<Scalar>(static_cast<std::size_t>(r + 1), Scalar(0)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= r; ++j) {
            Scalar acc(0);
            for (int k = 0; k < m; ++k)
                acc += inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                       R[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
        }
    return out;
}

std::vector<std::vector<Rational>> rat_inverse(std::vector<std::vector<Rational>> a) {
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<Rational>> inv(static_cast<std::size_t>(n),
                                           std::vector<Rational>(static_cast<std::size_t>(n), Rational(0)));
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int row = col; row < n; ++row)
            if (a[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] != 0) {
                pivot = row;
                break;
            }
        if (pivot < 0) throw NumericalError("hermite: singular condition matrix");
        std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(pivot)]);
        std::swap(inv[static_cast<std::size_t>(col)], inv[static_cast<std::size_t>(pivot)]);
        Rational d = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] /= d;
            inv[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] /= d;
        }
        for (int row = 0; row < n; ++row) {
            if (row == col) continue;
            Rational factor = a[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
            if (factor == 0) continue;
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] -=
                    factor * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
                inv[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] -=
                    factor * inv[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
            }
        }
    }
    return inv;
}

}  // namespace

RatMat hermite_H_matrix_exact(int m0, int m1, int r) {
    return hermite_matrix_impl<Rational>(m0, m1, r, rat_inverse);
}

Eigen::MatrixXd hermite_H_matrix(int m0, int m1, int r) {
    RatMat exact = hermite_H_matrix_exact(m0, m1, r);
    Eigen::MatrixXd out(r + 1, r + 1);
    for (int i = 0; i <= r; ++i)
        for (int j = 0; j <= r; ++j)
            out(i, j) = to_double(exact[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    return out;
}

Poly hermite_H(int m0, int m1, const Poly& f) {
    if (f.dim() != 1) throw InvalidArgument("hermite_H: univariate only");
    const int r = f.degree()[0];
    const int m = m0 + m1;
    if (m < 1) throw InvalidArgument("hermite_H: m0 = m1 = 0 is not a projection");
    const int rr = std::max(r, m - 1);
    Poly lifted = rr == r ? f : f.promote({rr});
    std::vector<double> mono = lifted.local_monomial();
    Eigen::MatrixXd H = hermite_H_matrix(m0, m1, rr);
    Eigen::VectorXd c = Eigen::Map<Eigen::VectorXd>(mono.data(), rr + 1);
    Eigen::VectorXd g = H * c;
    // result has degree m-1; convert monomial -> Bernstein on the same interval
    const int rd = std::max(m - 1, 0);
    std::vector<double> gm(static_cast<std::size_t>(rd + 1), 0.0);
    for (int i = 0; i <= rd; ++i) gm[static_cast<std::size_t>(i)] = g(i);
    std::vector<double> bern(static_cast<std::size_t>(rd + 1), 0.0);
    const double h = f.ref_rect().side_d(0);
    const double inv_hr = std::pow(h, -rd);
    auto binom = [](int n, int k) {
        long acc = 1;
        for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
        return static_cast<double>(acc);
    };
    for (int j = 0; j <= rd; ++j) {
        double acc = 0.0;
        for (int k = 0; k <= j; ++k) acc += binom(rd - k, j - k) * gm[static_cast<std::size_t>(k)];
        bern[static_cast<std::size_t>(j)] = inv_hr * acc;
    }
    return Poly(f.ref_rect(), {rd}, std::move(bern));
}

int choose_j(double r_minus, double r_plus, int m, double p) {
    int best = 0;
    double best_val = 0.0;
    for (int j = 0; j <= m; ++j) {
        double val = 0.0;
        if (r_minus > 0) val += std::pow(r_minus, j + 1.0 / p);
        if (r_plus > 0) val += std::pow(r_plus, m - j + 1.0 / p);
        if (j == 0 || val < best_val - 1e-15 * (1.0 + best_val)) {
            best_val = val;
            best = j;
        }
    }
    return best;
}

ProjChain build_U(double r_minus, double r_plus, double p, int r) {
    if (r < 0) throw InvalidArgument("build_U: degree must be non-negative");
    ProjChain chain;
    chain.r = r;
    chain.p = p;
    chain.r_minus = r_minus;
    chain.r_plus = r_plus;

    RatMat id = rat_identity(r + 1);
    std::vector<RatMat> exact(static_cast<std::size_t>(r + 1), id);
    // U_r = Id; U_m = H_{m+1} o U_{m+1}
    for (int m = r - 1; m >= 0; --m) {
        int l = m + 1;  // level of the H projection applied on top
        int j = choose_j(r_minus, r_plus, l, p);
        chain.chosen_js.push_back(j);
        RatMat H = hermite_H_matrix_exact(j, l - j, r);
        exact[static_cast<std::size_t>(m)] = rat_matmul(H, exact[static_cast<std::size_t>(m + 1)]);
    }
    chain.U_exact = exact;
    for (int m = 0; m <= r; ++m) {
        Eigen::MatrixXd M(r + 1, r + 1);
        for (int i = 0; i <= r; ++i)
            for (int jj = 0; jj <= r; ++jj)
                M(i, jj) = to_double(exact[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)]);
        chain.U.push_back(M);
    }
    return chain;
}

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

RatMat rat_kron(const RatMat& a, const RatMat& b) {
    const std::size_t ar = a.size(), ac = a[0].size(), br = b.size(), bc = b[0].size();
    RatMat out(ar * br, std::vector<Rational>(ac * bc, Rational(0)));
    for (std::size_t i = 0; i < ar; ++i)
        for (std::size_t j = 0; j < ac; ++j)
            for (std::size_t k = 0; k < br; ++k)
                for (std::size_t l = 0; l < bc; ++l)
                    out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
    return out;
}

}  // namespace

Eigen::MatrixXd tensor_U(const std::vector<ProjChain>& per_axis, const std::vector<int>& mvec) {
    Eigen::MatrixXd out = per_axis[0].U[static_cast<std::size_t>(mvec[0])];
    for (std::size_t s = 1; s < per_axis.size(); ++s)
        out = kron(out, per_axis[s].U[static_cast<std::size_t>(mvec[s])]);
    return out;
}

RatMat tensor_U_exact(const std::vector<ProjChain>& per_axis, const std::vector<int>& mvec) {
    RatMat out = per_axis[0].U_exact[static_cast<std::size_t>(mvec[0])];
    for (std::size_t s = 1; s < per_axis.size(); ++s)
        out = rat_kron(out, per_axis[s].U_exact[static_cast<std::size_t>(mvec[s])]);
    return out;
}

namespace {

template <typename Mat, typename Tensor>
Mat wm_impl(const std::vector<std::vector<int>>& M, const std::vector<ProjChain>& per_axis,
            Tensor tensor_fn, const std::function<void(Mat&, const Mat&, long)>& axpy) {
    if (M.empty()) throw InvalidArgument("build_W: empty generator set");
    const std::size_t s = M.size();
    Mat out;
    bool first = true;
    for (std::size_t mask = 1; mask < (1ULL << s); ++mask) {
        std::vector<int> mmin = M[0];
        bool init = false;
        int card = 0;
        for (std::size_t j = 0; j < s; ++j) {
            if (!(mask & (1ULL << j))) continue;
            ++card;
            if (!init) {
                mmin = M[j];
                init = true;
            } else {
                for (std::size_t t = 0; t < mmin.size(); ++t)
                    mmin[t] = std::min(mmin[t], M[j][t]);
            }
        }
        long sign = (card % 2 == 1) ? 1 : -1;
        Mat term = tensor_fn(per_axis, mmin);
        if (first) {
            out = term;
            if (sign < 0)
                axpy(out, term, -2);  // out = -term
            first = false;
        } else {
            axpy(out, term, sign);
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXd build_W(const std::vector<std::vector<int>>& M,
                        const std::vector<ProjChain>& per_axis) {
    return wm_impl<Eigen::MatrixXd>(
        M, per_axis,
        [](const std::vector<ProjChain>& pa, const std::vector<int>& mv) { return tensor_U(pa, mv); },
        [](Eigen::MatrixXd& acc, const Eigen::MatrixXd& term, long sign) {
            acc += static_cast<double>(sign) * term;
        });
}

RatMat build_W_exact(const std::vector<std::vector<int>>& M,
                     const std::vector<ProjChain>& per_axis) {
    return wm_impl<RatMat>(
        M, per_axis,
        [](const std::vector<ProjChain>& pa, const std::vector<int>& mv) {
            return tensor_U_exact(pa, mv);
        },
        [](RatMat& acc, const RatMat& term, long sign) {
            for (std::size_t i = 0; i < acc.size(); ++i)
                for (std::size_t j = 0; j < acc[i].size(); ++j)
                    acc[i][j] += Rational(sign) * term[i][j];
        });
}

RatMat rat_matmul(const RatMat& a, const RatMat& b) {
    const std::size_t n = a.size(), m = b[0].size(), k = b.size();
    RatMat out(n, std::vector<Rational>(m, Rational(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (a[i][l] == 0) continue;
            for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][l] * b[l][j];
        }
    return out;
}

RatMat rat_identity(int n) {
    RatMat out(static_cast<std::size_t>(n), std::vector<Rational>(static_cast<std::size_t>(n), Rational(0)));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    return out;
}

bool rat_equal(const RatMat& a, const RatMat& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (std::size_t j = 0; j < a[i].size(); ++j)
            if (a[i][j] != b[i][j]) return false;
    }
    return true;
}

namespace {

double lp_on_ring_1d(const std::vector<double>& mono, double r_minus, double r_plus, double p) {
    double acc = 0.0;
    if (r_minus > 0) acc += integrate_abs_poly_pow(mono, 0.0, r_minus, p);
    if (r_plus > 0) acc += integrate_abs_poly_pow(mono, 1.0 - r_plus, 1.0, p);
    return std::pow(acc, 1.0 / p);
}

double op_norm_impl(const Eigen::MatrixXd& op, int r,
                    const std::function<double(const std::vector<double>&)>& norm,
                    std::uint64_t seed) {
    std::mt19937_64 rng = seeded_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = 0.0;
    const int n = r + 1;
    auto ratio = [&](Eigen::VectorXd c) {
        std::vector<double> in(c.data(), c.data() + n);
        double den = norm(in);
        if (den <= 0) return 0.0;
        Eigen::VectorXd oc = op * c;
        std::vector<double> out(oc.data(), oc.data() + n);
        return norm(out) / den;
    };
    std::vector<Eigen::VectorXd> inits;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(i) = 1.0;
        inits.push_back(e);
    }
    for (int s = 0; s < 16; ++s) {
        Eigen::VectorXd c(n);
        for (int i = 0; i < n; ++i) c(i) = gauss(rng);
        c.normalize();
        inits.push_back(c);
    }
    for (Eigen::VectorXd c : inits) {
        double val = ratio(c);
        double step = 0.5;
        while (step > 1e-5) {
            bool improved = false;
            for (int i = 0; i < n; ++i)
                for (double sgn : {1.0, -1.0}) {
                    Eigen::VectorXd t = c;
                    t(i) += sgn * step;
                    t.normalize();
                    double v = ratio(t);
                    if (v > val * (1.0 + 1e-12)) {
                        val = v;
                        c = t;
                        improved = true;
                    }
                }
            if (!improved) step *= 0.5;
        }
        best = std::max(best, val);
    }
    return best;
}

}  // namespace

double op_norm_on_ring(const Eigen::MatrixXd& op, int r, double r_minus, double r_plus, double p,
                       std::uint64_t seed) {
    return op_norm_impl(op, r,
                        [&](const std::vector<double>& m) { return lp_on_ring_1d(m, r_minus, r_plus, p); },
                        seed);
}

double op_norm_on_interval(const Eigen::MatrixXd& op, int r, double p, std::uint64_t seed) {
    return op_norm_impl(op, r,
                        [&](const std::vector<double>& m) {
                            return std::pow(integrate_abs_poly_pow(m, 0.0, 1.0, p), 1.0 / p);
                        },
                        seed);
}

}  // namespace binfilt
