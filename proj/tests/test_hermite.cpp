#include "binfilt/hermite.hpp"
#include "binfilt/piecewise.hpp"
#include "binfilt/util.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace binfilt;

namespace {

Poly from_monomials(const std::vector<double>& mono) {
    // 1D polynomial on [0,1] given by monomial coefficients
    const int r = static_cast<int>(mono.size()) - 1;
    Rect I = Rect::unit_cube(1);
    std::vector<double> bern(mono.size(), 0.0);
    auto binom = [](int n, int k) {
        long acc = 1;
        for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
        return static_cast<double>(acc);
    };
    for (int j = 0; j <= r; ++j)
        for (int k = 0; k <= j; ++k) bern[static_cast<std::size_t>(j)] += binom(r - k, j - k) * mono[static_cast<std::size_t>(k)];
    return Poly(I, {r}, std::move(bern));
}

}  // namespace

TEST_SUITE("hermite") {

TEST_CASE("hermite_H interpolation") {
    // m = 1: H_{0,1} f = f(1), H_{1,0} f = f(0)
    Poly f = from_monomials({0.3, -1.1, 0.8});  // 0.3 - 1.1x + 0.8x^2
    Poly h01 = hermite_H(0, 1, f);
    CHECK(h01.degree()[0] == 0);
    CHECK(h01.eval({0.4}) == doctest::Approx(f.eval({1.0})).epsilon(1e-13));
    Poly h10 = hermite_H(1, 0, f);
    CHECK(h10.eval({0.4}) == doctest::Approx(f.eval({0.0})).epsilon(1e-13));

    // f(x) = x^2, H_{1,1} -> g(x) = x
    Poly x2 = from_monomials({0.0, 0.0, 1.0});
    Poly g = hermite_H(1, 1, x2);
    CHECK(g.eval({0.3}) == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(g.eval({0.9}) == doctest::Approx(0.9).epsilon(1e-13));

    // H fixes P_{m0+m1-1} pointwise
    Poly lin = from_monomials({0.5, 2.0});
    Poly fixed = hermite_H(1, 1, lin);
    for (double x : {0.1, 0.5, 0.8})
        CHECK(fixed.eval({x}) == doctest::Approx(lin.eval({x})).epsilon(1e-13));

    CHECK_THROWS_AS(hermite_H(0, 0, f), InvalidArgument);
}

TEST_CASE("choose_j") {
    // symmetric sides: tie-break scan lands on the balanced index for m even
    CHECK(choose_j(0.3, 0.3, 2, 2.0) == 1);
    // m=2, p=2, sides (0.01, 0.5): values 0.2768, 0.3546, 0.7071 -> j = 0
    CHECK(choose_j(0.01, 0.5, 2, 2.0) == 0);
    // vanishing right side: j = m kills the R_+ term
    CHECK(choose_j(0.3, 0.0, 3, 2.0) == 3);
}

TEST_CASE("U chain: idempotent, commuting, identity on P_m") {
    std::mt19937_64 rng = seeded_rng(12);
    std::uniform_real_distribution<double> unif(1e-6, 0.49);
    for (int trial = 0; trial < 25; ++trial) {
        double a = unif(rng), b = unif(rng);
        const int r = 3;
        ProjChain chain = build_U(a, b, 2.0, r);
        REQUIRE(chain.U.size() == static_cast<std::size_t>(r) + 1);

        // U_r = Id
        CHECK((chain.U[static_cast<std::size_t>(r)] -
               Eigen::MatrixXd::Identity(r + 1, r + 1)).norm() < 1e-14);
        // U_0 maps onto constants
        Eigen::VectorXd v(r + 1);
        v << 0.3, -0.7, 1.2, 0.4;
        Eigen::VectorXd u0 = chain.U[0] * v;
        for (int i = 1; i <= r; ++i) CHECK(std::abs(u0(i)) < 1e-12);

        for (int m = 0; m <= r; ++m) {
            for (int k = 0; k <= r; ++k) {
                Eigen::MatrixXd prod = chain.U[static_cast<std::size_t>(m)] * chain.U[static_cast<std::size_t>(k)];
                Eigen::MatrixXd expect = chain.U[static_cast<std::size_t>(std::min(m, k))];
                CHECK((prod - expect).norm() < 1e-10);
                // exact in rational mode
                CHECK(rat_equal(rat_matmul(chain.U_exact[static_cast<std::size_t>(m)],
                                           chain.U_exact[static_cast<std::size_t>(k)]),
                                chain.U_exact[static_cast<std::size_t>(std::min(m, k))]));
            }
            // identity on P_m: monomials of degree <= m are fixed
            for (int d = 0; d <= m; ++d) {
                Eigen::VectorXd mono = Eigen::VectorXd::Zero(r + 1);
                mono(d) = 1.0;
                CHECK((chain.U[static_cast<std::size_t>(m)] * mono - mono).norm() < 1e-12);
            }
        }
        // ||U_1 U_0 - U_0|| residual
        CHECK((chain.U[1] * chain.U[0] - chain.U[0]).norm() < 1e-10);
    }
}

TEST_CASE("U chain boundedness on rings") {
    std::mt19937_64 rng = seeded_rng(14);
    std::uniform_real_distribution<double> dec(1e-6, 0.45);
    const int r = 3;
    double worst_ring = 0.0, worst_unit = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        double a = dec(rng), b = dec(rng);
        ProjChain chain = build_U(a, b, 2.0, r);
        for (int m = 0; m < r; ++m) {
            worst_ring = std::max(worst_ring, op_norm_on_ring(chain.U[static_cast<std::size_t>(m)], r, a, b, 2.0));
            worst_unit = std::max(worst_unit, op_norm_on_interval(chain.U[static_cast<std::size_t>(m)], r, 2.0));
        }
    }
    CHECK(worst_ring < 50.0);
    CHECK(worst_unit < 50.0);
    CHECK(worst_ring >= 1.0 - 1e-9);  // projections have norm >= 1 on their range
}

TEST_CASE("tensor U and W_M") {
    ProjChain cx = build_U(0.2, 0.1, 2.0, 2);
    ProjChain cy = build_U(0.05, 0.3, 2.0, 2);
    std::vector<ProjChain> axes{cx, cy};

    // M = {m}: W = U_m, identity on P_m
    Eigen::MatrixXd w_single = build_W({{1, 2}}, axes);
    CHECK((w_single - tensor_U(axes, {1, 2})).norm() < 1e-14);

    // M = {(1,0),(0,1)}: W = U_{(1,0)} + U_{(0,1)} - U_{(0,0)} fixes a + bx + cy
    Eigen::MatrixXd w = build_W({{1, 0}, {0, 1}}, axes);
    Eigen::MatrixXd expect =
        tensor_U(axes, {1, 0}) + tensor_U(axes, {0, 1}) - tensor_U(axes, {0, 0});
    CHECK((w - expect).norm() < 1e-13);
    // coefficients in the tensor monomial layout (3x3, last axis fastest):
    // u = 2 + 3y + 4x -> indices (0,0), (0,1), (1,0)
    Eigen::VectorXd u = Eigen::VectorXd::Zero(9);
    u(0) = 2.0;
    u(1) = 3.0;
    u(3) = 4.0;
    CHECK((w * u - u).norm() < 1e-12);

    // exact mode identity on P_M for random small generator sets
    RatMat wx = build_W_exact({{1, 0}, {0, 1}}, axes);
    // xy monomial (index 4) is NOT fixed in general; 1, x, y are
    for (int idx : {0, 1, 3}) {
        std::vector<Rational> e(9, Rational(0));
        e[static_cast<std::size_t>(idx)] = 1;
        for (int row = 0; row < 9; ++row) {
            Rational acc(0);
            for (int col = 0; col < 9; ++col) acc += wx[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] * e[static_cast<std::size_t>(col)];
            CHECK(acc == (row == idx ? Rational(1) : Rational(0)));
        }
    }
}

TEST_CASE("W_M identity on P_M for random generator sets") {
    std::mt19937_64 rng = seeded_rng(15);
    std::uniform_real_distribution<double> dec(1e-4, 0.45);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2, r = 3;
        std::vector<ProjChain> axes;
        for (int s = 0; s < d; ++s) axes.push_back(build_U(dec(rng), dec(rng), 2.0, r));
        std::vector<std::vector<int>> M;
        int card = 1 + static_cast<int>(rng() % 4);
        for (int j = 0; j < card; ++j)
            M.push_back({static_cast<int>(rng() % (r + 1)), static_cast<int>(rng() % (r + 1))});
        Eigen::MatrixXd w = build_W(M, axes);
        // every monomial below some generator is fixed
        for (int mx = 0; mx <= r; ++mx)
            for (int my = 0; my <= r; ++my) {
                bool in_support = false;
                for (const auto& g : M) in_support |= mx <= g[0] && my <= g[1];
                if (!in_support) continue;
                Eigen::VectorXd e = Eigen::VectorXd::Zero((r + 1) * (r + 1));
                e(mx * (r + 1) + my) = 1.0;
                CHECK((w * e - e).norm() < 1e-9);
            }
    }
    CHECK_THROWS_AS(build_W({}, {build_U(0.1, 0.1, 2.0, 1)}), InvalidArgument);
}

TEST_CASE("Gram entries approach the Hilbert matrix") {
    // <B_{m,delta}, B_{n,delta}> on [0, delta] -> 1/(m+n+1) as delta -> 0
    const int r = 2;
    const double delta = 1e-4;
    Rect I = Rect::unit_cube(1);
    std::vector<Poly> basis = bernstein_basis(std::vector<int>{r}, I);
    Rect K = Rect::from_doubles({0.0}, {delta});
    for (int m = 0; m <= r; ++m)
        for (int n = 0; n <= r; ++n) {
            double ip = integrate_product(basis[static_cast<std::size_t>(m)], basis[static_cast<std::size_t>(n)], K);
            double scaled = ip / std::pow(delta, m + n + 1);
            CHECK(scaled == doctest::Approx(1.0 / (m + n + 1)).epsilon(2e-3));
        }
}

}  // TEST_SUITE
