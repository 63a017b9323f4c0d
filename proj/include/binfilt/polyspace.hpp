#pragma once

#include "binfilt/partition.hpp"
#include "binfilt/rect.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace binfilt {

/// Polynomial on a reference rectangle, stored in the (unnormalized) Bernstein
/// basis B_i^s(x) = (x - inf I^s)^i (sup I^s - x)^{r_s - i}, tensorized over
/// the axes. Index order is lexicographic with the last axis fastest.
class Poly {
public:
    Poly() = default;
    Poly(Rect ref, std::vector<int> degree, std::vector<double> coeffs);

    const Rect& ref_rect() const { return ref_; }
    const std::vector<int>& degree() const { return deg_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    std::vector<double>& coeffs() { return coeffs_; }
    int dim() const { return static_cast<int>(deg_.size()); }
    int coeff_count() const { return static_cast<int>(coeffs_.size()); }
    std::size_t offset(const std::vector<int>& multi) const;

    double eval(const std::vector<double>& x) const;
    /// Same polynomial expressed in the Bernstein basis of a subrectangle.
    Poly restrict_to(const Rect& sub) const;
    /// Same polynomial in a higher-degree Bernstein basis on the same rect.
    Poly promote(const std::vector<int>& degree) const;
    /// Coefficient tensor in local monomial coordinates u in [0,1]^d
    /// (value at x equals the monomial tensor evaluated at u = (x-lo)/side).
    std::vector<double> local_monomial() const;

    Poly& operator*=(double c);
    Poly& operator+=(const Poly& other);  // same rect and degree
    Poly operator-(const Poly& other) const;

    nlohmann::json to_json() const;
    static Poly from_json(const nlohmann::json& j);

private:
    Rect ref_;
    std::vector<int> deg_;
    std::vector<double> coeffs_;
};

/// The four supported space variants; all are spanned by local monomials and
/// invariant under coordinate-wise affine maps.
class SpaceSpec {
public:
    enum class Kind { Constant, Tensor, TotalDegree, SpanSet };

    static SpaceSpec constant(int dim);
    static SpaceSpec tensor(std::vector<int> degrees);
    static SpaceSpec total_degree(int r, int dim);
    static SpaceSpec span_set(std::vector<std::vector<int>> generators, int dim);
    static SpaceSpec parse(const std::string& text, int dim);  // "constant" | "tensor:1,2" | ...

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    int dim_space() const { return static_cast<int>(support_.size()); }
    bool is_constant() const { return kind_ == Kind::Constant; }
    /// Monomial exponent support (downward closed), lexicographically sorted.
    const std::vector<std::vector<int>>& support() const { return support_; }
    /// Coordinate-degree envelope r with support <= r.
    const std::vector<int>& envelope() const { return envelope_; }
    /// Generator degrees for span reductions: Tensor -> {r}, TotalDegree ->
    /// {m : |m| = r}, SpanSet -> the given generators.
    std::vector<std::vector<int>> span_generators() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::Constant;
    int dim_ = 1;
    std::vector<std::vector<int>> support_;
    std::vector<int> envelope_;
    std::vector<std::vector<int>> generators_;
};

/// Basis of S localized to a rectangle (local monomials in Bernstein form).
std::vector<Poly> space_basis(const SpaceSpec& S, const Rect& A);

/// Tensor Bernstein basis B_m, 0 <= m <= r (envelope of the spec), on I.
std::vector<Poly> bernstein_basis(const SpaceSpec& S, const Rect& I);
std::vector<Poly> bernstein_basis(const std::vector<int>& degree, const Rect& I);

struct NormResult {
    double value = 0.0;
    bool degenerate = false;  // empty region
};

/// Integration regions for lp_norm.
struct Region {
    enum class Kind { Box, RingRegion, Union };
    Kind kind = Kind::Box;
    Rect box;
    const Filtration* f = nullptr;
    Ring ring;
    std::vector<Rect> boxes;

    static Region of_box(Rect r);
    static Region of_ring(const Filtration& f, Ring r);
    static Region of_union(std::vector<Rect> rs);
};

double lp_norm_box(const Poly& u, const Rect& box, double p);
NormResult lp_norm(const Poly& u, const Region& region, double p);
double sup_norm(const Poly& u, const Rect& A);

/// L^2 Gram matrix of a polynomial basis over a box (exact quadrature).
Eigen::MatrixXd gram_matrix(const std::vector<Poly>& basis, const Rect& box);

struct EpsilonReport {
    double value = 0.0;         // direct estimate (certified lower bound)
    double product_form = 0.0;  // eps_A * (|A|/|pp|)^{1/p} cross-check
    bool exact = false;
};

/// eps_A = sup_{u in S} ||u||_A / ||u||_{pp(A)} (sup norms).
double epsilon_A(const Filtration& f, const SpaceSpec& S, AtomId A);
/// eps_{A,p} = sup ||u chi_A||_p / ||u chi_{pp(A)}||_p; exact for Constant
/// (ratio of measures) and for p = 2 (generalized eigenproblem).
EpsilonReport epsilon_A_p(const Filtration& f, const SpaceSpec& S, AtomId A, double p);

struct StabilityConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    bool exact = false;
    double tolerance = 0.0;
    long function_samples = 0;
    long atom_samples = 0;
};

/// Empirical stability constants for the level-set inequality; Constant space
/// is exact (1,1).
StabilityConstants estimate_stability(const Filtration& f, const SpaceSpec& S,
                                      const std::vector<AtomId>& atoms, std::uint64_t seed = 1,
                                      int functions_per_atom = 64);

/// Chain weight: 1 if |A| <= lambda |pp(A)| with lambda = 1 - c2/2, otherwise
/// eps_{b(A),p}.
double u_of(const Filtration& f, const SpaceSpec& S, AtomId A, double p, double c2);

/// Measure fraction |{x in A : |u(x)| >= level}| / |A| (exact in 1D, grid
/// sampled otherwise).
double level_set_fraction(const Poly& u, const Rect& A, double level, int grid = 64);

}  // namespace binfilt
