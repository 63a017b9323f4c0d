#pragma once

#include <functional>
#include <vector>

namespace binfilt {

struct GaussRule {
    std::vector<double> nodes;    // on [-1,1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n points, exact for polynomials of degree 2n-1.
const GaussRule& gauss_legendre(int n);

/// Integral of f over [a,b] with the n-point rule mapped to the interval.
double gauss_integrate(const std::function<double(double)>& f, double a, double b, int n);

/// Adaptive 1D integration (Gauss 10/20 error estimate + bisection) to a
/// relative tolerance.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth = 48);

/// Real roots of a monomial-coefficient polynomial (c[0] + c[1] x + ...)
/// inside [a,b], ascending, deduplicated.
std::vector<double> poly_real_roots(const std::vector<double>& coeffs, double a, double b);

/// Integral of |q(x)|^p over [a,b] for a monomial-coefficient polynomial q.
/// Splits at the real roots of q and regularizes the endpoint zeros, so the
/// result carries near machine accuracy for any p >= 1.
double integrate_abs_poly_pow(const std::vector<double>& coeffs, double a, double b, double p);

}  // namespace binfilt
