#include "binfilt/quadrature.hpp"

#include "binfilt/util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace binfilt {

namespace {

GaussRule compute_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    // Newton iteration on P_n, symmetric nodes
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = (n == 1) ? x : p1;
            double pn1 = (n == 1) ? 1.0 : p0;
            pp = n * (x * pn - pn1) / (x * x - 1.0);
            double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b, int n) {
    const GaussRule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

namespace {

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double coarse,
                    double tol_abs, int depth, int max_depth) {
    double fine = gauss_integrate(f, a, 0.5 * (a + b), 10) +
                  gauss_integrate(f, 0.5 * (a + b), b, 10);
    if (depth >= max_depth || std::abs(fine - coarse) <= tol_abs) return fine;
    double mid = 0.5 * (a + b);
    double cl = gauss_integrate(f, a, mid, 10);
    double cr = gauss_integrate(f, mid, b, 10);
    return adaptive_rec(f, a, mid, cl, 0.5 * tol_abs, depth + 1, max_depth) +
           adaptive_rec(f, mid, b, cr, 0.5 * tol_abs, depth + 1, max_depth);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth) {
    if (a >= b) return 0.0;
    double coarse = gauss_integrate(f, a, b, 10);
    double scale = std::max(std::abs(coarse), 1e-300);
    return adaptive_rec(f, a, b, coarse, rel_tol * scale, 0, max_depth);
}

namespace {

double eval_poly(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
    if (d.empty()) d.push_back(0.0);
    return d;
}

}  // namespace

std::vector<double> poly_real_roots(const std::vector<double>& coeffs, double a, double b) {
    std::vector<double> c = coeffs;
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return {};
    while (c.size() > 1 && std::abs(c.back()) < 1e-13 * scale) c.pop_back();
    const int deg = static_cast<int>(c.size()) - 1;
    std::vector<double> roots;
    if (deg <= 0) return {};
    if (deg == 1) {
        roots.push_back(-c[0] / c[1]);
    } else if (deg == 2) {
        double A = c[2], B = c[1], C = c[0];
        double disc = B * B - 4 * A * C;
        if (disc >= 0) {
            double sq = std::sqrt(disc);
            double q = -0.5 * (B + (B >= 0 ? sq : -sq));
            roots.push_back(q / A);
            if (q != 0.0) roots.push_back(C / q);
            else roots.push_back(-B / A - q / A);
        }
    } else {
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
        for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[static_cast<std::size_t>(i)] / c.back();
        for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
        for (int i = 0; i < deg; ++i) {
            std::complex<double> z = es.eigenvalues()(i);
            if (std::abs(z.imag()) < 1e-9 * (1.0 + std::abs(z.real()))) roots.push_back(z.real());
        }
    }
    // Newton polish and filter
    std::vector<double> dcoef = poly_derivative(c);
    const double width = b - a;
    const double tol = 1e-12 * (width + std::abs(a) + std::abs(b) + 1.0);
    std::vector<double> out;
    for (double r : roots) {
        for (int it = 0; it < 6; ++it) {
            double d = eval_poly(dcoef, r);
            if (std::abs(d) < 1e-300) break;
            double step = eval_poly(c, r) / d;
            if (!std::isfinite(step)) break;
            r -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(r))) break;
        }
        if (r < a - tol || r > b + tol) continue;
        out.push_back(std::min(std::max(r, a), b));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [&](double x, double y) { return std::abs(x - y) <= tol; }),
              out.end());
    return out;
}

namespace {

/// |q|^p over [u,v] where q keeps one sign inside; root_at_u / root_at_v mark
/// endpoint zeros that get the s^2 substitution.
double piece_abs_pow(const std::vector<double>& c, double u, double v, double p, bool root_at_u,
                     bool root_at_v) {
    if (v - u <= 0) return 0.0;
    if (root_at_u && root_at_v) {
        double mid = 0.5 * (u + v);
        return piece_abs_pow(c, u, mid, p, true, false) + piece_abs_pow(c, mid, v, p, false, true);
    }
    auto g = [&](double x) { return std::pow(std::abs(eval_poly(c, x)), p); };
    if (root_at_u) {
        double L = std::sqrt(v - u);
        return adaptive_integrate([&](double s) { return 2.0 * s * g(u + s * s); }, 0.0, L, 1e-13);
    }
    if (root_at_v) {
        double L = std::sqrt(v - u);
        return adaptive_integrate([&](double s) { return 2.0 * s * g(v - s * s); }, 0.0, L, 1e-13);
    }
    return adaptive_integrate(g, u, v, 1e-13);
}

}  // namespace

double integrate_abs_poly_pow(const std::vector<double>& coeffs, double a, double b, double p) {
    if (b <= a) return 0.0;
    if (p < 1.0) throw InvalidArgument("integrate_abs_poly_pow: requires p >= 1");
    double scale = 0.0;
    for (double v : coeffs) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;

    const int deg = static_cast<int>(coeffs.size()) - 1;
    const double pr = std::round(p);
    const bool integer_p = std::abs(p - pr) < 1e-12;

    if (integer_p && static_cast<long>(pr) % 2 == 0) {
        int nodes = static_cast<int>(pr) * deg / 2 + 1;
        return gauss_integrate([&](double x) { return std::pow(eval_poly(coeffs, x), pr); }, a, b,
                               nodes);
    }

    std::vector<double> cuts = poly_real_roots(coeffs, a, b);
    std::vector<double> pts{a};
    for (double r : cuts)
        if (r > a && r < b) pts.push_back(r);
    pts.push_back(b);

    auto is_root = [&](double x) {
        for (double r : cuts)
            if (std::abs(r - x) <= 1e-12 * (1.0 + std::abs(x))) return true;
        return false;
    };

    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double u = pts[i], v = pts[i + 1];
        if (integer_p) {
            // sign-constant polynomial piece: exact rule
            int nodes = static_cast<int>(pr) * deg / 2 + 2;
            double val = gauss_integrate(
                [&](double x) { return std::pow(eval_poly(coeffs, x), pr); }, u, v, nodes);
            acc += std::abs(val);
        } else {
            acc += piece_abs_pow(coeffs, u, v, p, is_root(u), is_root(v));
        }
    }
    return acc;
}

}  // namespace binfilt
