#include "binfilt/polyspace.hpp"

#include "binfilt/quadrature.hpp"
#include "binfilt/util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace binfilt {

namespace {

long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long acc = 1;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return acc;
}

std::vector<int> tensor_sizes(const std::vector<int>& deg) {
    std::vector<int> out(deg.size());
    for (std::size_t i = 0; i < deg.size(); ++i) out[i] = deg[i] + 1;
    return out;
}

std::size_t total_size(const std::vector<int>& sizes) {
    std::size_t n = 1;
    for (int s : sizes) n *= static_cast<std::size_t>(s);
    return n;
}

/// Applies a (rows x cols) matrix along one tensor axis.
std::vector<double> apply_axis_matrix(const std::vector<double>& tensor,
                                      std::vector<int>& sizes, int axis,
                                      const std::vector<double>& mat, int rows) {
    const int cols = sizes[static_cast<std::size_t>(axis)];
    std::size_t inner = 1, outer = 1;
    for (int s = axis + 1; s < static_cast<int>(sizes.size()); ++s)
        inner *= static_cast<std::size_t>(sizes[static_cast<std::size_t>(s)]);
    for (int s = 0; s < axis; ++s) outer *= static_cast<std::size_t>(sizes[static_cast<std::size_t>(s)]);

    std::vector<double> out(outer * static_cast<std::size_t>(rows) * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o)
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                double m = mat[static_cast<std::size_t>(r * cols + c)];
                if (m == 0.0) continue;
                const double* src = tensor.data() + (o * cols + static_cast<std::size_t>(c)) * inner;
                double* dst = out.data() + (o * static_cast<std::size_t>(rows) + static_cast<std::size_t>(r)) * inner;
                for (std::size_t i = 0; i < inner; ++i) dst[i] += m * src[i];
            }
    sizes[static_cast<std::size_t>(axis)] = rows;
    return out;
}

/// bern -> local monomial, one axis: includes the side^r factor.
std::vector<double> bern_to_mono_matrix(int r, double side) {
    const int n = r + 1;
    std::vector<double> T(static_cast<std::size_t>(n * n), 0.0);
    const double hr = std::pow(side, r);
    for (int i = 0; i <= r; ++i)
        for (int t = 0; t <= r - i; ++t) {
            double v = hr * static_cast<double>(binom(r - i, t)) * ((t % 2) ? -1.0 : 1.0);
            T[static_cast<std::size_t>((i + t) * n + i)] += v;
        }
    return T;
}

/// local monomial -> bern, one axis.
std::vector<double> mono_to_bern_matrix(int r, double side) {
    const int n = r + 1;
    std::vector<double> T(static_cast<std::size_t>(n * n), 0.0);
    const double inv_hr = std::pow(side, -r);
    for (int k = 0; k <= r; ++k)
        for (int j = k; j <= r; ++j)
            T[static_cast<std::size_t>(j * n + k)] = inv_hr * static_cast<double>(binom(r - k, j - k));
    return T;
}

/// substitution u = alpha + beta * u', one axis (monomial to monomial).
std::vector<double> affine_subst_matrix(int r, double alpha, double beta) {
    const int n = r + 1;
    std::vector<double> T(static_cast<std::size_t>(n * n), 0.0);
    for (int k = 0; k <= r; ++k)
        for (int j = k; j >= 0; --j)
            T[static_cast<std::size_t>(j * n + k)] =
                static_cast<double>(binom(k, j)) * std::pow(alpha, k - j) * std::pow(beta, j);
    return T;
}

}  // namespace

Poly::Poly(Rect ref, std::vector<int> degree, std::vector<double> coeffs)
    : ref_(std::move(ref)), deg_(std::move(degree)), coeffs_(std::move(coeffs)) {
    if (static_cast<int>(deg_.size()) != ref_.dim())
        throw InvalidArgument("poly: degree/rect dimension mismatch");
    if (coeffs_.size() != total_size(tensor_sizes(deg_)))
        throw InvalidArgument("poly: coefficient tensor has the wrong shape");
}

std::size_t Poly::offset(const std::vector<int>& multi) const {
    std::size_t idx = 0;
    for (std::size_t s = 0; s < deg_.size(); ++s) {
        idx = idx * static_cast<std::size_t>(deg_[s] + 1) + static_cast<std::size_t>(multi[s]);
    }
    return idx;
}

double Poly::eval(const std::vector<double>& x) const {
    const int d = dim();
    std::vector<std::vector<double>> vals(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s) {
        const int r = deg_[static_cast<std::size_t>(s)];
        std::vector<double>& v = vals[static_cast<std::size_t>(s)];
        v.resize(static_cast<std::size_t>(r + 1));
        const double t1 = x[static_cast<std::size_t>(s)] - ref_.lo_d(s);
        const double t2 = ref_.hi_d(s) - x[static_cast<std::size_t>(s)];
        double p1 = 1.0;
        std::vector<double> pow2(static_cast<std::size_t>(r + 1));
        pow2[0] = 1.0;
        for (int i = 1; i <= r; ++i) pow2[static_cast<std::size_t>(i)] = pow2[static_cast<std::size_t>(i - 1)] * t2;
        for (int i = 0; i <= r; ++i) {
            v[static_cast<std::size_t>(i)] = p1 * pow2[static_cast<std::size_t>(r - i)];
            p1 *= t1;
        }
    }
    double acc = 0.0;
    std::vector<int> multi(static_cast<std::size_t>(d), 0);
    for (std::size_t idx = 0; idx < coeffs_.size(); ++idx) {
        double term = coeffs_[idx];
        if (term != 0.0)
            for (int s = 0; s < d; ++s)
                term *= vals[static_cast<std::size_t>(s)][static_cast<std::size_t>(multi[static_cast<std::size_t>(s)])];
        acc += term;
        for (int s = d - 1; s >= 0; --s) {
            if (++multi[static_cast<std::size_t>(s)] <= deg_[static_cast<std::size_t>(s)]) break;
            multi[static_cast<std::size_t>(s)] = 0;
        }
    }
    return acc;
}

std::vector<double> Poly::local_monomial() const {
    std::vector<double> t = coeffs_;
    std::vector<int> sizes = tensor_sizes(deg_);
    for (int s = 0; s < dim(); ++s) {
        auto M = bern_to_mono_matrix(deg_[static_cast<std::size_t>(s)], ref_.side_d(s));
        t = apply_axis_matrix(t, sizes, s, M, deg_[static_cast<std::size_t>(s)] + 1);
    }
    return t;
}

Poly Poly::restrict_to(const Rect& sub) const {
    std::vector<double> t = coeffs_;
    std::vector<int> sizes = tensor_sizes(deg_);
    for (int s = 0; s < dim(); ++s) {
        const int r = deg_[static_cast<std::size_t>(s)];
        const double h_old = ref_.side_d(s), h_new = sub.side_d(s);
        const double alpha = (sub.lo_d(s) - ref_.lo_d(s)) / h_old;
        const double beta = h_new / h_old;
        auto M1 = bern_to_mono_matrix(r, h_old);
        t = apply_axis_matrix(t, sizes, s, M1, r + 1);
        auto M2 = affine_subst_matrix(r, alpha, beta);
        t = apply_axis_matrix(t, sizes, s, M2, r + 1);
        auto M3 = mono_to_bern_matrix(r, h_new);
        t = apply_axis_matrix(t, sizes, s, M3, r + 1);
    }
    return Poly(sub, deg_, std::move(t));
}

Poly Poly::promote(const std::vector<int>& degree) const {
    if (degree == deg_) return *this;
    for (std::size_t s = 0; s < deg_.size(); ++s)
        if (degree[s] < deg_[s]) throw InvalidArgument("poly promote: target degree too small");
    std::vector<double> mono = local_monomial();
    std::vector<int> sizes = tensor_sizes(deg_);
    std::vector<int> esz = tensor_sizes(degree);
    std::size_t tot = total_size(esz);
    std::vector<double> padded(tot, 0.0);
    std::vector<int> multi(deg_.size(), 0);
    for (std::size_t idx = 0; idx < mono.size(); ++idx) {
        std::size_t pos = 0;
        for (std::size_t s = 0; s < deg_.size(); ++s)
            pos = pos * static_cast<std::size_t>(esz[s]) + static_cast<std::size_t>(multi[s]);
        padded[pos] = mono[idx];
        for (int s = dim() - 1; s >= 0; --s) {
            if (++multi[static_cast<std::size_t>(s)] < sizes[static_cast<std::size_t>(s)]) break;
            multi[static_cast<std::size_t>(s)] = 0;
        }
    }
    std::vector<int> sz = esz;
    for (int s = 0; s < dim(); ++s) {
        auto M = mono_to_bern_matrix(degree[static_cast<std::size_t>(s)], ref_.side_d(s));
        padded = apply_axis_matrix(padded, sz, s, M, degree[static_cast<std::size_t>(s)] + 1);
    }
    return Poly(ref_, degree, std::move(padded));
}

Poly& Poly::operator*=(double c) {
    for (double& v : coeffs_) v *= c;
    return *this;
}

Poly& Poly::operator+=(const Poly& other) {
    if (!(ref_ == other.ref_) || deg_ != other.deg_)
        throw InvalidArgument("poly +=: mismatched rect or degree");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

Poly Poly::operator-(const Poly& other) const {
    Poly out = *this;
    Poly neg = other;
    neg *= -1.0;
    out += neg;
    return out;
}

nlohmann::json Poly::to_json() const {
    nlohmann::json j;
    nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
    for (int s = 0; s < dim(); ++s) {
        lo.push_back(ref_.lo_d(s));
        hi.push_back(ref_.hi_d(s));
    }
    j["rect"] = {{"lo", lo}, {"hi", hi}};
    j["degree"] = deg_;
    j["bernstein_coeffs"] = coeffs_;
    return j;
}

Poly Poly::from_json(const nlohmann::json& j) {
    auto lo = j.at("rect").at("lo").get<std::vector<double>>();
    auto hi = j.at("rect").at("hi").get<std::vector<double>>();
    return Poly(Rect::from_doubles(lo, hi), j.at("degree").get<std::vector<int>>(),
                j.at("bernstein_coeffs").get<std::vector<double>>());
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> downward_closure(const std::vector<std::vector<int>>& gens, int dim) {
    std::vector<int> env(static_cast<std::size_t>(dim), 0);
    for (const auto& g : gens)
        for (int s = 0; s < dim; ++s) env[static_cast<std::size_t>(s)] = std::max(env[static_cast<std::size_t>(s)], g[static_cast<std::size_t>(s)]);
    std::vector<std::vector<int>> out;
    std::vector<int> multi(static_cast<std::size_t>(dim), 0);
    while (true) {
        for (const auto& g : gens) {
            bool below = true;
            for (int s = 0; s < dim; ++s)
                if (multi[static_cast<std::size_t>(s)] > g[static_cast<std::size_t>(s)]) { below = false; break; }
            if (below) {
                out.push_back(multi);
                break;
            }
        }
        int s = dim - 1;
        while (s >= 0) {
            if (++multi[static_cast<std::size_t>(s)] <= env[static_cast<std::size_t>(s)]) break;
            multi[static_cast<std::size_t>(s)] = 0;
            --s;
        }
        if (s < 0) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

SpaceSpec SpaceSpec::constant(int dim) {
    SpaceSpec s;
    s.kind_ = Kind::Constant;
    s.dim_ = dim;
    s.support_ = {std::vector<int>(static_cast<std::size_t>(dim), 0)};
    s.envelope_.assign(static_cast<std::size_t>(dim), 0);
    s.generators_ = s.support_;
    return s;
}

SpaceSpec SpaceSpec::tensor(std::vector<int> degrees) {
    SpaceSpec s;
    s.kind_ = Kind::Tensor;
    s.dim_ = static_cast<int>(degrees.size());
    s.generators_ = {degrees};
    s.support_ = downward_closure(s.generators_, s.dim_);
    s.envelope_ = degrees;
    return s;
}

SpaceSpec SpaceSpec::total_degree(int r, int dim) {
    SpaceSpec s;
    s.kind_ = Kind::TotalDegree;
    s.dim_ = dim;
    std::vector<std::vector<int>> gens;
    // all coordinate tuples with |m| = r
    std::vector<int> multi(static_cast<std::size_t>(dim), 0);
    std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == dim - 1) {
            multi[static_cast<std::size_t>(axis)] = left;
            gens.push_back(multi);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            multi[static_cast<std::size_t>(axis)] = v;
            rec(axis + 1, left - v);
        }
    };
    rec(0, r);
    s.generators_ = gens;
    s.support_ = downward_closure(gens, dim);
    s.envelope_.assign(static_cast<std::size_t>(dim), r);
    return s;
}

SpaceSpec SpaceSpec::span_set(std::vector<std::vector<int>> generators, int dim) {
    if (generators.empty()) throw InvalidArgument("span_set: empty generator set");
    SpaceSpec s;
    s.kind_ = Kind::SpanSet;
    s.dim_ = dim;
    s.generators_ = generators;
    s.support_ = downward_closure(generators, dim);
    s.envelope_.assign(static_cast<std::size_t>(dim), 0);
    for (const auto& g : generators)
        for (int i = 0; i < dim; ++i)
            s.envelope_[static_cast<std::size_t>(i)] = std::max(s.envelope_[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(i)]);
    return s;
}

SpaceSpec SpaceSpec::parse(const std::string& text, int dim) {
    if (text == "constant") return constant(dim);
    auto colon = text.find(':');
    if (colon == std::string::npos) throw InvalidArgument("unknown space spec: " + text);
    std::string kind = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);
    auto parse_tuple = [](const std::string& t) {
        std::vector<int> out;
        std::size_t pos = 0;
        while (pos <= t.size()) {
            auto comma = t.find(',', pos);
            std::string tok = t.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            out.push_back(std::stoi(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return out;
    };
    if (kind == "tensor") {
        auto deg = parse_tuple(rest);
        if (static_cast<int>(deg.size()) != dim)
            throw InvalidArgument("tensor space: degree tuple does not match dimension");
        return tensor(deg);
    }
    if (kind == "total") return total_degree(std::stoi(rest), dim);
    if (kind == "span") {
        std::vector<std::vector<int>> gens;
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            auto semi = rest.find(';', pos);
            std::string tok = rest.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
            gens.push_back(parse_tuple(tok));
            if (semi == std::string::npos) break;
            pos = semi + 1;
        }
        return span_set(gens, dim);
    }
    throw InvalidArgument("unknown space spec: " + text);
}

std::vector<std::vector<int>> SpaceSpec::span_generators() const { return generators_; }

std::string SpaceSpec::describe() const {
    switch (kind_) {
        case Kind::Constant: return "constant";
        case Kind::Tensor: {
            std::string s = "tensor:";
            for (std::size_t i = 0; i < envelope_.size(); ++i)
                s += (i ? "," : "") + std::to_string(envelope_[i]);
            return s;
        }
        case Kind::TotalDegree: {
            int r = 0;
            for (const auto& g : generators_) r = std::max(r, std::accumulate(g.begin(), g.end(), 0));
            return "total:" + std::to_string(r);
        }
        case Kind::SpanSet: {
            std::string s = "span:";
            for (std::size_t j = 0; j < generators_.size(); ++j) {
                if (j) s += ";";
                for (std::size_t i = 0; i < generators_[j].size(); ++i)
                    s += (i ? "," : "") + std::to_string(generators_[j][i]);
            }
            return s;
        }
    }
    return "?";
}

std::vector<Poly> space_basis(const SpaceSpec& S, const Rect& A) {
    std::vector<Poly> out;
    const std::vector<int>& env = S.envelope();
    std::vector<int> sizes = tensor_sizes(env);
    for (const auto& m : S.support()) {
        // local monomial u^m expressed in the Bernstein basis of A
        std::vector<double> mono(total_size(sizes), 0.0);
        std::size_t idx = 0;
        for (std::size_t s = 0; s < env.size(); ++s)
            idx = idx * static_cast<std::size_t>(env[s] + 1) + static_cast<std::size_t>(m[s]);
        mono[idx] = 1.0;
        std::vector<int> sz = sizes;
        std::vector<double> t = mono;
        for (int s = 0; s < S.dim(); ++s) {
            auto M = mono_to_bern_matrix(env[static_cast<std::size_t>(s)], A.side_d(s));
            t = apply_axis_matrix(t, sz, s, M, env[static_cast<std::size_t>(s)] + 1);
        }
        out.emplace_back(A, env, std::move(t));
    }
    return out;
}

std::vector<Poly> bernstein_basis(const std::vector<int>& degree, const Rect& I) {
    std::vector<Poly> out;
    std::vector<int> sizes = tensor_sizes(degree);
    const std::size_t n = total_size(sizes);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> c(n, 0.0);
        c[i] = 1.0;
        out.emplace_back(I, degree, std::move(c));
    }
    return out;
}

std::vector<Poly> bernstein_basis(const SpaceSpec& S, const Rect& I) {
    return bernstein_basis(S.envelope(), I);
}

// ---------------------------------------------------------------------------

namespace {

double integrate_pow_even(const Poly& u, const Rect& box, long p) {
    const int d = u.dim();
    std::vector<int> nodes(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s)
        nodes[static_cast<std::size_t>(s)] = static_cast<int>(p) * u.degree()[static_cast<std::size_t>(s)] / 2 + 1;
    std::function<double(std::vector<double>&, int)> rec = [&](std::vector<double>& x, int axis) -> double {
        if (axis == d) {
            double v = u.eval(x);
            return std::pow(v, static_cast<double>(p));
        }
        const GaussRule& rule = gauss_legendre(nodes[static_cast<std::size_t>(axis)]);
        const double mid = 0.5 * (box.lo_d(axis) + box.hi_d(axis));
        const double half = 0.5 * box.side_d(axis);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            x[static_cast<std::size_t>(axis)] = mid + half * rule.nodes[i];
            acc += rule.weights[i] * rec(x, axis + 1);
        }
        return acc * half;
    };
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    return rec(x, 0);
}

/// Folds the first tensor axis at value t (local coordinate).
std::vector<double> fold_first_axis(const std::vector<double>& tensor, const std::vector<int>& sizes,
                                    double t) {
    const int n0 = sizes[0];
    std::size_t rest = tensor.size() / static_cast<std::size_t>(n0);
    std::vector<double> out(rest, 0.0);
    double tp = 1.0;
    for (int k = 0; k < n0; ++k) {
        const double* src = tensor.data() + static_cast<std::size_t>(k) * rest;
        for (std::size_t i = 0; i < rest; ++i) out[i] += tp * src[i];
        tp *= t;
    }
    return out;
}

double integrate_abs_pow_local(const std::vector<double>& mono, std::vector<int> sizes, double p,
                               double tol) {
    if (sizes.size() == 1) return integrate_abs_poly_pow(mono, 0.0, 1.0, p);
    std::vector<int> rest(sizes.begin() + 1, sizes.end());
    auto f = [&](double t) {
        auto folded = fold_first_axis(mono, sizes, t);
        return integrate_abs_pow_local(folded, rest, p, tol * 0.5);
    };
    return adaptive_integrate(f, 0.0, 1.0, tol);
}

double integrate_abs_pow_box(const Poly& u, const Rect& box, double p, double tol = 1e-10) {
    Poly local = u.restrict_to(box);
    std::vector<double> mono = local.local_monomial();
    std::vector<int> sizes = tensor_sizes(local.degree());
    double jac = 1.0;
    for (int s = 0; s < box.dim(); ++s) jac *= box.side_d(s);
    return jac * integrate_abs_pow_local(mono, sizes, p, tol);
}

}  // namespace

double lp_norm_box(const Poly& u, const Rect& box, double p) {
    if (std::isinf(p)) return sup_norm(u, box);
    if (p < 1.0) throw InvalidArgument("lp_norm: requires p >= 1");
    const double pr = std::round(p);
    if (std::abs(p - pr) < 1e-12 && static_cast<long>(pr) % 2 == 0)
        return std::pow(integrate_pow_even(u, box, static_cast<long>(pr)), 1.0 / p);
    return std::pow(integrate_abs_pow_box(u, box, p), 1.0 / p);
}

Region Region::of_box(Rect r) {
    Region reg;
    reg.kind = Kind::Box;
    reg.box = std::move(r);
    return reg;
}

Region Region::of_ring(const Filtration& f, Ring r) {
    Region reg;
    reg.kind = Kind::RingRegion;
    reg.f = &f;
    reg.ring = r;
    return reg;
}

Region Region::of_union(std::vector<Rect> rs) {
    Region reg;
    reg.kind = Kind::Union;
    reg.boxes = std::move(rs);
    return reg;
}

NormResult lp_norm(const Poly& u, const Region& region, double p) {
    NormResult res;
    if (std::isinf(p)) {
        switch (region.kind) {
            case Region::Kind::Box: res.value = sup_norm(u, region.box); return res;
            case Region::Kind::RingRegion: {
                double m = 0.0;
                for (const Rect& b : ring_disjoint_boxes(*region.f, region.ring))
                    m = std::max(m, sup_norm(u, b));
                res.value = m;
                return res;
            }
            case Region::Kind::Union: {
                if (region.boxes.empty()) {
                    res.degenerate = true;
                    return res;
                }
                double m = 0.0;
                for (const Rect& b : region.boxes) m = std::max(m, sup_norm(u, b));
                res.value = m;
                return res;
            }
        }
    }
    const double pr = std::round(p);
    const bool even = std::abs(p - pr) < 1e-12 && static_cast<long>(pr) % 2 == 0;
    switch (region.kind) {
        case Region::Kind::Box: {
            res.value = lp_norm_box(u, region.box, p);
            return res;
        }
        case Region::Kind::RingRegion: {
            const Filtration& f = *region.f;
            const Rect& outer = f.atom(region.ring.outer).rect;
            const Rect& inner = f.atom(region.ring.inner).rect;
            if (even) {
                double v = integrate_pow_even(u, outer, static_cast<long>(pr)) -
                           integrate_pow_even(u, inner, static_cast<long>(pr));
                res.value = std::pow(std::max(v, 0.0), 1.0 / p);
                return res;
            }
            // inclusion-exclusion over the 2d covering slabs: a nonempty
            // intersection picks, per axis, the left gap, the right gap or the
            // full extent of the outer rectangle
            const int d = outer.dim();
            double total = 0.0;
            std::vector<int> choice(static_cast<std::size_t>(d), 0);  // 0 none, 1 left, 2 right
            std::function<void(int, int)> rec = [&](int axis, int picked) {
                if (axis == d) {
                    if (picked == 0) return;
                    std::vector<Rational> lo, hi;
                    for (int s = 0; s < d; ++s) {
                        switch (choice[static_cast<std::size_t>(s)]) {
                            case 0: lo.push_back(outer.lo(s)); hi.push_back(outer.hi(s)); break;
                            case 1: lo.push_back(outer.lo(s)); hi.push_back(inner.lo(s)); break;
                            default: lo.push_back(inner.hi(s)); hi.push_back(outer.hi(s)); break;
                        }
                        if (!(lo.back() < hi.back())) return;  // empty side
                    }
                    Rect cell(std::move(lo), std::move(hi));
                    double sign = (picked % 2 == 1) ? 1.0 : -1.0;
                    total += sign * integrate_abs_pow_box(u, cell, p);
                    return;
                }
                for (int c = 0; c < 3; ++c) {
                    choice[static_cast<std::size_t>(axis)] = c;
                    rec(axis + 1, picked + (c != 0 ? 1 : 0));
                }
            };
            rec(0, 0);
            res.value = std::pow(std::max(total, 0.0), 1.0 / p);
            return res;
        }
        case Region::Kind::Union: {
            if (region.boxes.empty()) {
                res.degenerate = true;
                return res;
            }
            double acc = 0.0;
            for (const Rect& b : region.boxes)
                acc += even ? integrate_pow_even(u, b, static_cast<long>(pr))
                            : integrate_abs_pow_box(u, b, p);
            res.value = std::pow(acc, 1.0 / p);
            return res;
        }
    }
    return res;
}

double sup_norm(const Poly& u, const Rect& A) {
    const int d = u.dim();
    int maxdeg = 0;
    for (int r : u.degree()) maxdeg = std::max(maxdeg, r);
    if (maxdeg == 0) return std::abs(u.coeffs()[0]);

    const int n = 4 * maxdeg + 1;
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) grid[static_cast<std::size_t>(j)] = 0.5 * (1.0 - std::cos(M_PI * j / (n - 1)));

    std::vector<double> best_x(static_cast<std::size_t>(d));
    double best = -1.0;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    while (true) {
        for (int s = 0; s < d; ++s)
            x[static_cast<std::size_t>(s)] = A.lo_d(s) + grid[static_cast<std::size_t>(idx[static_cast<std::size_t>(s)])] * A.side_d(s);
        double v = std::abs(u.eval(x));
        if (v > best) {
            best = v;
            best_x = x;
        }
        int s = d - 1;
        while (s >= 0) {
            if (++idx[static_cast<std::size_t>(s)] < n) break;
            idx[static_cast<std::size_t>(s)] = 0;
            --s;
        }
        if (s < 0) break;
    }

    // coordinate-wise exact 1D maximization (derivative roots) from the best node
    Poly local = u.restrict_to(A);
    std::vector<double> mono = local.local_monomial();
    std::vector<int> sizes = tensor_sizes(local.degree());
    std::vector<double> ux(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s) ux[static_cast<std::size_t>(s)] = (best_x[static_cast<std::size_t>(s)] - A.lo_d(s)) / A.side_d(s);

    for (int sweep = 0; sweep < 40; ++sweep) {
        double improved = 0.0;
        for (int axis = 0; axis < d; ++axis) {
            // collapse all axes except `axis` at the current point
            std::vector<double> t = mono;
            std::vector<int> sz = sizes;
            for (int s = 0, removed = 0; s < d; ++s) {
                if (s == axis) continue;
                int pos = s - removed;
                // fold tensor axis `pos` at the current coordinate of original axis s
                std::size_t inner = 1, outer = 1;
                for (std::size_t q = static_cast<std::size_t>(pos) + 1; q < sz.size(); ++q) inner *= static_cast<std::size_t>(sz[q]);
                for (int q = 0; q < pos; ++q) outer *= static_cast<std::size_t>(sz[static_cast<std::size_t>(q)]);
                std::vector<double> nt(outer * inner, 0.0);
                double tp = 1.0;
                for (int k = 0; k < sz[static_cast<std::size_t>(pos)]; ++k) {
                    for (std::size_t o = 0; o < outer; ++o) {
                        const double* src = t.data() + (o * static_cast<std::size_t>(sz[static_cast<std::size_t>(pos)]) + static_cast<std::size_t>(k)) * inner;
                        double* dst = nt.data() + o * inner;
                        for (std::size_t i = 0; i < inner; ++i) dst[i] += tp * src[i];
                    }
                    tp *= ux[static_cast<std::size_t>(s)];
                }
                t = std::move(nt);
                sz.erase(sz.begin() + pos);
                ++removed;
            }
            // t now holds 1D monomial coefficients along `axis`
            std::vector<double> deriv;
            for (std::size_t k = 1; k < t.size(); ++k) deriv.push_back(static_cast<double>(k) * t[k]);
            std::vector<double> cand = deriv.empty() ? std::vector<double>{} : poly_real_roots(deriv, 0.0, 1.0);
            cand.push_back(0.0);
            cand.push_back(1.0);
            cand.push_back(ux[static_cast<std::size_t>(axis)]);
            double loc_best = -1.0, loc_arg = ux[static_cast<std::size_t>(axis)];
            for (double c : cand) {
                double acc = 0.0;
                for (std::size_t k = t.size(); k-- > 0;) acc = acc * c + t[k];
                if (std::abs(acc) > loc_best) {
                    loc_best = std::abs(acc);
                    loc_arg = c;
                }
            }
            if (loc_best > best + 1e-14 * best) improved = std::max(improved, loc_best - best);
            if (loc_best > best) best = loc_best;
            ux[static_cast<std::size_t>(axis)] = loc_arg;
        }
        if (improved <= 1e-12 * best) break;
    }
    return best;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd gram_matrix(const std::vector<Poly>& basis, const Rect& box) {
    const int n = static_cast<int>(basis.size());
    Eigen::MatrixXd G(n, n);
    // exact tensor Gauss rule for products
    const int d = basis.empty() ? 0 : basis[0].dim();
    std::vector<int> nodes(static_cast<std::size_t>(d), 1);
    for (const Poly& b : basis)
        for (int s = 0; s < d; ++s)
            nodes[static_cast<std::size_t>(s)] = std::max(nodes[static_cast<std::size_t>(s)], b.degree()[static_cast<std::size_t>(s)] + 1);
    std::vector<std::vector<double>> xs(static_cast<std::size_t>(d)), ws(static_cast<std::size_t>(d));
    std::size_t pts = 1;
    for (int s = 0; s < d; ++s) {
        const GaussRule& rule = gauss_legendre(nodes[static_cast<std::size_t>(s)]);
        const double mid = 0.5 * (box.lo_d(s) + box.hi_d(s)), half = 0.5 * box.side_d(s);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            xs[static_cast<std::size_t>(s)].push_back(mid + half * rule.nodes[i]);
            ws[static_cast<std::size_t>(s)].push_back(rule.weights[i] * half);
        }
        pts *= rule.nodes.size();
    }
    std::vector<std::vector<double>> vals(basis.size(), std::vector<double>(pts));
    std::vector<double> wt(pts, 1.0);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t q = 0; q < pts; ++q) {
        double w = 1.0;
        for (int s = 0; s < d; ++s) {
            x[static_cast<std::size_t>(s)] = xs[static_cast<std::size_t>(s)][static_cast<std::size_t>(idx[static_cast<std::size_t>(s)])];
            w *= ws[static_cast<std::size_t>(s)][static_cast<std::size_t>(idx[static_cast<std::size_t>(s)])];
        }
        wt[q] = w;
        for (std::size_t b = 0; b < basis.size(); ++b) vals[b][q] = basis[b].eval(x);
        int s = d - 1;
        while (s >= 0) {
            if (++idx[static_cast<std::size_t>(s)] < static_cast<int>(xs[static_cast<std::size_t>(s)].size())) break;
            idx[static_cast<std::size_t>(s)] = 0;
            --s;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t q = 0; q < pts; ++q) acc += wt[q] * vals[static_cast<std::size_t>(i)][q] * vals[static_cast<std::size_t>(j)][q];
            G(i, j) = acc;
            G(j, i) = acc;
        }
    return G;
}

namespace {

Poly combine(const std::vector<Poly>& basis, const Eigen::VectorXd& c) {
    Poly out = basis[0];
    out *= c(0);
    for (int i = 1; i < static_cast<int>(basis.size()); ++i) {
        Poly t = basis[static_cast<std::size_t>(i)];
        t *= c(i);
        out += t;
    }
    return out;
}

/// Multi-start coordinate ascent of ratio(c) over the unit sphere.
double maximize_ratio(const std::function<double(const Eigen::VectorXd&)>& ratio, int dim,
                      std::uint64_t seed, int starts, double tol,
                      Eigen::VectorXd* arg_out = nullptr) {
    std::mt19937_64 rng = seeded_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = -1.0;
    Eigen::VectorXd best_c;
    std::vector<Eigen::VectorXd> inits;
    for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
        e(i) = 1.0;
        inits.push_back(e);
    }
    while (static_cast<int>(inits.size()) < starts) {
        Eigen::VectorXd c(dim);
        for (int i = 0; i < dim; ++i) c(i) = gauss(rng);
        c.normalize();
        inits.push_back(c);
    }
    for (Eigen::VectorXd c : inits) {
        double val = ratio(c);
        double step = 0.5;
        while (step > tol * 0.25) {
            bool improved = false;
            for (int i = 0; i < dim; ++i) {
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
            }
            if (!improved) step *= 0.5;
        }
        if (val > best) {
            best = val;
            best_c = c;
        }
    }
    if (arg_out) *arg_out = best_c;
    return best;
}

}  // namespace

double epsilon_A(const Filtration& f, const SpaceSpec& S, AtomId A) {
    if (S.is_constant()) return 1.0;
    AtomId parent = f.pp(A);
    const Rect& prect = f.atom(parent).rect;
    const Rect& arect = f.atom(A).rect;
    std::vector<Poly> basis = space_basis(S, prect);
    auto ratio = [&](const Eigen::VectorXd& c) {
        Poly u = combine(basis, c);
        double num = sup_norm(u, arect);
        double den = sup_norm(u, prect);
        return den > 0 ? num / den : 0.0;
    };
    return std::min(1.0, maximize_ratio(ratio, S.dim_space(), 7u, 32, 1e-6));
}

EpsilonReport epsilon_A_p(const Filtration& f, const SpaceSpec& S, AtomId A, double p) {
    EpsilonReport rep;
    AtomId parent = f.pp(A);
    if (S.is_constant()) {
        double ratio = to_double(f.measure_ratio(A, parent));
        rep.value = std::pow(ratio, 1.0 / p);
        rep.product_form = rep.value;
        rep.exact = true;
        return rep;
    }
    const Rect& prect = f.atom(parent).rect;
    const Rect& arect = f.atom(A).rect;
    std::vector<Poly> basis = space_basis(S, prect);
    double eps_sup = epsilon_A(f, S, A);
    rep.product_form = eps_sup * std::pow(to_double(f.measure_ratio(A, parent)), 1.0 / p);
    if (p == 2.0) {
        Eigen::MatrixXd GA = gram_matrix(basis, arect);
        Eigen::MatrixXd GP = gram_matrix(basis, prect);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(GA, GP);
        rep.value = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
        rep.exact = true;
        return rep;
    }
    auto ratio = [&](const Eigen::VectorXd& c) {
        Poly u = combine(basis, c);
        double num = lp_norm_box(u, arect, p);
        double den = lp_norm_box(u, prect, p);
        return den > 0 ? num / den : 0.0;
    };
    rep.value = maximize_ratio(ratio, S.dim_space(), 11u, 32, 1e-6);
    return rep;
}

double u_of(const Filtration& f, const SpaceSpec& S, AtomId A, double p, double c2) {
    const double lambda = 1.0 - c2 / 2.0;
    if (f.in_A_lambda(A, lambda)) return 1.0;
    return epsilon_A_p(f, S, f.buddy(A), p).value;
}

double level_set_fraction(const Poly& u, const Rect& A, double level, int grid) {
    const int d = u.dim();
    if (d == 1) {
        Poly local = u.restrict_to(A);
        std::vector<double> mono = local.local_monomial();
        std::vector<double> shifted = mono;
        // roots of u - level and u + level in local coordinates
        std::vector<double> cuts{0.0, 1.0};
        shifted[0] = mono[0] - level;
        for (double r : poly_real_roots(shifted, 0.0, 1.0)) cuts.push_back(r);
        shifted[0] = mono[0] + level;
        for (double r : poly_real_roots(shifted, 0.0, 1.0)) cuts.push_back(r);
        std::sort(cuts.begin(), cuts.end());
        double frac = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double mid = 0.5 * (cuts[i] + cuts[i + 1]);
            double acc = 0.0;
            for (std::size_t k = mono.size(); k-- > 0;) acc = acc * mid + mono[k];
            if (std::abs(acc) >= level) frac += cuts[i + 1] - cuts[i];
        }
        return frac;
    }
    long hits = 0, total = 0;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    while (true) {
        for (int s = 0; s < d; ++s)
            x[static_cast<std::size_t>(s)] = A.lo_d(s) + (idx[static_cast<std::size_t>(s)] + 0.5) / grid * A.side_d(s);
        ++total;
        if (std::abs(u.eval(x)) >= level) ++hits;
        int s = d - 1;
        while (s >= 0) {
            if (++idx[static_cast<std::size_t>(s)] < grid) break;
            idx[static_cast<std::size_t>(s)] = 0;
            --s;
        }
        if (s < 0) break;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

StabilityConstants estimate_stability(const Filtration& f, const SpaceSpec& S,
                                      const std::vector<AtomId>& atoms, std::uint64_t seed,
                                      int functions_per_atom) {
    StabilityConstants out;
    if (S.is_constant()) {
        out.c1 = 1.0;
        out.c2 = 1.0;
        out.exact = true;
        return out;
    }
    if (atoms.empty()) throw InvalidArgument("estimate_stability: no atoms sampled");
    std::mt19937_64 rng = seeded_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int m = S.dim_space();
    std::vector<double> c1_grid;
    for (int k = 1; k <= 19; ++k) c1_grid.push_back(0.05 * k);
    std::vector<double> c2_of(c1_grid.size(), 1.0);
    long fsamples = 0;
    for (AtomId id : atoms) {
        const Rect& arect = f.atom(id).rect;
        std::vector<Poly> basis = space_basis(S, arect);
        for (int t = 0; t < functions_per_atom; ++t) {
            Eigen::VectorXd c(m);
            if (t < m) {
                c.setZero();
                c(t) = 1.0;
            } else {
                for (int i = 0; i < m; ++i) c(i) = gauss(rng);
            }
            if (c.norm() == 0) continue;
            c.normalize();
            Poly u = combine(basis, c);
            double s = sup_norm(u, arect);
            if (s <= 0) continue;
            ++fsamples;
            for (std::size_t k = 0; k < c1_grid.size(); ++k) {
                double frac = level_set_fraction(u, arect, c1_grid[k] * s);
                c2_of[k] = std::min(c2_of[k], frac);
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t k = 0; k < c1_grid.size(); ++k)
        if (c2_of[k] > c2_of[best]) best = k;
    out.c1 = c1_grid[best];
    out.c2 = c2_of[best];
    out.exact = false;
    out.tolerance = 1e-3;
    out.function_samples = fsamples;
    out.atom_samples = static_cast<long>(atoms.size());
    if (out.c2 <= 0) throw NumericalError("estimate_stability: degenerate space, no positive c2");
    return out;
}

}  // namespace binfilt
