#include "binfilt/approx.hpp"
#include "binfilt/bernstein_test.hpp"
#include "binfilt/conditions.hpp"
#include "binfilt/generators.hpp"
#include "binfilt/hermite.hpp"
#include "binfilt/io.hpp"
#include "binfilt/util.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace binfilt;

namespace {

Rational rational_from_obj(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) return parse_rational(obj.cast<std::string>());
    return Rational(obj.cast<double>());
}

SpaceSpec space_from_str(const std::string& text, int dim) { return SpaceSpec::parse(text, dim); }

LeafFunction make_target(const Filtration& f, const SpaceSpec& S, const std::string& kind,
                         std::uint64_t seed) {
    LeafFunction g(f);
    if (kind == "x") {
        std::vector<int> deg(static_cast<std::size_t>(f.dim()), 0);
        deg[0] = 1;
        g.add_on_atom(0, Poly(f.atom(0).rect, deg, {0.0, 1.0}));
        return g;
    }
    if (kind == "random") {
        std::mt19937_64 rng = seeded_rng(seed, 17);
        std::normal_distribution<double> gauss;
        for (AtomId leaf : f.leaves()) {
            std::vector<Poly> basis = space_basis(S, f.atom(leaf).rect);
            Poly q = basis[0];
            q *= gauss(rng);
            for (std::size_t i = 1; i < basis.size(); ++i) {
                Poly t = basis[i];
                t *= gauss(rng);
                q += t;
            }
            g.add_on_atom(leaf, q);
        }
        return g;
    }
    throw InvalidArgument("unknown target '" + kind + "'");
}

py::dict report_dict(const ConditionReport& rep) {
    py::dict d;
    d["condition"] = rep.condition;
    d["strategy"] = rep.strategy;
    d["max_ratio"] = rep.max_ratio;
    d["witness_chain"] = rep.witness_chain.atoms;
    d["chains_evaluated"] = rep.chains_evaluated;
    d["empty"] = rep.empty;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Binary filtrations, local orthonormal systems and Bernstein-inequality "
              "diagnostics for n-term approximation.";
    m.attr("__version__") = BINFILT_VERSION;

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<Filtration>(m, "Filtration")
        .def_static("unit_cube", &Filtration::unit_cube, py::arg("dim"))
        .def_static("abstract_root", &Filtration::abstract_root)
        .def_static("from_json", [](const std::string& text) {
            return Filtration::from_json(nlohmann::json::parse(text));
        })
        .def("to_json", [](const Filtration& f) { return f.to_json().dump(2); })
        .def_property_readonly("dim", &Filtration::dim)
        .def_property_readonly("atom_count", &Filtration::atom_count)
        .def_property_readonly("split_count", &Filtration::split_count)
        .def_property_readonly("max_depth", &Filtration::max_depth)
        .def("apply_split",
             [](Filtration& f, AtomId atom, int axis, const py::object& cut) {
                 return f.apply_split(atom, axis, rational_from_obj(cut));
             },
             py::arg("atom"), py::arg("axis"), py::arg("cut"),
             "Split a leaf along an axis (0-based) at an interior coordinate; the "
             "cut may be a float or an exact string like '1/3'.")
        .def("apply_split_fraction",
             [](Filtration& f, AtomId atom, const py::object& t) {
                 return f.apply_split_fraction(atom, rational_from_obj(t));
             },
             py::arg("atom"), py::arg("fraction"))
        .def("leaves", &Filtration::leaves)
        .def("measure", [](const Filtration& f, AtomId id) { return f.atom(id).measure_d; })
        .def("depth", [](const Filtration& f, AtomId id) { return f.atom(id).depth; })
        .def("parent", [](const Filtration& f, AtomId id) { return f.atom(id).parent; })
        .def("children",
             [](const Filtration& f, AtomId id) {
                 const Atom& a = f.atom(id);
                 return a.is_leaf() ? py::make_tuple() : py::make_tuple(a.small_child, a.large_child);
             })
        .def("buddy", &Filtration::buddy)
        .def("chain_of", [](const Filtration& f, AtomId id) { return f.chain_of(id).atoms; })
        .def("save", [](const Filtration& f, const std::string& path) { save_filtration(path, f); })
        .def_static("load", &load_filtration);

    m.def("dyadic_filtration", &dyadic_filtration, py::arg("dim"), py::arg("levels"));
    m.def("random_filtration", &random_filtration, py::arg("seed"), py::arg("dim"),
          py::arg("n_splits"), py::arg("max_depth"));
    m.def("regular_filtration",
          [](int levels, const py::object& t) { return regular_filtration(levels, rational_from_obj(t)); },
          py::arg("levels"), py::arg("fraction"));

    m.def("enumerate_fat_chains",
          [](const Filtration& f, double rho, int min_len) {
              std::vector<std::vector<AtomId>> out;
              for (const Chain& c : enumerate_fat_chains(f, rho, min_len)) out.push_back(c.atoms);
              return out;
          },
          py::arg("filtration"), py::arg("rho"), py::arg("min_len") = 2);
    m.def("decompose_fat",
          [](const Filtration& f, const std::vector<AtomId>& atoms, double rho) {
              std::vector<std::vector<AtomId>> out;
              for (const Chain& c : decompose_fat(f, Chain{atoms}, rho)) out.push_back(c.atoms);
              return out;
          });

    m.def("haar_values",
          [](double measure_small, double measure_large) {
              auto [a, b] = haar_explicit_values(measure_small, measure_large);
              return py::make_tuple(a, b);
          },
          "Values of the explicit generalized Haar function on the two children.");

    m.def("w1_report",
          [](const Filtration& f, const std::string& space, double p, double tau, double rho) {
              SpaceSpec S = space_from_str(space, f.dim());
              ConditionParams prm;
              prm.p = p;
              prm.tau = tau;
              prm.rho = rho;
              double c2 = S.is_constant() ? 1.0 : estimate_stability(f, S, f.leaves(), 1, 32).c2;
              return report_dict(w1_report(f, S, prm, c2));
          },
          py::arg("filtration"), py::arg("space"), py::arg("p") = 2.0, py::arg("tau") = 1.0,
          py::arg("rho") = 0.75);
    m.def("w2s_report",
          [](const Filtration& f, const std::string& space, double p, double tau, double rho,
             const std::string& strategy) {
              SpaceSpec S = space_from_str(space, f.dim());
              ConditionParams prm;
              prm.p = p;
              prm.tau = tau;
              prm.rho = rho;
              W2sStrategy st = W2sStrategy::Auto;
              if (strategy == "closed-form") st = W2sStrategy::ClosedForm;
              else if (strategy == "bernstein") st = W2sStrategy::BernsteinReduction;
              else if (strategy == "span") st = W2sStrategy::SpanReduction;
              else if (strategy == "direct") st = W2sStrategy::Direct;
              else if (strategy != "auto") throw InvalidArgument("unknown strategy " + strategy);
              return report_dict(w2s_report(f, S, prm, st));
          },
          py::arg("filtration"), py::arg("space"), py::arg("p") = 2.0, py::arg("tau") = 1.0,
          py::arg("rho") = 0.75, py::arg("strategy") = "auto");
    m.def("w2_report",
          [](const Filtration& f, const std::string& space, double p, double tau, double rho) {
              SpaceSpec S = space_from_str(space, f.dim());
              ConditionParams prm;
              prm.p = p;
              prm.tau = tau;
              prm.rho = rho;
              return report_dict(w2_report(f, S, prm));
          },
          py::arg("filtration"), py::arg("space"), py::arg("p") = 2.0, py::arg("tau") = 1.0,
          py::arg("rho") = 0.75);

    m.def("special_1d_scan",
          [](const Filtration& f, const std::vector<AtomId>& chain, double p, double tau, int r) {
              SubchainScan s = scan_special_subchains(f, Chain{chain}, p, tau, {r});
              py::dict d;
              d["max_ratio"] = s.max_ratio;
              d["j0"] = s.j0;
              d["j1"] = s.j1;
              d["subchains"] = s.subchains;
              return d;
          });

    m.def("estimate_bi",
          [](const Filtration& f, const std::string& space, double p, double tau, int n,
             long budget, std::uint64_t seed, int depth_cap) {
              SpaceSpec S = space_from_str(space, f.dim());
              SystemPhi sys = build_system(f, S, p);
              BiParams prm;
              prm.tau = tau;
              prm.budget = budget;
              prm.seed = seed;
              prm.depth_cap = depth_cap;
              py::dict d;
              d["atoms"] = bi_atoms_constant(sys, prm).constant_estimate;
              d["rings"] = bi_rings_constant(sys, prm).constant_estimate;
              if (n > 1) {
                  BiReport bn = bi_constant(sys, n, prm);
                  d["n_term"] = bn.constant_estimate;
                  d["search_limited"] = bn.search_limited;
              }
              return d;
          },
          py::arg("filtration"), py::arg("space"), py::arg("p") = 2.0, py::arg("tau") = 1.0,
          py::arg("n") = 1, py::arg("budget") = 1000, py::arg("seed") = 1,
          py::arg("depth_cap") = 14);

    m.def("greedy_errors",
          [](const Filtration& f, const std::string& space, double p, const std::string& target,
             int terms, std::uint64_t seed) {
              SpaceSpec S = space_from_str(space, f.dim());
              SystemPhi sys = build_system(f, S, p);
              LeafFunction g = make_target(f, S, target, seed);
              return en_curve_psi(g, sys, terms).errors;
          },
          py::arg("filtration"), py::arg("space"), py::arg("p") = 2.0, py::arg("target") = "x",
          py::arg("terms") = 32, py::arg("seed") = 1);
    m.def("dictionary_errors",
          [](const Filtration& f, const std::string& space, double p, const std::string& target,
             int terms, std::uint64_t seed) {
              SpaceSpec S = space_from_str(space, f.dim());
              LeafFunction g = make_target(f, S, target, seed);
              return en_curve_dictionary(g, f, S, p, terms).errors;
          },
          py::arg("filtration"), py::arg("space"), py::arg("p") = 2.0, py::arg("target") = "x",
          py::arg("terms") = 32, py::arg("seed") = 1);
    m.def("tau_norm", &tau_norm, py::arg("coefficients"), py::arg("tau"));

    m.def("lambda_sequence",
          [](double gamma, int n) {
              LambdaSequence l = lambda_sequence(gamma, n);
              py::dict d;
              d["values"] = l.values;
              if (l.has_exact()) {
                  std::vector<std::string> exact;
                  for (const Rational& r : l.exact) exact.push_back(rational_to_string(r));
                  d["exact"] = exact;
              }
              return d;
          },
          py::arg("gamma"), py::arg("n"));
    m.def("thm42_filtration",
          [](double tau0, double p, int i_max) {
              GeneratedFiltration g = thm42_filtration(tau0, p, i_max);
              std::vector<std::vector<AtomId>> chains;
              for (const Chain& c : g.designated_chains) chains.push_back(c.atoms);
              return py::make_tuple(std::move(g.filtration), chains);
          },
          py::arg("tau0"), py::arg("p"), py::arg("i_max"));
    m.def("example55_chain",
          [](int n, double p, double tau, int r, const py::object& rho) {
              GeneratedFiltration g = example55_chain(n, p, tau, r, rational_from_obj(rho));
              return py::make_tuple(std::move(g.filtration), g.designated_chains[0].atoms);
          },
          py::arg("n"), py::arg("p"), py::arg("tau"), py::arg("r"), py::arg("rho"));

    m.def("choose_j", &choose_j, py::arg("r_minus"), py::arg("r_plus"), py::arg("m"), py::arg("p"));
    m.def("hermite_norms",
          [](double r_minus, double r_plus, double p, int r) {
              ProjChain chain = build_U(r_minus, r_plus, p, r);
              std::vector<double> norms;
              for (int mm = 0; mm <= r; ++mm)
                  norms.push_back(op_norm_on_ring(chain.U[static_cast<std::size_t>(mm)], r, r_minus,
                                                  r_plus, p));
              return norms;
          },
          py::arg("r_minus"), py::arg("r_plus"), py::arg("p"), py::arg("r"));
}
