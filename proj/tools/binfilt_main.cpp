#include "binfilt/approx.hpp"
#include "binfilt/bernstein_test.hpp"
#include "binfilt/conditions.hpp"
#include "binfilt/generators.hpp"
#include "binfilt/hermite.hpp"
#include "binfilt/io.hpp"
#include "binfilt/util.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

using namespace binfilt;
namespace fs = std::filesystem;

namespace {

#ifndef BINFILT_VERSION
#define BINFILT_VERSION "dev"
#endif

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    double p = 2.0;
    double tau = 1.0;
    double rho = 0.75;
    std::string space = "constant";
    int depth = 10;
    long budget = 2000;
    bool plot = false;
    std::string filtration_file;
    std::string dyadic;   // "DEPTH" or "DIM:DEPTH"
    int random_splits = 0;
    int dim = 1;

    nlohmann::json resolved;  // full parameter set, hashed into every report
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file; flags override config keys");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "RNG seed (outputs are byte-identical per seed+config)");
    cmd->add_option("--p", o.p, "Lebesgue exponent, 1 < p < inf");
    cmd->add_option("--tau", o.tau, "summation exponent, 0 < tau < p");
    cmd->add_option("--rho", o.rho, "chain fatness parameter in (0,1)");
    cmd->add_option("--space", o.space, "constant | tensor:r1,..,rd | total:r | span:m1;m2;..");
    cmd->add_option("--depth", o.depth, "depth cap / generated depth");
    cmd->add_option("--budget", o.budget, "search budget (objective evaluations)");
    cmd->add_flag("--plot", o.plot, "emit SVG plots");
    cmd->add_option("--filtration", o.filtration_file, "filtration JSON file to load");
    cmd->add_option("--dyadic", o.dyadic, "build a dyadic filtration: DEPTH or DIM:DEPTH");
    cmd->add_option("--random", o.random_splits, "build a random filtration with this many splits");
    cmd->add_option("--dim", o.dim, "dimension for generated filtrations");
}

/// Applies config-file values for options the user did not pass on the
/// command line, then freezes the resolved parameter set.
void resolve(CLI::App* cmd, CommonOpts& o) {
    if (!o.config_path.empty()) {
        nlohmann::json cfg;
        try {
            cfg = nlohmann::json::parse(read_file(o.config_path));
        } catch (const std::exception& e) {
            throw InvalidArgument(std::string("malformed config: ") + e.what());
        }
        auto maybe = [&](const char* key, auto& slot) {
            std::string flag = std::string("--") + key;
            if (cfg.contains(key) && cmd->count(flag) == 0) {
                try {
                    slot = cfg.at(key).get<std::decay_t<decltype(slot)>>();
                } catch (const std::exception&) {
                    throw InvalidArgument(std::string("malformed config: bad value for key '") +
                                          key + "'");
                }
            }
        };
        maybe("out", o.out_dir);
        maybe("seed", o.seed);
        maybe("p", o.p);
        maybe("tau", o.tau);
        maybe("rho", o.rho);
        maybe("space", o.space);
        maybe("depth", o.depth);
        maybe("budget", o.budget);
        maybe("plot", o.plot);
        maybe("filtration", o.filtration_file);
        maybe("dyadic", o.dyadic);
        maybe("random", o.random_splits);
        maybe("dim", o.dim);
        for (auto& [key, value] : cfg.items()) {
            static const char* known[] = {"out",    "seed",  "p",          "tau",   "rho",
                                          "space",  "depth", "budget",     "plot",  "filtration",
                                          "dyadic", "random", "dim"};
            bool ok = false;
            for (const char* k : known) ok |= key == k;
            if (!ok) throw InvalidArgument("malformed config: unknown key '" + key + "'");
        }
    }
    o.resolved = {{"command", cmd->get_name()}, {"seed", o.seed},   {"p", o.p},
                  {"tau", o.tau},               {"rho", o.rho},     {"space", o.space},
                  {"depth", o.depth},           {"budget", o.budget}, {"dim", o.dim},
                  {"filtration", o.filtration_file}, {"dyadic", o.dyadic},
                  {"random", o.random_splits}};
}

Filtration make_filtration(const CommonOpts& o) {
    if (!o.filtration_file.empty()) return load_filtration(o.filtration_file);
    if (!o.dyadic.empty()) {
        auto colon = o.dyadic.find(':');
        int dim = o.dim, depth;
        if (colon == std::string::npos) {
            depth = std::stoi(o.dyadic);
        } else {
            dim = std::stoi(o.dyadic.substr(0, colon));
            depth = std::stoi(o.dyadic.substr(colon + 1));
        }
        return dyadic_filtration(dim, depth);
    }
    if (o.random_splits > 0) return random_filtration(o.seed, o.dim, o.random_splits, o.depth);
    return Filtration::unit_cube(o.dim);
}

nlohmann::json base_summary(const CommonOpts& o) {
    return {{"version", BINFILT_VERSION}, {"config", o.resolved}, {"config_hash", json_hash(o.resolved)}};
}

void emit(const CommonOpts& o, const std::string& csv, nlohmann::json summary,
          const std::vector<std::pair<std::string, std::string>>& extra_files = {}) {
    fs::create_directories(o.out_dir);
    std::string head = "# binfilt " BINFILT_VERSION " config_hash " +
                       std::to_string(json_hash(o.resolved)) + "\n";
    write_file(o.out_dir + "/report.csv", head + csv);
    summary.update(base_summary(o));
    write_file(o.out_dir + "/summary.json", summary.dump(2) + "\n");
    for (const auto& [name, content] : extra_files) write_file(o.out_dir + "/" + name, content);
}

std::vector<std::string> chain_row(const ConditionReport& rep) {
    return {rep.condition,
            fmt_double(rep.p),
            fmt_double(rep.tau),
            fmt_double(rep.rho),
            rep.witness_chain.atoms.empty() ? "-1" : std::to_string(rep.witness_chain.top()),
            std::to_string(rep.witness_chain.length()),
            fmt_double(rep.max_ratio)};
}

nlohmann::json report_json(const ConditionReport& rep) {
    nlohmann::json j = {{"condition", rep.condition}, {"strategy", rep.strategy},
                        {"max_ratio", rep.max_ratio},  {"chains_evaluated", rep.chains_evaluated},
                        {"empty", rep.empty},          {"witness_chain", rep.witness_chain.atoms}};
    if (!rep.witness_coeffs.empty()) j["witness_coeffs"] = rep.witness_coeffs;
    return j;
}

int run_build(CommonOpts& o) {
    Filtration f = make_filtration(o);
    fs::create_directories(o.out_dir);
    save_filtration(o.out_dir + "/filtration.json", f);
    nlohmann::json summary = {{"atoms", f.atom_count()},
                              {"splits", f.split_count()},
                              {"max_depth", f.max_depth()},
                              {"mode", f.mode() == Mode::Geometric ? "geometric" : "abstract"}};
    std::vector<std::vector<std::string>> rows{{std::to_string(f.atom_count()),
                                                std::to_string(f.split_count()),
                                                std::to_string(f.max_depth())}};
    emit(o, to_csv({"atoms", "splits", "max_depth"}, rows), summary);
    std::cout << "filtration: " << f.atom_count() << " atoms, " << f.split_count() << " splits\n";
    return 0;
}

int run_check_conditions(CommonOpts& o, bool with_w2) {
    Filtration f = make_filtration(o);
    SpaceSpec S = SpaceSpec::parse(o.space, f.dim());
    ConditionParams prm;
    prm.p = o.p;
    prm.tau = o.tau;
    prm.rho = o.rho;
    prm.seed = o.seed;
    prm.max_subchains = o.budget;
    double c2 = S.is_constant() ? 1.0
                                : estimate_stability(f, S, f.leaves(), o.seed, 32).c2;

    ConditionReport w1 = w1_report(f, S, prm, c2);
    ConditionReport w2s = w2s_report(f, S, prm);
    std::vector<std::vector<std::string>> rows{chain_row(w1), chain_row(w2s)};
    nlohmann::json summary = {{"c2", c2},
                              {"w1", report_json(w1)},
                              {"w2s", report_json(w2s)},
                              {"rho_rescaled_bound_at_half",
                               rho_rescaled_bound(w2s.max_ratio, prm.rho, 0.5)}};
    if (with_w2) {
        ConditionReport w2 = w2_report(f, S, prm);
        rows.push_back(chain_row(w2));
        summary["w2"] = report_json(w2);
    }
    std::string csv =
        to_csv({"condition", "p", "tau", "rho", "chain_top_id", "chain_len", "ratio"}, rows);
    std::vector<std::pair<std::string, std::string>> extra;
    if (o.plot) {
        PlotSeries s;
        s.label = "ratio";
        for (std::size_t i = 0; i < rows.size(); ++i)
            s.points.push_back({static_cast<double>(i + 1), std::stod(rows[i].back())});
        extra.push_back({"conditions.svg", svg_line_chart("condition ratios", {s})});
    }
    emit(o, csv, summary, extra);
    for (const auto& r : rows) std::cout << r[0] << " ratio " << r.back() << "\n";
    return 0;
}

int run_estimate_bi(CommonOpts& o, int n) {
    Filtration f = make_filtration(o);
    SpaceSpec S = SpaceSpec::parse(o.space, f.dim());
    SystemPhi sys = build_system(f, S, o.p);
    BiParams prm;
    prm.tau = o.tau;
    prm.depth_cap = o.depth;
    prm.seed = o.seed;
    prm.budget = o.budget;
    if (!(o.tau > 0 && o.tau < o.p)) throw InvalidArgument("estimate-bi: requires 0 < tau < p");

    BiReport atoms = bi_atoms_constant(sys, prm);
    BiReport rings = bi_rings_constant(sys, prm);
    std::vector<std::vector<std::string>> rows{
        {"1-atoms", fmt_double(atoms.constant_estimate)},
        {"1-rings", fmt_double(rings.constant_estimate)}};
    nlohmann::json witness = nlohmann::json::array();
    BiReport best = atoms;
    if (n > 1) {
        BiReport bn = bi_constant(sys, n, prm);
        rows.push_back({std::to_string(n), fmt_double(bn.constant_estimate)});
        best = bn;
    }
    for (const auto& [poly, atom] : best.witness.terms)
        witness.push_back({{"atom", atom}, {"poly", poly.to_json()}});
    nlohmann::json summary = {{"n", n},
                              {"beta", 1.0 / o.tau - 1.0 / o.p},
                              {"atoms_constant", atoms.constant_estimate},
                              {"rings_constant", rings.constant_estimate},
                              {"constant_estimate", best.constant_estimate},
                              {"search_limited", best.search_limited},
                              {"evaluations", best.evaluations},
                              {"witness", witness}};
    emit(o, to_csv({"n", "constant"}, rows), summary);
    std::cout << "BI constants: atoms " << atoms.constant_estimate << ", rings "
              << rings.constant_estimate;
    if (n > 1) std::cout << ", n=" << n << " " << best.constant_estimate;
    std::cout << "\n";
    return 0;
}

int run_greedy(CommonOpts& o, const std::string& target, int terms) {
    Filtration f = make_filtration(o);
    SpaceSpec S = SpaceSpec::parse(o.space, f.dim());
    SystemPhi sys = build_system(f, S, o.p);

    LeafFunction g(f);
    if (target == "x") {
        std::vector<int> deg(static_cast<std::size_t>(f.dim()), 0);
        deg[0] = 1;
        std::vector<double> coeffs(2, 0.0);
        coeffs[1] = 1.0;
        g.add_on_atom(0, Poly(f.atom(0).rect, deg, coeffs));
    } else if (target == "random") {
        std::mt19937_64 rng = seeded_rng(o.seed, 17);
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
    } else {
        throw InvalidArgument("greedy: unknown target '" + target + "' (use x | random)");
    }

    ApproxCurve psi = en_curve_psi(g, sys, terms);
    ApproxCurve dict = en_curve_dictionary(g, f, S, o.p, terms);
    std::vector<std::vector<std::string>> rows;
    for (int n = 0; n <= terms; ++n) {
        rows.push_back({std::to_string(n), fmt_double(psi.errors[static_cast<std::size_t>(n)]),
                        psi.dictionary, psi.method});
        rows.push_back({std::to_string(n), fmt_double(dict.errors[static_cast<std::size_t>(n)]),
                        dict.dictionary, dict.method});
    }
    QuasinormResult qn = aspace_quasinorm(psi, 0.5, o.tau, g.lp(o.p));
    nlohmann::json summary = {{"target", target},
                              {"terms", terms},
                              {"psi_final_error", psi.errors.back()},
                              {"dict_final_error", dict.errors.back()},
                              {"quasinorm_alpha_half", qn.value},
                              {"quasinorm_truncation", qn.truncation_index},
                              {"quasinorm_tail_warning", qn.tail_warning}};
    std::vector<std::pair<std::string, std::string>> extra;
    if (o.plot) {
        PlotSeries a{"psi greedy", {}}, b{"C dp bound", {}};
        for (int k = 0; (1 << k) <= terms; ++k) {
            a.points.push_back({std::pow(2.0, k), psi.errors[static_cast<std::size_t>(1 << k)]});
            b.points.push_back({std::pow(2.0, k), dict.errors[static_cast<std::size_t>(1 << k)]});
        }
        extra.push_back({"greedy.svg", svg_line_chart("E_{2^k} vs n", {a, b}, true, true)});
    }
    emit(o, to_csv({"n", "error", "dictionary", "method"}, rows), summary, extra);
    std::cout << "greedy: E_" << terms << " = " << psi.errors.back() << "\n";
    return 0;
}

int run_reproduce(CommonOpts& o, const std::string& what, double gamma, int n, double tau0,
                  int imax, int r, const std::string& rho_text) {
    if (what == "lemma3.15") {
        std::vector<std::vector<std::string>> rows;
        for (int k = 0; k <= n; ++k) {
            LambdaSequence l = lambda_sequence(gamma, k);
            double sum = 0.0, sum_gamma = 0.0;
            for (double v : l.values) {
                sum += v;
                sum_gamma += std::pow(v, gamma);
            }
            rows.push_back({std::to_string(k), fmt_double(sum), fmt_double(sum_gamma)});
        }
        nlohmann::json summary = {{"gamma", gamma}, {"n", n}};
        std::vector<std::pair<std::string, std::string>> extra;
        if (o.plot) {
            PlotSeries s{"sum lambda^gamma", {}};
            for (const auto& row : rows)
                s.points.push_back({std::stod(row[0]) + 1.0, std::stod(row[2])});
            extra.push_back({"lambda.svg", svg_line_chart("diverging gamma-sums", {s})});
        }
        emit(o, to_csv({"n", "sum_lambda", "sum_lambda_gamma"}, rows), summary, extra);
        return 0;
    }
    if (what == "thm4.2") {
        GeneratedFiltration gen = thm42_filtration(tau0, o.p, imax);
        fs::create_directories(o.out_dir);
        save_filtration(o.out_dir + "/filtration.json", gen.filtration);
        nlohmann::json manifest = nlohmann::json::array();
        for (const Chain& c : gen.designated_chains) manifest.push_back(c.atoms);
        std::vector<std::vector<std::string>> rows;
        const double tau_mid = (tau0 + o.p) / 2;
        for (int i = 1; i <= imax; ++i) {
            const Chain& c = gen.designated_chains[static_cast<std::size_t>(i - 1)];
            double at_tau0 =
                w2s_closed_form_ratio(gen.filtration, SpaceSpec::constant(1), c, o.p, tau0);
            double at_mid =
                w2s_closed_form_ratio(gen.filtration, SpaceSpec::constant(1), c, o.p, tau_mid);
            rows.push_back({std::to_string(i), fmt_double(at_tau0), fmt_double(at_mid)});
        }
        nlohmann::json summary = {{"tau0", tau0}, {"imax", imax}, {"designated_chains", manifest}};
        emit(o, to_csv({"i", "ratio_at_tau0", "ratio_at_mid_tau"}, rows), summary);
        return 0;
    }
    if (what == "ex5.5") {
        Rational rho = parse_rational(rho_text);
        std::vector<std::vector<std::string>> rows;
        for (int nn : {16, 32, 64, 128, 256}) {
            if (nn > n && n >= 16) break;
            GeneratedFiltration gen = example55_chain(nn, o.p, o.tau, r, rho);
            double at_r = scan_special_subchains(gen.filtration, gen.designated_chains[0], o.p,
                                                 o.tau, {r})
                              .max_ratio;
            double at_r1 = scan_special_subchains(gen.filtration, gen.designated_chains[0], o.p,
                                                  o.tau, {r + 1})
                               .max_ratio;
            rows.push_back({std::to_string(nn), fmt_double(at_r), fmt_double(at_r1)});
        }
        emit(o, to_csv({"n", "max_ratio_degree_r", "max_ratio_degree_r_plus_1"}, rows),
             {{"r", r}, {"rho", rho_text}});
        return 0;
    }
    if (what == "ex5.8") {
        Rational rho = parse_rational(rho_text);
        GeneratedFiltration gen =
            example58_partition(std::max(o.dim, 2), r, 0, 2, std::max(n, 8), o.p, o.tau, rho);
        fs::create_directories(o.out_dir);
        save_filtration(o.out_dir + "/filtration.json", gen.filtration);
        std::vector<std::vector<std::string>> rows;
        std::vector<int> rv(static_cast<std::size_t>(std::max(o.dim, 2)), 1);
        for (std::size_t c = 0; c < gen.designated_chains.size(); ++c) {
            rv[0] = r;
            double ok = scan_special_subchains(gen.filtration, gen.designated_chains[c], o.p,
                                               o.tau, rv)
                            .max_ratio;
            rv[0] = r + 1;
            double bad = scan_special_subchains(gen.filtration, gen.designated_chains[c], o.p,
                                                o.tau, rv)
                             .max_ratio;
            rows.push_back({std::to_string(c), fmt_double(ok), fmt_double(bad)});
        }
        emit(o, to_csv({"chain", "max_ratio_r", "max_ratio_r_plus_1"}, rows),
             {{"kappa", r}, {"chains", gen.designated_chains.size()}});
        return 0;
    }
    if (what == "hermite") {
        std::mt19937_64 rng = seeded_rng(o.seed);
        std::uniform_real_distribution<double> dec(1e-6, 0.45);
        std::vector<std::vector<std::string>> rows;
        for (int t = 0; t < std::max(n, 10); ++t) {
            double a = dec(rng), b = dec(rng);
            ProjChain chain = build_U(a, b, o.p, std::max(r, 1));
            for (int m = 0; m < chain.r; ++m) {
                double nr = op_norm_on_ring(chain.U[static_cast<std::size_t>(m)], chain.r, a, b, o.p);
                rows.push_back({std::to_string(t), std::to_string(m), fmt_double(a), fmt_double(b),
                                fmt_double(nr)});
            }
        }
        emit(o, to_csv({"ring", "m", "r_minus", "r_plus", "norm_on_ring"}, rows),
             {{"r", std::max(r, 1)}});
        return 0;
    }
    if (what == "haar") {
        std::mt19937_64 rng = seeded_rng(o.seed);
        std::uniform_real_distribution<double> unif(0.001, 0.5);
        SpaceSpec S = SpaceSpec::constant(1);
        std::vector<std::vector<std::string>> rows;
        double worst = 0.0;
        for (int t = 0; t < std::max(n, 100); ++t) {
            double frac = unif(rng);
            Filtration f = Filtration::unit_cube(1);
            f.apply_split(0, 0, Rational(frac));
            auto [hs, hl] = haar_explicit(f, 0);
            LocalFrame frame = build_frame(f, S, 1);
            double fs = frame.functions[0].first.coeffs()[0];
            double fl = frame.functions[0].second.coeffs()[0];
            double sign = fs * hs.coeffs()[0] > 0 ? 1.0 : -1.0;
            double diff = std::max(std::abs(fs - sign * hs.coeffs()[0]),
                                   std::abs(fl - sign * hl.coeffs()[0]));
            worst = std::max(worst, diff);
            rows.push_back({fmt_double(frac), fmt_double(diff)});
        }
        emit(o, to_csv({"fraction", "abs_difference"}, rows), {{"max_difference", worst}});
        std::cout << "max |closed form - frame| = " << worst << "\n";
        return 0;
    }
    throw InvalidArgument("reproduce: unknown family '" + what +
                          "' (lemma3.15 | thm4.2 | ex5.5 | ex5.8 | hermite | haar)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binfilt: n-term approximation experiments on binary filtrations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", BINFILT_VERSION);

    CommonOpts build_o, cond_o, bi_o, greedy_o, rep_o;

    CLI::App* build_cmd = app.add_subcommand("build", "build or load a filtration file");
    add_common(build_cmd, build_o);

    CLI::App* cond_cmd = app.add_subcommand("check-conditions", "evaluate w1 / w2 / w2*");
    add_common(cond_cmd, cond_o);
    bool with_w2 = false;
    cond_cmd->add_flag("--with-w2", with_w2, "also evaluate the projector condition w2");

    CLI::App* bi_cmd = app.add_subcommand("estimate-bi", "estimate Bernstein inequality constants");
    add_common(bi_cmd, bi_o);
    int bi_n = 1;
    bi_cmd->add_option("--n", bi_n, "term count for the randomized Sigma_n search");

    CLI::App* greedy_cmd = app.add_subcommand("greedy", "greedy n-term approximation curves");
    add_common(greedy_cmd, greedy_o);
    std::string target = "x";
    int terms = 32;
    greedy_cmd->add_option("--target", target, "x | random");
    greedy_cmd->add_option("--terms", terms, "curve length N");

    CLI::App* rep_cmd = app.add_subcommand("reproduce", "reproduce a named construction");
    add_common(rep_cmd, rep_o);
    std::string what;
    double gamma = 0.5, tau0 = 1.0;
    int rep_n = 12, imax = 8, rr = 1;
    std::string rho_text = "9/10";
    rep_cmd->add_option("family", what, "lemma3.15 | thm4.2 | ex5.5 | ex5.8 | hermite | haar")
        ->required();
    rep_cmd->add_option("--gamma", gamma, "gamma for lemma3.15");
    rep_cmd->add_option("--n", rep_n, "size parameter");
    rep_cmd->add_option("--tau0", tau0, "separating tau for thm4.2");
    rep_cmd->add_option("--imax", imax, "number of embedded chains for thm4.2");
    rep_cmd->add_option("--r", rr, "polynomial degree");
    rep_cmd->add_option("--rho-exact", rho_text, "fatness parameter as an exact rational string");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build_cmd->parsed()) {
            resolve(build_cmd, build_o);
            return run_build(build_o);
        }
        if (cond_cmd->parsed()) {
            resolve(cond_cmd, cond_o);
            return run_check_conditions(cond_o, with_w2);
        }
        if (bi_cmd->parsed()) {
            resolve(bi_cmd, bi_o);
            return run_estimate_bi(bi_o, bi_n);
        }
        if (greedy_cmd->parsed()) {
            resolve(greedy_cmd, greedy_o);
            return run_greedy(greedy_o, target, terms);
        }
        if (rep_cmd->parsed()) {
            resolve(rep_cmd, rep_o);
            return run_reproduce(rep_o, what, gamma, rep_n, tau0, imax, rr, rho_text);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
