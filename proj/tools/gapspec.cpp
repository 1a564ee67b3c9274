#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gapspec/error.hpp"
#include "gapspec/io.hpp"
#include "gapspec/ltverify.hpp"
#include "gapspec/potential.hpp"
#include "gapspec/suites.hpp"

using namespace gapspec;
using io::json;

namespace {

struct Config {
    std::string kind = "finite", eps, set_path, measure_path, coeffs_path, perturb_path, gamma = "midpoint", ineq,
                output, suite;
    std::vector<double> outer{-2.0, 2.0}, bands, xs, interval;
    std::string grid;  // lo:hi:n
    std::size_t n = 800;
    double p = 0.75, tol = 1e-4;
    std::uint64_t seed = 7;
    bool csv = false, intro_exponent = false, want_json = false, timing = false;
};

void emit(const Config& cfg, const std::string& text) {
    if (cfg.output.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + cfg.output);
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

GapSet load_set(const Config& cfg) {
    if (!cfg.set_path.empty()) return io::gapset_from_json(io::read_json_file(cfg.set_path));
    if (!cfg.measure_path.empty()) return io::measure_from_json(io::read_json_file(cfg.measure_path)).set();
    throw ValidationError("--set is required");
}

ReflectionlessMeasure load_measure(const Config& cfg) {
    if (!cfg.measure_path.empty()) return io::measure_from_json(io::read_json_file(cfg.measure_path));
    json j;
    j["set"] = io::to_json(load_set(cfg));
    j["gamma"] = cfg.gamma;
    return io::measure_from_json(j);
}

JacobiCoeffs load_coeffs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return io::read_coeffs_csv(in);
}

Perturbation load_perturbation(const Config& cfg) {
    if (cfg.perturb_path.empty()) return {};
    std::ifstream in(cfg.perturb_path);
    if (!in) throw ValidationError("cannot open " + cfg.perturb_path);
    return io::read_perturbation_csv(in);
}

// J' with at least `sites` rows: from --coeffs, else the arcsine law on a
// single interval, else the recurrence of the chosen reflectionless measure.
JacobiCoeffs background(const Config& cfg, const GapSet& set, std::size_t sites) {
    if (!cfg.coeffs_path.empty()) return load_coeffs(cfg.coeffs_path);
    if (set.gap_count() == 0) return arcsine_coefficients({set.lo(), set.hi()}, sites);
    return stieltjes_coefficients(load_measure(cfg), sites);
}

int cmd_set(const Config& cfg) {
    GapSet set = GapSet::finite({{-2.0, 2.0}});
    if (cfg.outer.size() != 2) throw ValidationError("--outer takes two numbers");
    const Interval outer{cfg.outer[0], cfg.outer[1]};
    if (cfg.kind == "finite") {
        std::vector<Interval> bands;
        if (cfg.bands.empty()) bands.push_back(outer);
        if (cfg.bands.size() % 2 != 0) throw ValidationError("--bands takes pairs lo hi");
        for (std::size_t i = 0; i + 1 < cfg.bands.size(); i += 2) bands.push_back({cfg.bands[i], cfg.bands[i + 1]});
        set = GapSet::finite(std::move(bands));
    } else {
        const auto eps = cfg.eps.empty() ? std::vector<double>{} : io::parse_eps(cfg.eps);
        if (cfg.kind == "infinite_band")
            set = GapSet::infinite_band(eps, outer);
        else if (cfg.kind == "cantor")
            set = GapSet::cantor(eps, outer);
        else
            throw ValidationError("--kind must be finite, infinite_band or cantor");
    }
    json j = io::to_json(set);
    j["measure"] = set.measure();
    emit(cfg, dump(j));
    return 0;
}

int cmd_measure(const Config& cfg) {
    const ReflectionlessMeasure mu = load_measure(cfg);
    json j = io::to_json(mu);
    j["total_mass"] = total_mass(mu);
    json pts = json::array();
    for (double x : cfg.xs) {
        json e{{"x", x}};
        if (mu.set().contains(x))
            e["density"] = density(mu, x);
        else
            e["m"] = m_real(mu, x);
        pts.push_back(e);
    }
    if (!cfg.xs.empty()) j["points"] = pts;
    emit(cfg, dump(j));
    return 0;
}

int cmd_equilibrium(const Config& cfg) {
    const GreenFunction g(solve_equilibrium(load_set(cfg)));
    const auto& eq = g.equilibrium();
    json j = io::to_json(eq.measure);
    j["method"] = eq.method;
    j["iterations"] = eq.iterations;
    j["residuals"] = eq.residuals;
    j["robin_constant"] = g.robin_constant();
    j["capacity"] = g.capacity();
    j["anchor_spread"] = g.anchor_spread();
    emit(cfg, dump(j));
    return 0;
}

std::vector<double> grid_points(const Config& cfg) {
    std::vector<double> xs = cfg.xs;
    if (cfg.grid.empty()) return xs;
    double lo = 0.0, hi = 0.0;
    std::size_t n = 0;
    char extra = 0;
    if (std::sscanf(cfg.grid.c_str(), "%lf:%lf:%zu%c", &lo, &hi, &n, &extra) != 3 || n < 1)
        throw ValidationError("--grid expects lo:hi:n");
    for (std::size_t i = 0; i < n; ++i)
        xs.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return xs;
}

int cmd_green(const Config& cfg) {
    const GreenFunction g(solve_equilibrium(load_set(cfg)));
    const auto xs = grid_points(cfg);
    if (cfg.csv || !cfg.grid.empty()) {
        std::string out = "x,g\n";
        for (double x : xs) out += io::format_double(x) + ',' + io::format_double(g(x)) + '\n';
        emit(cfg, out);
        return 0;
    }
    json j{{"schema", io::kSchema}, {"capacity", g.capacity()}, {"robin_constant", g.robin_constant()}};
    j["values"] = json::array();
    for (double x : xs) j["values"].push_back({{"x", x}, {"g", g(x)}});
    emit(cfg, dump(j));
    return 0;
}

int cmd_coeffs(const Config& cfg) {
    const ReflectionlessMeasure mu = cfg.gamma == "equilibrium" ? solve_equilibrium(load_set(cfg)).measure : load_measure(cfg);
    emit(cfg, io::coeffs_csv(stieltjes_coefficients(mu, cfg.n)));
    return 0;
}

int cmd_spectrum(const Config& cfg) {
    const GapSet set = load_set(cfg);
    const JacobiCoeffs jp = background(cfg, set, 2 * cfg.n);
    const Perturbation d = load_perturbation(cfg);
    const PairedEigenvalues e = gap_eigenvalues_paired(perturbed(jp.section(std::min(jp.size(), 2 * cfg.n)), d), set, cfg.n, cfg.tol);
    if (cfg.csv) {
        std::string out = "lambda,lambda_2N,dist\n";
        for (std::size_t i = 0; i < e.values.size(); ++i)
            out += io::format_double(e.values[i]) + ',' + io::format_double(e.partner[i]) + ',' +
                   io::format_double(set.dist(e.values[i])) + '\n';
        emit(cfg, out);
        return 0;
    }
    json j{{"schema", io::kSchema}, {"N", cfg.n}, {"tol", cfg.tol}};
    j["eigenvalues"] = json::array();
    for (std::size_t i = 0; i < e.values.size(); ++i)
        j["eigenvalues"].push_back({{"lambda", e.values[i]}, {"lambda_2N", e.partner[i]}, {"dist", set.dist(e.values[i])}});
    emit(cfg, dump(j));
    return 0;
}

std::vector<BoundReport> run_verify(const Config& cfg) {
    std::vector<BoundReport> out;
    VerifyOptions vo;
    vo.n = cfg.n;
    vo.tol = cfg.tol;
    vo.seed = cfg.seed;
    const std::string& q = cfg.ineq;
    const Perturbation d = load_perturbation(cfg);

    if (q == "thm1" || q == "thm2" || q == "kato") {
        const GapSet set = load_set(cfg);
        const JacobiCoeffs jp = background(cfg, set, 2 * cfg.n);
        if (q == "kato") {
            out.push_back(verify_kato_bound(jp, d, set, vo));
            return out;
        }
        const GapConstants c = fit_gap_constants(set, ConstantSource::torus);
        const double p = cfg.intro_exponent && q == "thm2" ? cfg.p + 0.5 : cfg.p;
        out.push_back(q == "thm1" ? verify_trace_class_bound(jp, d, p, set, c.trace_class, vo)
                                  : verify_schatten_bound(jp, d, p, set, c.schatten, vo));
        return out;
    }
    if (q == "green") {
        if (!(cfg.p > 1.0)) throw ValidationError("the Green-function bound needs p > 1");
        const GreenFunction g(solve_equilibrium(load_set(cfg)));
        const JacobiCoeffs jp = cfg.coeffs_path.empty() ? stieltjes_coefficients(g.equilibrium().measure, 2 * cfg.n)
                                                        : load_coeffs(cfg.coeffs_path);
        out.push_back(verify_green_bound(jp, d, cfg.p, g, green_level_constants(g), vo));
        return out;
    }
    if (q == "bs") {
        if (cfg.coeffs_path.empty()) throw ValidationError("--coeffs is required for bs");
        if (cfg.interval.size() != 2) throw ValidationError("--interval takes two numbers");
        const auto r = birman_schwinger_check(load_coeffs(cfg.coeffs_path), d, cfg.interval[0], cfg.interval[1]);
        BoundReport b;
        b.name = "bs";
        b.lhs = static_cast<double>(r.count);
        b.rhs = r.bound;
        b.slack = 1e-10 / std::max(r.bound, 1e-300);
        b.seed = cfg.seed;
        finalize(b);
        out.push_back(b);
        return out;
    }
    if (q == "refl") {
        const ReflectionlessMeasure mu = load_measure(cfg);
        for (double x : cfg.xs) {
            const ReflEstimate e = refl_estimate_check(mu, x);
            BoundReport b;
            b.name = "refl";
            b.lhs = e.lhs;
            b.rhs = e.rhs;
            b.constant = e.ck;
            b.set_kind = to_string(mu.set().kind());
            b.seed = cfg.seed;
            b.note = "gap " + std::to_string(e.gap) + ", x = " + io::format_double(x);
            finalize(b);
            out.push_back(b);
        }
        return out;
    }
    if (q == "lemma") {
        const ReflectionlessMeasure mu = load_measure(cfg);
        for (double x : cfg.xs) {
            const CantorLemmaReport r = cantor_lemma_products(mu.set(), x, mu.gamma());
            auto add = [&](const char* name, double lhs, double rhs) {
                BoundReport b;
                b.name = name;
                b.lhs = lhs;
                b.rhs = rhs;
                b.slack = 1e-12;
                b.set_kind = "cantor";
                b.seed = cfg.seed;
                b.note = "level " + std::to_string(r.level) + ", x = " + io::format_double(x);
                finalize(b);
                out.push_back(b);
            };
            add("lemma_R", r.r_worst_ratio, 1.0);
            add("lemma_A", r.a_product, r.a_bound);
            add("lemma_Q", r.q, r.q_bound);
        }
        return out;
    }
    throw ValidationError("--ineq must be one of thm1, thm2, green, kato, bs, refl, lemma");
}

int cmd_verify(const Config& cfg) {
    const auto reports = run_verify(cfg);
    if (cfg.csv) {
        emit(cfg, io::reports_csv(reports));
    } else {
        json arr = json::array();
        for (const auto& r : reports) arr.push_back(io::to_json(r));
        emit(cfg, dump(arr));
    }
    for (const auto& r : reports)
        if (!r.pass) return 3;
    return 0;
}

int cmd_reproduce(const Config& cfg) {
    const auto& names = reproducible_suites();
    const auto& extra = auxiliary_checks();
    if (std::find(names.begin(), names.end(), cfg.suite) == names.end() &&
        std::find(extra.begin(), extra.end(), cfg.suite) == extra.end())
        throw ValidationError("unknown suite '" + cfg.suite + "'");
    SuiteOptions so;
    so.seed = cfg.seed;
    so.n = cfg.n;
    const SuiteResult s = run_suite(cfg.suite, so);
    if (cfg.want_json) {
        json j{{"suite", s.name}, {"title", s.title}, {"passed", s.passed}, {"total", s.total},
               {"worst_ratio", s.worst_ratio}, {"table", s.table}};
        if (cfg.timing) j["seconds"] = s.seconds;
        if (!s.reports.empty()) {
            j["reports"] = json::array();
            for (const auto& r : s.reports) j["reports"].push_back(io::to_json(r));
        }
        emit(cfg, dump(j));
    } else {
        std::string out = s.name + ": " + s.title + "\n";
        for (const auto& line : s.table) out += "  " + line + "\n";
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %zu/%zu pass, worst ratio %.4g", s.passed, s.total, s.worst_ratio);
        out += buf;
        if (cfg.timing) {
            std::snprintf(buf, sizeof buf, ", %.2f s", s.seconds);
            out += buf;
        }
        out += '\n';
        emit(cfg, out);
    }
    return s.pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gapspec: gap sets, reflectionless measures, Green functions and Lieb-Thirring checks"};
    app.require_subcommand(1);
    Config cfg;

    auto add_out = [&](CLI::App* c) { c->add_option("-o,--output", cfg.output, "write to a file instead of stdout"); };
    auto add_set = [&](CLI::App* c) {
        c->add_option("--set,set_file", cfg.set_path, "set descriptor (JSON)");
        c->add_option("--measure", cfg.measure_path, "measure descriptor (JSON)");
        c->add_option("--gamma", cfg.gamma, "alpha, beta or midpoint when no measure file is given");
    };

    auto* set = app.add_subcommand("set", "construct a gap set");
    set->add_option("--kind", cfg.kind)->check(CLI::IsMember({"finite", "infinite_band", "cantor"}));
    set->add_option("--outer", cfg.outer)->expected(2);
    set->add_option("--eps", cfg.eps, "geometric:r:K, harmonic:K or list:v1,v2,...");
    set->add_option("--bands", cfg.bands, "band endpoints lo1 hi1 lo2 hi2 ...");
    add_out(set);

    auto* measure = app.add_subcommand("measure", "reflectionless measure summary");
    add_set(measure);
    measure->add_option("-x,--x,--at", cfg.xs, "points for m(x) or the density");
    add_out(measure);

    auto* eq = app.add_subcommand("equilibrium", "equilibrium measure, Robin constant and capacity");
    add_set(eq);
    add_out(eq);

    auto* green = app.add_subcommand("green", "Green function values");
    add_set(green);
    green->add_option("-x,--x", cfg.xs);
    green->add_option("--grid", cfg.grid, "lo:hi:n, emits CSV");
    green->add_flag("--csv", cfg.csv);
    add_out(green);

    auto* coeffs = app.add_subcommand("coeffs", "recurrence coefficients (CSV); --gamma equilibrium uses the equilibrium measure");
    add_set(coeffs);
    coeffs->add_option("-N,--n", cfg.n)->check(CLI::Range(1, 1 << 20));
    add_out(coeffs);

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of J' + dJ off the set");
    add_set(spectrum);
    spectrum->add_option("--coeffs", cfg.coeffs_path);
    spectrum->add_option("--perturb", cfg.perturb_path);
    spectrum->add_option("-N,--n", cfg.n)->check(CLI::Range(16, 1 << 20));
    spectrum->add_option("--tol", cfg.tol);
    spectrum->add_flag("--csv", cfg.csv);
    add_out(spectrum);

    auto* verify = app.add_subcommand("verify", "check one inequality; emits BoundReport JSON");
    verify->add_option("--ineq", cfg.ineq)->required()->check(CLI::IsMember({"thm1", "thm2", "green", "kato", "bs", "refl", "lemma"}));
    add_set(verify);
    verify->add_option("--coeffs", cfg.coeffs_path);
    verify->add_option("--perturb", cfg.perturb_path);
    verify->add_option("-p", cfg.p);
    verify->add_option("-N,--n", cfg.n)->check(CLI::Range(16, 1 << 20));
    verify->add_option("--seed", cfg.seed);
    verify->add_option("--tol", cfg.tol, "eigenvalues closer than this to the set are ignored");
    verify->add_option("-x,--x", cfg.xs, "points for refl and lemma");
    verify->add_option("--interval", cfg.interval, "gamma_minus gamma_plus for bs")->expected(2);
    verify->add_flag("--intro-exponent", cfg.intro_exponent,
                     "thm2: read -p as the eigenvalue power, so the perturbation power is p + 1/2");
    verify->add_flag("--csv", cfg.csv);
    add_out(verify);

    auto* reproduce = app.add_subcommand("reproduce", "run a verification suite with pinned seeds");
    reproduce->add_option("suite", cfg.suite)->required();
    reproduce->add_option("--seed", cfg.seed);
    reproduce->add_option("-N,--n", cfg.n)->check(CLI::Range(16, 1 << 20));
    reproduce->add_flag("--json", cfg.want_json);
    reproduce->add_flag("--timing", cfg.timing, "include wall-clock run time (output is then not reproducible)");
    add_out(reproduce);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*set) return cmd_set(cfg);
        if (*measure) return cmd_measure(cfg);
        if (*eq) return cmd_equilibrium(cfg);
        if (*green) return cmd_green(cfg);
        if (*coeffs) return cmd_coeffs(cfg);
        if (*spectrum) return cmd_spectrum(cfg);
        if (*verify) return cmd_verify(cfg);
        if (*reproduce) return cmd_reproduce(cfg);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 1;
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy error: " << e.what() << " (best estimate " << e.best_estimate() << ", error bound "
                  << e.error_bound() << ")\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
