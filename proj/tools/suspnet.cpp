// suspnet: build, solve and sweep disk networks; verify lubrication coefficients.
#include "suspnet/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace suspnet;
namespace fs = std::filesystem;

namespace {

struct Args {
    std::string command;
    std::string builtin, config;
    std::string out;
    double delta = 1e-3;
    double delta_min = 1e-4, delta_max = 1e-2;
    int points = 9;
    bool fit = false;
    double fit_min = 0, fit_max = 0;
    int jobs = 1;
    std::uint64_t seed = 1;
    int rings = 3, n = 1;
    double jitter = 0.1;
    double radius = 0, mu = 1.0;
    std::string quasidisk_velocity = "field";
    std::string table;
    bool dump_model = false;
    double tol_residual = 1e-10, tol_inconsistent = 1e-8, tol_coefficients = 0.01;
    double close_lo = 0.5, close_hi = 2.0;
};

double radius_for(const Args& a) {
    if (a.radius > 0) return a.radius;
    return a.builtin == "boundary-layer" ? 0.5 : 1.0;
}

// Scenario at gap delta from either a builtin or a config file.
Scenario make_scenario(const Args& a, double delta) {
    const double R = radius_for(a);
    Scenario sc;
    if (!a.config.empty()) {
        io::ConfigFile cf = io::load_config(a.config);
        sc.name = fs::path(a.config).stem().string();
        sc.net = build_network(cf.config, cf.domain, cf.delta_ref);
        sc.A = cf.A.value_or(BoundaryData{1.0, 0.0, 0.0});
        check_boundary_data(sc.A);
    } else if (a.builtin == "hexagonal") {
        sc = hexagonal_scenario(a.rings, R, delta, HexClosure::Periodic, a.mu);
    } else if (a.builtin == "hexagonal-walls") {
        sc = hexagonal_scenario(a.rings, R, delta, HexClosure::Walls, a.mu);
    } else if (a.builtin == "boundary-layer") {
        sc = gen_single_disk_boundary_layer(delta, R, a.mu).scenario;
    } else if (a.builtin == "pinning-strip") {
        sc = gen_pinning_strip(a.n, R, delta, a.mu);
    } else if (a.builtin == "jittered-hex") {
        const GeneratedConfig g = gen_jittered_hex(a.rings, R, delta, a.jitter, a.seed, a.mu);
        sc.name = "jittered-hex";
        sc.net = build_network(g.config, g.domain, delta);
        sc.A = g.A;
        require_close_packing(sc.net, a.close_lo, a.close_hi);
    } else if (a.builtin.empty()) {
        fail(ErrorKind::Config, "MissingScenario", "give --builtin or --config");
    } else {
        fail(ErrorKind::Config, "UnknownBuiltin", a.builtin);
    }
    if (a.quasidisk_velocity == "printed") sc.opt.quasidisk_velocity = QuasidiskVelocity::Printed;
    return sc;
}

SolveOptions solve_options(const Args& a) {
    SolveOptions s;
    s.tol_residual = a.tol_residual;
    s.tol_inconsistent = a.tol_inconsistent;
    return s;
}

std::string dump(const io::json& j) { return j.dump(2) + "\n"; }

void write(const Args& a, const std::string& name, const std::string& text) {
    io::write_text((fs::path(a.out) / name).string(), text);
}

int cmd_build(const Args& a) {
    const Scenario sc = make_scenario(a, a.delta);
    std::ostringstream csv;
    io::write_necks_csv(csv, sc.net);
    write(a, "necks.csv", csv.str());
    const ConstraintSystem cs = assemble_constraints(sc.net, sc.A, sc.opt);
    io::json j;
    j["scenario"] = sc.name;
    j["counts"] = {{"vertices", sc.net.vertices.size()},
                   {"interior", sc.net.n_interior},
                   {"edges", sc.net.edges.size()},
                   {"interior_edges", sc.net.interior_edge_count()},
                   {"faces", sc.net.faces.size()},
                   {"rank", cs.rank()}};
    const auto rep = validate_close_packing(sc.net, a.close_lo, a.close_hi);
    j["close_packing_violations"] = io::json::array();
    for (const auto& v : rep.violations)
        j["close_packing_violations"].push_back({{"edge", v.edge}, {"i", v.i}, {"j", v.j}, {"d", v.d}});
    if (!sc.net.notes.empty()) j["notes"] = sc.net.notes;
    write(a, "network.json", dump(j));
    return 0;
}

int cmd_solve(const Args& a) {
    const Scenario sc = make_scenario(a, a.delta);
    const QuadraticModel m = assemble_Q(sc.net, sc.net.mu, sc.A, sc.opt);
    const ConstraintSystem cs = assemble_constraints(sc.net, sc.A, sc.opt);
    SolveResult r = pinned_solve(m, cs, sc.net, sc.pins, solve_options(a));
    r.state = state_from_vector(sc.net, all_boundary_values(sc.net, sc.A, sc.opt.quasidisk_velocity), r.z);
    write(a, "result.json", dump(io::result_json(sc, m, cs, r)));
    std::ostringstream csv;
    io::write_necks_csv(csv, sc.net, &m, &r);
    write(a, "necks.csv", csv.str());
    if (a.dump_model) {
        std::ostringstream mc;
        io::write_model_csv(mc, sc.net, m);
        write(a, "model.csv", mc.str());
    }
    std::cout << "I_total " << io::num(r.I_total) << '\n';
    return 0;
}

ExponentFit default_fit(const SweepTable& t, const Args& a) {
    double lo = a.fit_min, hi = a.fit_max;
    if (hi <= 0) {
        // drop the largest decade unless that leaves too few points
        double dmax = 0;
        for (auto& r : t.rows) dmax = std::max(dmax, r.delta);
        hi = dmax / 10 * (1 + 1e-9);
        int inside = 0;
        for (auto& r : t.rows) inside += r.delta >= lo && r.delta <= hi;
        if (inside < 4) hi = dmax;
    }
    return fit_exponent(t, lo, hi);
}

int cmd_sweep(const Args& a) {
    if (!a.config.empty()) fail(ErrorKind::Config, "BadSweep", "sweeps need a builtin scenario");
    if (!(std::log10(a.delta_max / a.delta_min) >= 1.5 - 1e-12))
        fail(ErrorKind::Config, "BadSweep", "delta range must span at least 1.5 decades");
    const SweepTable t = run_sweep([&](double d) { return make_scenario(a, d); },
                                   log_spaced(a.delta_min, a.delta_max, a.points), a.jobs, solve_options(a));
    std::ostringstream csv;
    io::write_sweep_csv(csv, t);
    write(a, "sweep.csv", csv.str());
    if (a.fit) {
        const ExponentFit f = default_fit(t, a);
        write(a, "fit.json", dump(io::fit_json(f)));
        std::cout << "slope " << io::num(f.slope) << '\n';
    }
    return 0;
}

int cmd_verify(const Args& a) {
    const double R = a.radius > 0 ? a.radius : 1.0;
    const auto rows = verify_coefficients(a.delta, R, a.mu);
    std::ostringstream csv;
    io::write_coefficients_csv(csv, rows);
    write(a, "coefficients.csv", csv.str());
    int bad = 0;
    for (const auto& r : rows)
        if (!(r.rel_error < a.tol_coefficients)) {
            ++bad;
            std::cerr << r.label << " rel_error " << io::num(r.rel_error) << '\n';
        }
    if (bad) fail(ErrorKind::Validation, "CoefficientMismatch", std::to_string(bad) + " coefficients off");
    return 0;
}

int cmd_korn(const Args& a) {
    Args b = a;
    if (b.builtin == "hexagonal") b.builtin = "hexagonal-walls";  // the periodic cell has no fixed ring
    const Scenario sc = make_scenario(b, a.delta);
    const KornResult k = korn_check(sc.net);
    io::json j = {{"scenario", sc.name}, {"C", k.C}, {"degenerate", k.degenerate}};
    j["mode"] = std::vector<double>(k.mode.data(), k.mode.data() + k.mode.size());
    write(a, "korn.json", dump(j));
    std::cout << "C " << io::num(k.C) << '\n';
    if (k.degenerate) fail(ErrorKind::Validation, "KornDegenerate", "C is not positive");
    return 0;
}

// Reads delta and I_total columns from a sweep table.
int cmd_fit(const Args& a) {
    if (a.table.empty()) fail(ErrorKind::Config, "MissingFile", "--table is required");
    std::ifstream in(a.table);
    if (!in) fail(ErrorKind::Config, "MissingFile", a.table);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> head;
    {
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) head.push_back(c);
    }
    auto col = [&](const std::string& name) {
        for (size_t k = 0; k < head.size(); ++k)
            if (head[k] == name) return static_cast<int>(k);
        fail(ErrorKind::Config, "BadTable", "missing column " + name);
    };
    const int cd = col("delta"), ci = col("I_total");
    SweepTable t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
        if (static_cast<int>(f.size()) <= std::max(cd, ci)) fail(ErrorKind::Config, "BadTable", line);
        SweepRow r;
        try {
            r.delta = std::stod(f[cd]);
            r.I_total = std::stod(f[ci]);
        } catch (const std::exception&) {
            fail(ErrorKind::Config, "BadTable", line);
        }
        t.rows.push_back(r);
    }
    const ExponentFit fit = default_fit(t, a);
    write(a, "fit.json", dump(io::fit_json(fit)));
    std::cout << "slope " << io::num(fit.slope) << '\n';
    return 0;
}

int report(const Args& a, const std::string& code, const std::string& kind, const std::string& msg, int rc) {
    const std::string text = io::error_json(code, kind, msg).dump() + "\n";
    std::cout << text;
    std::error_code ec;
    if (!a.out.empty() && fs::is_directory(a.out, ec)) {
        std::ofstream((fs::path(a.out) / "error.json").string()) << text;
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete network model of dense disk suspensions"};
    app.require_subcommand(1, 1);
    Args a;
    if (const char* env = std::getenv("SUSPNET_OUT")) a.out = env;
    if (a.out.empty()) a.out = ".";

    auto scenario_flags = [&](CLI::App* c) {
        c->add_option("--builtin", a.builtin,
                      "hexagonal | hexagonal-walls | boundary-layer | pinning-strip | jittered-hex");
        c->add_option("--config", a.config, "JSON disk configuration")->check(CLI::ExistingFile);
        c->add_option("--rings", a.rings, "hexagonal rings")->check(CLI::Range(0, 50));
        c->add_option("--n", a.n, "pinning strip length")->check(CLI::Range(1, 100000));
        c->add_option("--jitter", a.jitter, "jitter as a fraction of delta");
        c->add_option("--seed", a.seed, "RNG seed");
        c->add_option("--radius", a.radius, "disk radius");
        c->add_option("--mu", a.mu, "viscosity")->check(CLI::PositiveNumber);
        c->add_option("--quasidisk-velocity", a.quasidisk_velocity, "field | printed")
            ->check(CLI::IsMember({"field", "printed"}));
        c->add_option("--close-lo", a.close_lo, "close packing lower bound");
        c->add_option("--close-hi", a.close_hi, "close packing upper bound");
    };
    auto common = [&](CLI::App* c) {
        c->add_option("--out", a.out, "output directory (default $SUSPNET_OUT or .)");
        c->add_option("--tol-residual", a.tol_residual, "largest accepted relative residual");
        c->add_option("--tol-inconsistent", a.tol_inconsistent, "constraint residual treated as infeasible");
    };

    auto* build = app.add_subcommand("build", "build the network and write necks.csv");
    auto* solve_c = app.add_subcommand("solve", "minimize Q and write result.json and necks.csv");
    auto* sweep = app.add_subcommand("sweep", "solve over log-spaced gaps and write sweep.csv");
    auto* verify = app.add_subcommand("verify-coefficients", "quadrature check of the lubrication table");
    auto* korn = app.add_subcommand("korn", "discrete Korn constant");
    auto* fit = app.add_subcommand("fit", "fit the blow-up exponent of a sweep table");
    for (auto* c : {build, solve_c, sweep, korn}) scenario_flags(c);
    for (auto* c : {build, solve_c, sweep, verify, korn, fit}) common(c);
    for (auto* c : {build, solve_c, verify, korn})
        c->add_option("--delta", a.delta, "gap")->check(CLI::PositiveNumber);
    solve_c->add_flag("--dump-model", a.dump_model, "also write model.csv");
    sweep->add_option("--delta-min", a.delta_min)->check(CLI::PositiveNumber);
    sweep->add_option("--delta-max", a.delta_max)->check(CLI::PositiveNumber);
    sweep->add_option("--points", a.points)->check(CLI::Range(2, 10000));
    sweep->add_option("--jobs", a.jobs)->check(CLI::Range(1, 256));
    sweep->add_flag("--fit", a.fit, "fit log I against log delta");
    for (auto* c : {sweep, fit}) {
        c->add_option("--fit-min", a.fit_min, "fit window lower delta");
        c->add_option("--fit-max", a.fit_max, "fit window upper delta (default drops the largest decade)");
    }
    fit->add_option("--table", a.table, "sweep.csv")->check(CLI::ExistingFile);
    verify->add_option("--radius", a.radius);
    verify->add_option("--mu", a.mu)->check(CLI::PositiveNumber);
    verify->add_option("--tol-coefficients", a.tol_coefficients, "largest accepted relative error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report(a, "BadArguments", "config", e.what(), 2);
    }

    try {
        std::error_code ec;
        fs::create_directories(a.out, ec);
        if (ec) fail(ErrorKind::Config, "CannotWrite", a.out);
        if (*build) return cmd_build(a);
        if (*solve_c) return cmd_solve(a);
        if (*sweep) return cmd_sweep(a);
        if (*verify) return cmd_verify(a);
        if (*korn) return cmd_korn(a);
        if (*fit) return cmd_fit(a);
    } catch (const Error& e) {
        switch (e.kind()) {
            case ErrorKind::Config: return report(a, e.code(), "config", e.what(), 2);
            case ErrorKind::Numeric: return report(a, e.code(), "numeric", e.what(), 3);
            case ErrorKind::Validation: return report(a, e.code(), "validation", e.what(), 4);
        }
    } catch (const std::exception& e) {
        return report(a, "Internal", "numeric", e.what(), 3);
    }
    return 0;
}
