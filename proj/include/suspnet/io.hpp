// Config parsing and report writers (JSON and CSV).
#pragma once

#include "suspnet/scenarios.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>

namespace suspnet::io {

using json = nlohmann::json;

// Shortest decimal that parses back to the same double.
inline std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, end);
}

struct ConfigFile {
    DiskConfig config;
    DomainRect domain;
    double delta_ref = 0;
    std::optional<BoundaryData> A;
};

inline ConfigFile parse_config(const json& j) {
    ConfigFile c;
    try {
        c.domain.half_width = j.at("domain").at("w").get<double>();
        c.domain.half_height = j.at("domain").at("h").get<double>();
        c.config.R = j.at("radius").get<double>();
        c.config.mu = j.value("mu", 1.0);
        c.delta_ref = j.at("delta_ref").get<double>();
        for (const auto& p : j.at("centers")) {
            if (!p.is_array() || p.size() != 2) fail(ErrorKind::Config, "BadConfig", "centers must be [x, y] pairs");
            c.config.centers.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        if (j.contains("boundary")) {
            const auto& b = j["boundary"];
            c.A = BoundaryData{b.value("a", 0.0), b.value("b", 0.0), b.value("c", 0.0)};
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "BadConfig", e.what());
    }
    if (!(c.domain.half_width > 0 && c.domain.half_height > 0))
        fail(ErrorKind::Config, "BadConfig", "domain half sizes must be positive");
    if (!(c.config.R > 0 && c.config.mu > 0 && c.delta_ref > 0))
        fail(ErrorKind::Config, "BadConfig", "radius, mu and delta_ref must be positive");
    return c;
}

inline ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "MissingFile", path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "BadConfig", e.what());
    }
    return parse_config(j);
}

inline json config_json(const DiskConfig& cfg, const DomainRect& dom, double delta_ref,
                        const std::optional<BoundaryData>& A = std::nullopt) {
    json j;
    j["domain"] = {{"w", dom.half_width}, {"h", dom.half_height}};
    j["radius"] = cfg.R;
    j["mu"] = cfg.mu;
    j["delta_ref"] = delta_ref;
    j["centers"] = json::array();
    for (const auto& x : cfg.centers) j["centers"].push_back({x.x(), x.y()});
    if (A) j["boundary"] = {{"a", A->a}, {"b", A->b}, {"c", A->c}};
    return j;
}

inline const char* kind_name(NeckKind k) { return k == NeckKind::InteriorInterior ? "interior" : "boundary"; }

// One row per edge. With a solved state the permeation constant and the
// per-neck microflow values are appended.
inline void write_necks_csv(std::ostream& os, const DiskNetwork& net, const QuadraticModel* m = nullptr,
                            const SolveResult* r = nullptr) {
    os << "i,j,kind,delta_ij,d_ij,px,py,qx,qy,gm,gp";
    const bool solved = m && r;
    if (solved) os << ",beta,Q_sh_in,Q_sq_in,Q_per_in,Q_per_b,Q_sq_b,Q_neck";
    os << '\n';
    std::vector<std::array<double, 5>> per(net.edges.size(), std::array<double, 5>{});
    if (solved)
        for (const auto& at : m->atoms) per[at.edge][static_cast<int>(group_of(at.term))] += at.eval(r->z);
    for (size_t e = 0; e < net.edges.size(); ++e) {
        const auto& E = net.edges[e];
        os << E.i << ',' << E.j << ',' << kind_name(E.kind) << ',' << num(E.delta) << ',' << num(E.d) << ','
           << num(E.p.x()) << ',' << num(E.p.y()) << ',' << num(E.q.x()) << ',' << num(E.q.y()) << ',' << num(E.gm)
           << ',' << num(E.gp);
        if (solved) {
            os << ',' << num(r->state.beta[e]);
            double tot = 0;
            for (double v : per[e]) {
                os << ',' << num(v);
                tot += v;
            }
            os << ',' << num(tot);
        }
        os << '\n';
    }
}

inline void write_sweep_csv(std::ostream& os, const SweepTable& t) {
    os << "delta,I_total,I1,I2,I3,max_beta,max_omega,share_sh,share_sq,share_per\n";
    for (const auto& r : t.rows)
        os << num(r.delta) << ',' << num(r.I_total) << ',' << num(r.I1) << ',' << num(r.I2) << ',' << num(r.I3) << ','
           << num(r.max_beta) << ',' << num(r.max_omega) << ',' << num(r.share_sh) << ',' << num(r.share_sq) << ','
           << num(r.share_per) << '\n';
}

inline void write_coefficients_csv(std::ostream& os, const std::vector<CoefficientCheck>& rows) {
    os << "label,term,delta_power,closed_form,quadrature_fit,rel_error\n";
    for (const auto& r : rows)
        os << r.label << ',' << r.term << ',' << num(r.delta_power) << ',' << num(r.closed_form) << ','
           << num(r.quadrature_fit) << ',' << num(r.rel_error) << '\n';
}

// Hessian contributions of each atom, split symmetrically. Summing value over
// equal (row, col) reproduces the assembled P.
inline void write_model_csv(std::ostream& os, const DiskNetwork& net, const QuadraticModel& m) {
    os << "row,col,value,i,j,term,label,delta_power\n";
    for (const auto& at : m.atoms) {
        const auto& E = net.edges[at.edge];
        for (auto [ia, ca] : at.a.terms)
            for (auto [ib, cb] : at.b.terms) {
                const double v = 0.5 * at.weight * ca * cb;
                for (auto [r, c] : {std::pair{ia, ib}, std::pair{ib, ia}})
                    os << r << ',' << c << ',' << num(v) << ',' << E.i << ',' << E.j << ',' << term_name(at.term)
                       << ',' << at.label << ',' << num(-at.power) << '\n';
            }
    }
}

inline json units_json() {
    return {{"length", "user length L"},
            {"time", "user time T"},
            {"mu", "pressure * time"},
            {"U", "L/T"},
            {"omega", "1/T, clockwise positive"},
            {"beta", "L/T divided by R, positive along +p"},
            {"I", "mu * L^2 / T^2 per unit depth"}};
}

inline json result_json(const Scenario& sc, const QuadraticModel& m, const ConstraintSystem& cs,
                        const SolveResult& r) {
    json j;
    j["scenario"] = sc.name;
    j["units"] = units_json();
    j["R"] = sc.net.R;
    j["mu"] = sc.net.mu;
    j["delta_ref"] = sc.net.delta_ref;
    j["boundary"] = {{"a", sc.A.a}, {"b", sc.A.b}, {"c", sc.A.c}};
    j["counts"] = {{"vertices", sc.net.vertices.size()},
                   {"interior", sc.net.n_interior},
                   {"edges", sc.net.edges.size()},
                   {"faces", sc.net.faces.size()},
                   {"rank", cs.rank()}};
    j["I_total"] = r.I_total;
    j["I_split"] = {{"I1", r.I_split[0]}, {"I2", r.I_split[1]}, {"I3", r.I_split[2]}};
    const auto sp = microflow_split(m, r.z);
    j["microflow"] = json::object();
    for (int g = 0; g < 5; ++g) j["microflow"][group_name(static_cast<MicroflowGroup>(g))] = sp[g];
    j["residuals"] = {{"constraint", r.constraint_residual}, {"stationarity", r.stationarity_residual}};
    j["U"] = json::array();
    j["omega"] = json::array();
    for (size_t v = 0; v < sc.net.vertices.size(); ++v) {
        j["U"].push_back({r.state.U[v].x(), r.state.U[v].y()});
        j["omega"].push_back(r.state.omega[v]);
    }
    j["beta"] = r.state.beta;
    j["multipliers"] = json::array();
    for (int k = 0; k < r.multipliers.size(); ++k)
        j["multipliers"].push_back({{"face", k},
                                    {"pressure", r.multipliers(k)},
                                    {"dropped", k < static_cast<int>(r.dropped.size()) && r.dropped[k]}});
    if (!sc.net.notes.empty()) j["notes"] = sc.net.notes;
    return j;
}

inline json fit_json(const ExponentFit& f) {
    return {{"slope", f.slope},       {"intercept", f.intercept}, {"r2", f.r2},
            {"delta_min", f.delta_min}, {"delta_max", f.delta_max}, {"points", f.points}};
}

inline json error_json(const std::string& code, const std::string& kind, const std::string& message) {
    return {{"status", "error"}, {"code", code}, {"kind", kind}, {"message", message}};
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Config, "CannotWrite", path);
    out << text;
}

}  // namespace suspnet::io
