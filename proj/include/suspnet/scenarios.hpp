// Built-in configurations, delta sweeps, exponent fits and the discrete Korn check.
#pragma once

#include "suspnet/solver.hpp"

#include <algorithm>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <tuple>

namespace suspnet {

// A network with its boundary data and any frozen unknowns.
struct Scenario {
    std::string name;
    DiskNetwork net;
    BoundaryData A;
    AssemblyOptions opt;
    PinnedSet pins;
};

inline SolveResult run_scenario(const Scenario& sc, const SolveOptions& sopt = {}) {
    const QuadraticModel m = assemble_Q(sc.net, sc.net.mu, sc.A, sc.opt);
    const ConstraintSystem cs = assemble_constraints(sc.net, sc.A, sc.opt);
    SolveResult r = pinned_solve(m, cs, sc.net, sc.pins, sopt);
    r.state = state_from_vector(sc.net, all_boundary_values(sc.net, sc.A, sc.opt.quasidisk_velocity), r.z);
    return r;
}

// ---------------------------------------------------------------------------
// Hexagonal arrays

struct GeneratedConfig {
    DiskConfig config;
    DomainRect domain;
    BoundaryData A;
};

inline std::vector<Vec2> hex_lattice(int rings, double a) {
    std::vector<Vec2> pts;
    const double h = std::sqrt(3.0) / 2;
    for (int j = -rings; j <= rings; ++j)
        for (int i = -rings; i <= rings; ++i) {
            const int k = -i - j;
            if (std::max({std::abs(i), std::abs(j), std::abs(k)}) > rings) continue;
            pts.emplace_back(a * (i + 0.5 * j), a * h * j);
        }
    return pts;
}

// Square domain whose lateral walls sit at gap delta from the outermost disks.
inline GeneratedConfig gen_hexagonal(int rings, double R, double delta, double mu = 1.0) {
    if (rings < 0) fail(ErrorKind::Config, "DoesNotFit", "rings must be non-negative");
    if (!(R > 0 && delta > 0)) fail(ErrorKind::Config, "DoesNotFit", "R and delta must be positive");
    GeneratedConfig g;
    g.config.R = R;
    g.config.mu = mu;
    g.config.centers = hex_lattice(rings, 2 * R + delta);
    const double M = rings * (2 * R + delta) + R + delta;
    g.domain = {M, M};
    g.A = {1.0, 0.0, 0.0};
    return g;
}

inline GeneratedConfig gen_jittered_hex(int rings, double R, double delta, double jitter, std::uint64_t seed,
                                        double mu = 1.0) {
    if (!(jitter >= 0 && jitter < 0.5)) fail(ErrorKind::Config, "ClosePackingViolated", "jitter must lie in [0, 0.5)");
    GeneratedConfig g = gen_hexagonal(rings, R, delta, mu);
    std::mt19937_64 rng(seed);
    for (auto& c : g.config.centers) {
        // uniform in the disk of radius jitter * delta; two draws per center
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double t = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double r = jitter * delta * std::sqrt(u), th = 2 * pi * t;
        c += Vec2(r * std::cos(th), r * std::sin(th));
    }
    return g;
}

// Interior edges only: boundary necks of a finite lattice in a square box have
// clearances set by the box, not by delta.
inline void require_close_packing(const DiskNetwork& net, double c1 = 0.5, double c2 = 2.0) {
    const auto rep = validate_close_packing(net, c1, c2, false);
    if (!rep.ok())
        fail(ErrorKind::Validation, "ClosePackingViolated",
             std::to_string(rep.violations.size()) + " interior edges outside (" + std::to_string(c1) + ", " +
                 std::to_string(c2) + ")");
}

// Periodic closure of the hexagonal cluster. A cluster of 3r^2+3r+1 sites
// tiles the plane under the superlattice spanned by T1 = (r+1) e0 + r e60 and
// its 60 degree rotation, so every disk gets six neighbors, some of them
// periodic images. The boundary data enter only through the image offsets,
// U(image of j) = U_j + A shift.
inline DiskNetwork periodic_hex_network(int rings, double R, double delta, double mu = 1.0) {
    if (rings < 1) fail(ErrorKind::Config, "DoesNotFit", "a periodic cell needs rings >= 1");
    const double a = 2 * R + delta;
    const std::vector<Vec2> xs = hex_lattice(rings, a);
    const int N = static_cast<int>(xs.size());
    auto rot60 = [](const Vec2& v) {
        const double c = 0.5, s = std::sqrt(3.0) / 2;
        return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
    };
    const Vec2 e0(a, 0), e60 = rot60(e0);
    const Vec2 T1 = (rings + 1) * e0 + rings * e60, T2 = rot60(T1);
    const double tol = 1e-6 * a;
    // site j and superlattice shift with x_j + shift = y
    auto locate = [&](const Vec2& y) -> std::pair<int, Vec2> {
        for (int m = -2; m <= 2; ++m)
            for (int n = -2; n <= 2; ++n) {
                const Vec2 sh = m * T1 + n * T2;
                for (int j = 0; j < N; ++j)
                    if ((xs[j] + sh - y).norm() < tol) return {j, sh};
            }
        fail(ErrorKind::Validation, "DegenerateTriangulation", "periodic neighbor not found");
    };
    DiskNetwork net;
    net.R = R;
    net.mu = mu;
    net.delta_ref = delta;
    net.n_interior = N;
    double ext = 0;
    for (const auto& x : xs) ext = std::max({ext, std::abs(x.x()), std::abs(x.y())});
    net.domain = {ext + R + delta, ext + R + delta};
    for (int i = 0; i < N; ++i) net.vertices.push_back({i, VertexKind::Interior, xs[i], Side::None, -1});
    std::map<std::tuple<int, int, long, long>, int> index;
    auto key = [&](int i, int j, const Vec2& sh) {
        return std::make_tuple(i, j, std::lround(sh.x() / tol), std::lround(sh.y() / tol));
    };
    std::vector<Vec2> dirs{e0};
    for (int k = 1; k < 6; ++k) dirs.push_back(rot60(dirs.back()));
    for (int i = 0; i < N; ++i)
        for (const Vec2& dv : dirs) {
            auto [j, sh] = locate(xs[i] + dv);
            if (j < i || (j == i)) continue;
            if (index.count(key(i, j, sh))) continue;
            NeckEdge E;
            E.i = i;
            E.j = j;
            E.shift = sh;
            std::tie(E.p, E.q) = local_frame(xs[i], xs[j] + sh);
            E.delta = interparticle_gap(NeckKind::InteriorInterior, a, R);
            E.d = E.delta / delta;
            // Voronoi vertices are the centroids of the two adjacent triangles
            const Vec2 mid = xs[i] + 0.5 * dv, off = E.p * (a / (2 * std::sqrt(3.0)));
            std::tie(E.gm, E.gp) = neck_half_widths(xs[i], E.p, R, mid - off, mid + off);
            index[key(i, j, sh)] = static_cast<int>(net.edges.size());
            net.edges.push_back(E);
        }
    // traversal of the lattice step from site u along dv
    auto side_of = [&](int u, const Vec2& dv) {
        auto [v, sh] = locate(xs[u] + dv);
        auto it = index.find(key(u, v, sh));
        if (it != index.end()) return FaceSide{FaceSide::Neck, it->second, 1};
        it = index.find(key(v, u, -sh));
        if (it == index.end()) fail(ErrorKind::Validation, "DegenerateTriangulation", "periodic edge missing");
        return FaceSide{FaceSide::Neck, it->second, -1};
    };
    for (int i = 0; i < N; ++i)
        for (int t = 0; t < 2; ++t) {
            // up triangle (x, x+e0, x+e60), down triangle (x, x+e60, x+e120)
            const Vec2 d1 = dirs[t], d2 = dirs[t + 1];
            const int v1 = locate(xs[i] + d1).first, v2 = locate(xs[i] + d2).first;
            ConstraintFace f;
            f.vertices = {i, v1, v2};
            f.vertex_shift = {Vec2(0, 0), xs[i] + d1 - xs[v1], xs[i] + d2 - xs[v2]};
            f.sides = {side_of(i, d1), side_of(v1, xs[i] + d2 - (xs[i] + d1)), side_of(v2, -d2)};
            f.circumcenter = xs[i] + (d1 + d2) / 3.0;
            net.faces.push_back(f);
        }
    net.notes.push_back("periodic closure of a " + std::to_string(N) + "-disk hexagonal cell");
    return net;
}

enum class HexClosure { Periodic, Walls };

// Extensional data on a hexagonal array. The periodic closure fixes the
// translation gauge with U_0 = A x_0.
inline Scenario hexagonal_scenario(int rings, double R, double delta, HexClosure closure = HexClosure::Periodic,
                                   double mu = 1.0) {
    const GeneratedConfig g = gen_hexagonal(rings, R, delta, mu);
    Scenario s;
    s.A = g.A;
    if (closure == HexClosure::Periodic) {
        s.name = "hexagonal";
        s.net = periodic_hex_network(rings, R, delta, mu);
        s.pins.translation[0] = s.A(s.net.vertices[0].center);
    } else {
        s.name = "hexagonal-walls";
        s.net = build_network(g.config, g.domain, delta);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Single disk with imposed corner fluxes

struct BoundaryLayerScenario {
    Scenario scenario;
    double d = 0;
    double beta0 = 0;
};

inline BoundaryLayerScenario gen_single_disk_boundary_layer(double delta, double R, double mu = 1.0) {
    if (!(delta > 0 && R > 0)) fail(ErrorKind::Config, "BadGeometry", "delta and R must be positive");
    const double d = delta + R * (1 - 1 / std::sqrt(2.0));
    if (!(d < 1)) fail(ErrorKind::Config, "BadGeometry", "d = " + std::to_string(d) + " must be below 1");
    BoundaryLayerScenario out;
    out.d = d;
    out.beta0 = 2 / R * (-1 + d);
    Scenario& s = out.scenario;
    s.name = "boundary-layer";
    DiskConfig cfg;
    cfg.R = R;
    cfg.mu = mu;
    cfg.centers = {Vec2(0, 0)};
    s.net = build_network(cfg, {R + delta, R + delta}, delta);
    s.A = {};
    // outward corner fluxes alternate in sign around the square
    for (size_t w = 0; w < s.net.walls.size(); ++w) {
        const auto& path = s.net.walls[w].path;
        if (path.size() != 3) fail(ErrorKind::Validation, "BadGeometry", "expected corner wall paths");
        const Vec2 c = path[1];
        const double sign = c.x() * c.y() > 0 ? 1.0 : -1.0;
        s.opt.wall_flux_override[static_cast<int>(w)] = sign * out.beta0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pinning strip: a column of N motionless disks, periodic in both directions.
// Each disk has one horizontal neck to its own periodic image and vertical
// necks to the disks above and below. Faces are the N squares between rows.

inline Scenario gen_pinning_strip(int N, double R, double delta, double mu = 1.0) {
    if (N < 1) fail(ErrorKind::Config, "BadConfig", "N must be at least 1");
    if (!(R > 0 && delta > 0)) fail(ErrorKind::Config, "BadConfig", "R and delta must be positive");
    const double a = 2 * R + delta;
    Scenario s;
    s.name = "pinning-strip";
    DiskNetwork& net = s.net;
    net.domain = {a / 2, N * a / 2};
    net.R = R;
    net.mu = mu;
    net.delta_ref = delta;
    net.n_interior = N;
    for (int k = 0; k < N; ++k)
        net.vertices.push_back({k, VertexKind::Interior, Vec2(0, -N * a / 2 + (k + 0.5) * a), Side::None, -1});
    auto edge = [&](int i, int j, Vec2 q) {
        NeckEdge E;
        E.i = i;
        E.j = j;
        E.q = q;
        E.p = rotate_cw(q);
        E.delta = delta;
        E.d = 1.0;
        E.gm = E.gp = R / 2;
        net.edges.push_back(E);
        return static_cast<int>(net.edges.size()) - 1;
    };
    std::vector<int> horiz(N), vert(N);
    std::vector<int> vert_sign(N);  // +1 when the canonical orientation points up
    for (int k = 0; k < N; ++k) horiz[k] = edge(k, k, Vec2(1, 0));
    for (int k = 0; k < N; ++k) {
        const int up = (k + 1) % N;
        if (k < up || N == 1) { vert[k] = edge(k, up, Vec2(0, 1)); vert_sign[k] = 1; }
        else { vert[k] = edge(up, k, Vec2(0, -1)); vert_sign[k] = -1; }
    }
    for (int k = 0; k < N; ++k) {
        const int up = (k + 1) % N;
        ConstraintFace f;
        f.vertices = {k, k, up, up};
        const double wrap = k == N - 1 ? N * a : 0.0;
        f.vertex_shift = {Vec2(0, 0), Vec2(a, 0), Vec2(a, a - wrap), Vec2(0, a - wrap)};
        f.sides = {{FaceSide::Neck, horiz[k], 1},
                   {FaceSide::Neck, vert[k], vert_sign[k]},
                   {FaceSide::Neck, horiz[up], -1},
                   {FaceSide::Neck, vert[k], -vert_sign[k]}};
        f.circumcenter = net.vertices[k].center + Vec2(a / 2, a / 2);
        net.faces.push_back(f);
    }
    for (int k = 0; k < N; ++k) {
        s.pins.vertices.insert(k);
        s.pins.edge_beta[horiz[k]] = 1 / R;
        s.pins.edge_beta[vert[k]] = 0.0;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Sweeps and exponent fits

struct SweepRow {
    double delta = 0, I_total = 0, I1 = 0, I2 = 0, I3 = 0, max_beta = 0, max_omega = 0;
    double share_sh = 0, share_sq = 0, share_per = 0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
};

inline std::vector<double> log_spaced(double lo, double hi, int points) {
    if (!(lo > 0 && hi > lo && points >= 2)) fail(ErrorKind::Config, "BadSweep", "need 0 < lo < hi and points >= 2");
    std::vector<double> v(points);
    for (int k = 0; k < points; ++k)
        v[k] = std::exp(std::log(hi) + (std::log(lo) - std::log(hi)) * k / (points - 1));  // decreasing
    return v;
}

inline SweepRow sweep_row(const Scenario& sc, const SolveResult& r) {
    SweepRow row;
    row.delta = sc.net.delta_ref;
    row.I_total = r.I_total;
    row.I1 = r.I_split[0];
    row.I2 = r.I_split[1];
    row.I3 = r.I_split[2];
    for (double b : r.state.beta) row.max_beta = std::max(row.max_beta, std::abs(b));
    for (int v = 0; v < sc.net.n_interior; ++v) row.max_omega = std::max(row.max_omega, std::abs(r.state.omega[v]));
    const QuadraticModel m = assemble_Q(sc.net, sc.net.mu, sc.A, sc.opt);
    const auto sp = microflow_split(m, r.z);
    const double tot = sp[0] + sp[1] + sp[2] + sp[3] + sp[4];
    if (tot != 0) {
        row.share_sh = sp[0] / tot;
        row.share_sq = (sp[1] + sp[4]) / tot;
        row.share_per = (sp[2] + sp[3]) / tot;
    }
    return row;
}

using ScenarioFactory = std::function<Scenario(double delta)>;

inline SweepTable run_sweep(const ScenarioFactory& make, const std::vector<double>& deltas, int jobs = 1,
                            const SolveOptions& sopt = {}) {
    for (size_t k = 1; k < deltas.size(); ++k)
        if (!(deltas[k] < deltas[k - 1])) fail(ErrorKind::Config, "BadSweep", "deltas must decrease strictly");
    SweepTable t;
    t.rows.resize(deltas.size());
    auto one = [&](size_t k) {
        const Scenario sc = make(deltas[k]);
        t.rows[k] = sweep_row(sc, run_scenario(sc, sopt));
    };
    if (jobs <= 1) {
        for (size_t k = 0; k < deltas.size(); ++k) one(k);
    } else {
        for (size_t k0 = 0; k0 < deltas.size(); k0 += jobs) {
            std::vector<std::future<void>> fs;
            for (size_t k = k0; k < std::min(deltas.size(), k0 + jobs); ++k)
                fs.push_back(std::async(std::launch::async, one, k));
            for (auto& f : fs) f.get();
        }
    }
    return t;
}

struct ExponentFit {
    double slope = 0, intercept = 0, r2 = 0;
    double delta_min = 0, delta_max = 0;
    int points = 0;
};

inline ExponentFit fit_exponent(const std::vector<double>& delta, const std::vector<double>& value,
                                double window_min = 0, double window_max = std::numeric_limits<double>::infinity()) {
    std::vector<double> x, y;
    for (size_t k = 0; k < delta.size(); ++k)
        if (delta[k] >= window_min && delta[k] <= window_max) {
            if (!(value[k] > 0)) fail(ErrorKind::Numeric, "BadFit", "non-positive value in the fit window");
            x.push_back(std::log(delta[k]));
            y.push_back(std::log(value[k]));
        }
    if (x.size() < 4) fail(ErrorKind::Config, "BadFit", "fit needs at least 4 points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t k = 0; k < x.size(); ++k) { mx += x[k]; my += y[k]; }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    ExponentFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    f.points = static_cast<int>(x.size());
    f.delta_min = std::exp(*std::min_element(x.begin(), x.end()));
    f.delta_max = std::exp(*std::max_element(x.begin(), x.end()));
    return f;
}

inline ExponentFit fit_exponent(const SweepTable& t, double window_min = 0,
                                double window_max = std::numeric_limits<double>::infinity()) {
    std::vector<double> d, v;
    for (auto& r : t.rows) { d.push_back(r.delta); v.push_back(r.I_total); }
    return fit_exponent(d, v, window_min, window_max);
}

// ---------------------------------------------------------------------------
// Discrete Korn inequality

// Free vertices 0..n_free-1; an endpoint of -1 is a fixed vertex with U = 0.
struct KornGraph {
    int n_free = 0;
    struct Edge {
        int i, j;
        Vec2 q;
    };
    std::vector<Edge> edges;
};

inline KornGraph korn_graph(const DiskNetwork& net) {
    KornGraph g;
    g.n_free = net.n_interior;
    for (const auto& E : net.edges) {
        if (E.i == E.j) continue;
        g.edges.push_back({E.i, net.interior(E.j) ? E.j : -1, E.q});
    }
    return g;
}

struct KornResult {
    double C = 0;
    Eigen::VectorXd mode;  // interleaved (Ux, Uy) per free vertex
    bool degenerate = false;
};

// Gram matrices of sum [(Ui-Uj).q]^2 and sum |Ui-Uj|^2.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> korn_forms(const KornGraph& g) {
    const int n = 2 * g.n_free;
    Eigen::MatrixXd Kq = Eigen::MatrixXd::Zero(n, n), Kf = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges) {
        Eigen::VectorXd aq = Eigen::VectorXd::Zero(n);
        std::array<Eigen::VectorXd, 2> af{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
        for (int c = 0; c < 2; ++c) {
            aq(2 * e.i + c) += e.q(c);
            af[c](2 * e.i + c) += 1;
            if (e.j >= 0) {
                aq(2 * e.j + c) -= e.q(c);
                af[c](2 * e.j + c) -= 1;
            }
        }
        Kq += aq * aq.transpose();
        for (auto& v : af) Kf += v * v.transpose();
    }
    return {Kq, Kf};
}

inline KornResult korn_check(const KornGraph& g) {
    if (g.n_free == 0) fail(ErrorKind::Config, "BadConfig", "no free vertices");
    // every free vertex must reach a fixed one, otherwise the denominator has a kernel
    std::vector<std::vector<int>> adj(g.n_free);
    std::vector<char> anchored(g.n_free, 0);
    for (auto& e : g.edges) {
        if (e.j < 0) anchored[e.i] = 1;
        else if (e.i != e.j) { adj[e.i].push_back(e.j); adj[e.j].push_back(e.i); }
    }
    std::vector<int> stack;
    for (int v = 0; v < g.n_free; ++v)
        if (anchored[v]) stack.push_back(v);
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
            if (!anchored[w]) { anchored[w] = 1; stack.push_back(w); }
    }
    for (int v = 0; v < g.n_free; ++v)
        if (!anchored[v]) fail(ErrorKind::Validation, "DisconnectedNetwork", "vertex " + std::to_string(v) + " is not tied to the boundary");
    auto [Kq, Kf] = korn_forms(g);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kq, Kf);
    if (es.info() != Eigen::Success) fail(ErrorKind::Numeric, "KornEigenFailed", "generalized eigenproblem");
    KornResult r;
    r.C = es.eigenvalues()(0);
    r.mode = es.eigenvectors().col(0);
    r.degenerate = !(r.C > 1e-12);
    return r;
}

inline KornResult korn_check(const DiskNetwork& net) { return korn_check(korn_graph(net)); }

}  // namespace suspnet
