#include "suspnet/scenarios.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace suspnet;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

int interior_edges(const DiskNetwork& net) {
    int n = 0;
    for (const auto& E : net.edges) n += net.interior(E.i) && net.interior(E.j);
    return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// hexagonal arrays

TEST(Hexagonal, Counts) {
    const GeneratedConfig g1 = gen_hexagonal(1, 1.0, 1e-3);
    const DiskNetwork n1 = build_network(g1.config, g1.domain, 1e-3);
    EXPECT_EQ(n1.n_interior, 7);
    EXPECT_EQ(interior_edges(n1), 12);
    const GeneratedConfig g2 = gen_hexagonal(2, 1.0, 1e-3);
    EXPECT_EQ(g2.config.centers.size(), 19u);
    const DiskNetwork n2 = build_network(g2.config, g2.domain, 1e-3);
    EXPECT_EQ(interior_edges(n2), 42);
}

TEST(Hexagonal, PeriodicClosureHasSixNeighbors) {
    for (int rings : {1, 2, 3}) {
        const DiskNetwork net = periodic_hex_network(rings, 1.0, 1e-3);
        const int N = 3 * rings * rings + 3 * rings + 1;
        EXPECT_EQ(net.n_interior, N);
        EXPECT_EQ(net.edges.size(), static_cast<size_t>(3 * N));
        EXPECT_EQ(net.faces.size(), static_cast<size_t>(2 * N));
        std::vector<int> deg(N, 0);
        for (const auto& E : net.edges) { ++deg[E.i]; ++deg[E.j]; }
        for (int d : deg) EXPECT_EQ(d, 6);
    }
}

TEST(Hexagonal, AffineMotionIsFeasible) {
    const Scenario sc = hexagonal_scenario(2, 1.0, 1e-3);
    const ConstraintSystem cs = assemble_constraints(sc.net, sc.A, sc.opt);
    const Layout L = layout_of(sc.net);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(L.size());
    for (int v = 0; v < sc.net.n_interior; ++v) {
        const Vec2 U = sc.A(sc.net.vertices[v].center);
        z(L.U(v, 0)) = U.x();
        z(L.U(v, 1)) = U.y();
    }
    EXPECT_LE((cs.A * z - cs.rhs).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Hexagonal, RejectsBadInput) {
    EXPECT_THROW(gen_hexagonal(-1, 1.0, 1e-3), Error);
    EXPECT_THROW(gen_hexagonal(1, 1.0, 0.0), Error);
    EXPECT_THROW(periodic_hex_network(0, 1.0, 1e-3), Error);
}

TEST(Hexagonal, PermeationSuppressed) {
    const double delta = 1e-3;
    const SolveResult r = run_scenario(hexagonal_scenario(3, 1.0, delta));
    EXPECT_LE(std::abs(r.I_split[0]), 1e-10 * r.I_split[1] * delta);
    EXPECT_GT(r.I_split[1], 0);
}

// ---------------------------------------------------------------------------
// jittered arrays

TEST(Jittered, ZeroJitterIsLattice) {
    const GeneratedConfig a = gen_hexagonal(2, 1.0, 1e-3), b = gen_jittered_hex(2, 1.0, 1e-3, 0.0, 17);
    ASSERT_EQ(a.config.centers.size(), b.config.centers.size());
    for (size_t k = 0; k < a.config.centers.size(); ++k) EXPECT_EQ(a.config.centers[k], b.config.centers[k]);
}

TEST(Jittered, SeedReproducible) {
    const GeneratedConfig a = gen_jittered_hex(2, 1.0, 1e-3, 0.3, 42), b = gen_jittered_hex(2, 1.0, 1e-3, 0.3, 42);
    const GeneratedConfig c = gen_jittered_hex(2, 1.0, 1e-3, 0.3, 43);
    bool differs = false;
    for (size_t k = 0; k < a.config.centers.size(); ++k) {
        EXPECT_EQ(std::memcmp(a.config.centers[k].data(), b.config.centers[k].data(), 2 * sizeof(double)), 0);
        differs |= a.config.centers[k] != c.config.centers[k];
    }
    EXPECT_TRUE(differs);
}

TEST(Jittered, StaysClosePacked) {
    // each center moves by at most jitter * delta, so gaps stay above (1 - 2 jitter) delta
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double delta = 1e-3;
        const GeneratedConfig g = gen_jittered_hex(2, 1.0, delta, 0.24, seed);
        const DiskNetwork net = build_network(g.config, g.domain, delta);
        EXPECT_NO_THROW(require_close_packing(net));
        for (const auto& E : net.edges)
            if (net.interior(E.i) && net.interior(E.j)) {
                EXPECT_GT(E.delta / delta, 0.5);
                EXPECT_LT(E.delta / delta, 2.0);
            }
    }
}

TEST(Jittered, LargeJitterCanLeaveClosePacking) {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GeneratedConfig g = gen_jittered_hex(2, 1.0, 1e-3, 0.45, seed);
        try {
            require_close_packing(build_network(g.config, g.domain, 1e-3));
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), "ClosePackingViolated");
            ++violations;
        }
    }
    EXPECT_GT(violations, 0);
}

TEST(Jittered, JitterOutOfRange) {
    EXPECT_THROW(gen_jittered_hex(1, 1.0, 1e-3, 0.5, 1), Error);
    EXPECT_THROW(gen_jittered_hex(1, 1.0, 1e-3, -0.1, 1), Error);
}

// ---------------------------------------------------------------------------
// boundary layer

TEST(BoundaryLayer, Example) {
    const BoundaryLayerScenario bl = gen_single_disk_boundary_layer(1e-3, 0.5);
    EXPECT_NEAR(bl.d, 1e-3 + 0.5 * (1 - 1 / std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(bl.beta0, 4 * (bl.d - 1), 1e-14);
    EXPECT_EQ(bl.scenario.net.n_interior, 1);
    EXPECT_EQ(bl.scenario.net.edges.size(), 4u);
}

TEST(BoundaryLayer, WallFluxesBalance) {
    const BoundaryLayerScenario bl = gen_single_disk_boundary_layer(1e-3, 0.5);
    double s = 0, a = 0;
    for (auto& [w, f] : bl.scenario.opt.wall_flux_override) {
        s += f;
        a += std::abs(f);
    }
    EXPECT_EQ(bl.scenario.opt.wall_flux_override.size(), 4u);
    EXPECT_LE(std::abs(s), 1e-15 * a);
}

TEST(BoundaryLayer, BadGeometry) {
    EXPECT_THROW(gen_single_disk_boundary_layer(1e-3, 4.0), Error);
    EXPECT_THROW(gen_single_disk_boundary_layer(0.0, 0.5), Error);
    EXPECT_THROW(gen_single_disk_boundary_layer(1e-3, -1.0), Error);
}

// ---------------------------------------------------------------------------
// pinning strip

TEST(Pinning, SingleDisk) {
    const double R = 1.0, delta = 1e-3;
    const SolveResult r = run_scenario(gen_pinning_strip(1, R, delta));
    const double per = interior_neck_block(1.0, R, 1.0, delta)(2, 2);
    EXPECT_LE(rel(r.I_total, per / (R * R)), 1e-12);
}

TEST(Pinning, ScalesWithN) {
    const double R = 0.5, delta = 1e-3;
    const double I1 = run_scenario(gen_pinning_strip(1, R, delta)).I_total;
    const double I3 = run_scenario(gen_pinning_strip(3, R, delta)).I_total;
    EXPECT_LE(rel(I3, 3 * I1), 1e-12);
}

TEST(Pinning, DeltaDoubling) {
    const double R = 1.0;
    const double Ia = run_scenario(gen_pinning_strip(2, R, 1e-4)).I_total;
    const double Ib = run_scenario(gen_pinning_strip(2, R, 2e-4)).I_total;
    // dominated by delta^-5/2 with lower order corrections
    EXPECT_NEAR(Ia / Ib, std::pow(2.0, 2.5), 0.01 * std::pow(2.0, 2.5));
    const auto b = [&](double d) { return interior_neck_block(1.0, R, 1.0, d)(2, 2); };
    EXPECT_LE(rel(Ia / Ib, b(1e-4) / b(2e-4)), 1e-12);
}

TEST(Pinning, PermeationShare) {
    const Scenario sc = gen_pinning_strip(3, 1.0, 1e-3);
    const SweepRow row = sweep_row(sc, run_scenario(sc));
    EXPECT_GE(row.share_per, 0.99);
    EXPECT_LE(row.max_omega, 0.0);
}

TEST(Pinning, BadInput) {
    EXPECT_THROW(gen_pinning_strip(0, 1.0, 1e-3), Error);
    EXPECT_THROW(gen_pinning_strip(1, 1.0, -1e-3), Error);
}

// ---------------------------------------------------------------------------
// sweeps and fits

TEST(Sweep, LogSpacedDecreasing) {
    const auto v = log_spaced(1e-4, 1e-2, 5);
    ASSERT_EQ(v.size(), 5u);
    EXPECT_NEAR(v.front(), 1e-2, 1e-17);
    EXPECT_NEAR(v.back(), 1e-4, 1e-19);
    EXPECT_NEAR(v[2], 1e-3, 1e-15);
    EXPECT_THROW(log_spaced(1e-2, 1e-4, 5), Error);
}

TEST(Sweep, NonDecreasingRejected) {
    EXPECT_THROW(run_sweep([](double d) { return gen_pinning_strip(1, 1.0, d); }, {1e-3, 1e-2}), Error);
}

TEST(Sweep, PeriodicHexagonalSlope) {
    const SweepTable t =
        run_sweep([](double d) { return hexagonal_scenario(2, 1.0, d); }, log_spaced(1e-4, 1e-2, 5));
    EXPECT_NEAR(fit_exponent(t).slope, -1.5, 0.05);
    for (const auto& r : t.rows) EXPECT_LE(r.max_beta, 1e-8);
}

TEST(Sweep, BoundaryLayerSlope) {
    const SweepTable t = run_sweep([](double d) { return gen_single_disk_boundary_layer(d, 0.5).scenario; },
                                   log_spaced(1e-5, 1e-3, 5));
    EXPECT_NEAR(fit_exponent(t).slope, -2.5, 0.05);
}

TEST(Sweep, ParallelMatchesSerial) {
    const auto make = [](double d) { return gen_single_disk_boundary_layer(d, 0.5).scenario; };
    const auto ds = log_spaced(1e-4, 1e-2, 4);
    const SweepTable a = run_sweep(make, ds, 1), b = run_sweep(make, ds, 3);
    for (size_t k = 0; k < ds.size(); ++k) EXPECT_EQ(a.rows[k].I_total, b.rows[k].I_total);
}

TEST(Fit, SyntheticPowerLaw) {
    std::vector<double> d, v;
    for (double x : log_spaced(1e-5, 1e-1, 9)) {
        d.push_back(x);
        v.push_back(3.7 * std::pow(x, -0.5));
    }
    const ExponentFit f = fit_exponent(d, v);
    EXPECT_NEAR(f.slope, -0.5, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.7, 1e-10);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_EQ(f.points, 9);
}

TEST(Fit, WindowAndTooFewPoints) {
    std::vector<double> d = log_spaced(1e-5, 1e-1, 9), v;
    for (double x : d) v.push_back(std::pow(x, -1.5));
    const ExponentFit f = fit_exponent(d, v, 0.99e-4, 1.01e-2);
    EXPECT_EQ(f.points, 5);
    EXPECT_THROW(fit_exponent(d, v, 0.99e-3, 1.01e-2), Error);
    v[0] = 0;
    EXPECT_THROW(fit_exponent(d, v), Error);
}

// ---------------------------------------------------------------------------
// Korn

TEST(Korn, SevenDiskCluster) {
    const GeneratedConfig g = gen_hexagonal(1, 1.0, 1e-3);
    const KornResult r = korn_check(build_network(g.config, g.domain, 1e-3));
    EXPECT_FALSE(r.degenerate);
    EXPECT_GT(r.C, 0);
    EXPECT_LE(r.C, 1.0);
}

TEST(Korn, SingleNeckIsDegenerate) {
    KornGraph g;
    g.n_free = 1;
    g.edges.push_back({0, -1, Vec2(1, 0)});
    const KornResult r = korn_check(g);
    EXPECT_TRUE(r.degenerate);
    EXPECT_NEAR(r.C, 0.0, 1e-14);
}

TEST(Korn, Disconnected) {
    KornGraph g;
    g.n_free = 3;
    g.edges.push_back({0, -1, Vec2(1, 0)});
    g.edges.push_back({1, 2, Vec2(0, 1)});
    try {
        korn_check(g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "DisconnectedNetwork");
    }
}

TEST(Korn, TriangleMatchesBisection) {
    // one free vertex tied to two fixed ones
    const Vec2 x0(1, std::sqrt(3.0)), fa(0, 0), fb(2, 0);
    auto unit = [](Vec2 a, Vec2 b) { return Vec2((b - a).normalized()); };
    KornGraph g;
    g.n_free = 1;
    g.edges = {{0, -1, unit(x0, fa)}, {0, -1, unit(x0, fb)}};
    const KornResult r = korn_check(g);
    auto [Kq, Kf] = korn_forms(g);
    EXPECT_NEAR(r.C, oracle::min_generalized_eigenvalue(Kq, Kf, 0, 10), 1e-8);
    // q0 = (-1/2, -s3/2), q1 = (1/2, -s3/2): Kq = diag(1/2, 3/2), Kf = 2 I
    EXPECT_NEAR(r.C, 0.25, 1e-12);
    EXPECT_NEAR(r.mode.dot(Kq * r.mode) / r.mode.dot(Kf * r.mode), r.C, 1e-12);
}

TEST(Korn, TrussMatchesBisection) {
    // two free vertices over two fixed ones
    const double h = std::sqrt(3.0);
    const Vec2 x0(1, h), x1(3, h), fa(0, 0), fb(2, 0);
    auto unit = [](Vec2 a, Vec2 b) { return Vec2((b - a).normalized()); };
    KornGraph g;
    g.n_free = 2;
    g.edges = {{0, 1, unit(x0, x1)}, {0, -1, unit(x0, fa)}, {0, -1, unit(x0, fb)}, {1, -1, unit(x1, fb)}};
    const KornResult r = korn_check(g);
    auto [Kq, Kf] = korn_forms(g);
    EXPECT_NEAR(r.C, oracle::min_generalized_eigenvalue(Kq, Kf, 0, 10), 1e-8);
    EXPECT_FALSE(r.degenerate);
}

TEST(Korn, RotationAboutFixedVertexIsAMechanism) {
    const Vec2 x0(2, 0), x1(1, std::sqrt(3.0)), xf(0, 0);
    auto unit = [](Vec2 a, Vec2 b) { return Vec2((b - a).normalized()); };
    KornGraph g;
    g.n_free = 2;
    g.edges = {{0, 1, unit(x0, x1)}, {0, -1, unit(x0, xf)}, {1, -1, unit(x1, xf)}};
    EXPECT_TRUE(korn_check(g).degenerate);
}

TEST(Korn, RigidRotationOfFreeBlockIsPenalized) {
    // a rigid rotation of the whole cluster moves the tie to the fixed walls
    const GeneratedConfig g = gen_jittered_hex(1, 1.0, 1e-3, 0.3, 8);
    const DiskNetwork net = build_network(g.config, g.domain, 1e-3);
    const KornGraph kg = korn_graph(net);
    auto [Kq, Kf] = korn_forms(kg);
    Eigen::VectorXd u(2 * kg.n_free);
    for (int v = 0; v < kg.n_free; ++v) {
        const Vec2 x = net.vertices[v].center;
        u(2 * v) = -x.y();
        u(2 * v + 1) = x.x();
    }
    EXPECT_GE(u.dot(Kq * u), korn_check(kg).C * u.dot(Kf * u) * (1 - 1e-12));
}
