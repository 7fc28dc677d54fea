// Equality-constrained minimization of Q through the KKT system.
#pragma once

#include "suspnet/network_qp.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <set>

namespace suspnet {

struct SolveOptions {
    double tol_residual = 1e-10;      // reported residuals must stay below this
    double tol_inconsistent = 1e-8;   // constraint residual that signals an infeasible system
    int dense_limit = 4000;           // KKT size above which the sparse LU is used
    int refinement_steps = 2;
};

struct SolveResult {
    Eigen::VectorXd z;
    DiscreteState state;                 // filled by the network-level helpers
    Eigen::VectorXd multipliers;         // per constraint row; dI/d(rhs) = 2 * multiplier
    std::vector<bool> dropped;           // rows left out as dependent
    double I_total = 0;
    std::array<double, 3> I_split{};     // coefficients of delta^-5/2, -3/2, -1/2
    double constraint_residual = 0;      // relative
    double stationarity_residual = 0;    // relative
};

namespace detail {

inline double inf_norm(const Eigen::SparseMatrix<double>& M) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(M.rows());
    for (int k = 0; k < M.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it) r(it.row()) += std::abs(it.value());
    return r.size() ? r.maxCoeff() : 0.0;
}

}  // namespace detail

inline SolveResult solve(const QuadraticModel& model, const ConstraintSystem& cs, const SolveOptions& opt = {}) {
    using SpMat = Eigen::SparseMatrix<double>;
    const int n = model.n;
    if (cs.A.cols() != n) fail(ErrorKind::Validation, "DimensionMismatch", "constraint columns");
    const auto& rows = cs.independent;
    const int r = static_cast<int>(rows.size());

    // Jacobi scaling of the unknowns, unit row norms for the constraints
    Eigen::VectorXd D(n);
    for (int i = 0; i < n; ++i) {
        const double p = model.P.coeff(i, i);
        D(i) = p > 0 ? 1.0 / std::sqrt(p) : 1.0;
    }
    SpMat Asel(r, n);
    {
        std::vector<Eigen::Triplet<double>> t;
        SpMat Arow = cs.A;  // column major; walk and keep selected rows
        std::vector<int> pos(cs.A.rows(), -1);
        for (int k = 0; k < r; ++k) pos[rows[k]] = k;
        for (int k = 0; k < Arow.outerSize(); ++k)
            for (SpMat::InnerIterator it(Arow, k); it; ++it)
                if (pos[it.row()] >= 0) t.emplace_back(pos[it.row()], it.col(), it.value());
        Asel.setFromTriplets(t.begin(), t.end());
    }
    Eigen::VectorXd bsel(r);
    for (int k = 0; k < r; ++k) bsel(k) = cs.rhs(rows[k]);
    SpMat As = Asel * D.asDiagonal();
    Eigen::VectorXd Rr(r);
    for (int k = 0; k < r; ++k) {
        const double nr = Eigen::VectorXd(As.row(k).transpose()).norm();
        Rr(k) = nr > 0 ? 1.0 / nr : 1.0;
    }
    As = Rr.asDiagonal() * As;
    const SpMat Ps = D.asDiagonal() * model.P * D.asDiagonal();
    const Eigen::VectorXd gs = D.cwiseProduct(model.g), bs = Rr.cwiseProduct(bsel);

    const int m = n + r;
    std::vector<Eigen::Triplet<double>> kt;
    for (int k = 0; k < Ps.outerSize(); ++k)
        for (SpMat::InnerIterator it(Ps, k); it; ++it) kt.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < As.outerSize(); ++k)
        for (SpMat::InnerIterator it(As, k); it; ++it) {
            kt.emplace_back(n + it.row(), it.col(), it.value());
            kt.emplace_back(it.col(), n + it.row(), it.value());
        }
    SpMat K(m, m);
    K.setFromTriplets(kt.begin(), kt.end());
    Eigen::VectorXd rhs(m);
    rhs << -gs, bs;

    Eigen::VectorXd sol;
    if (m <= opt.dense_limit) {
        const Eigen::MatrixXd Kd(K);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Kd);
        if (!(lu.rcond() > 1e-15)) fail(ErrorKind::Numeric, "SingularKKT", "reciprocal condition " + std::to_string(lu.rcond()));
        sol = lu.solve(rhs);
        for (int it = 0; it < opt.refinement_steps; ++it) sol += lu.solve(rhs - Kd * sol);
    } else {
        Eigen::SparseLU<SpMat> lu;
        lu.compute(K);
        if (lu.info() != Eigen::Success) fail(ErrorKind::Numeric, "SingularKKT", "sparse factorization failed");
        sol = lu.solve(rhs);
        for (int it = 0; it < opt.refinement_steps; ++it) sol += lu.solve(rhs - K * sol);
    }
    if (!sol.allFinite()) fail(ErrorKind::Numeric, "SingularKKT", "non-finite solution");

    SolveResult res;
    res.z = D.cwiseProduct(sol.head(n));
    const Eigen::VectorXd msel = Rr.cwiseProduct(sol.tail(r));
    res.multipliers = Eigen::VectorXd::Zero(cs.A.rows());
    res.dropped.assign(cs.A.rows(), true);
    for (int k = 0; k < r; ++k) {
        res.multipliers(rows[k]) = -msel(k);
        res.dropped[rows[k]] = false;
    }

    const double zinf = res.z.size() ? res.z.lpNorm<Eigen::Infinity>() : 0.0;
    const double binf = cs.rhs.size() ? cs.rhs.lpNorm<Eigen::Infinity>() : 0.0;
    const Eigen::VectorXd cres = cs.A * res.z - cs.rhs;
    const double cscale = detail::inf_norm(cs.A) * zinf + binf;
    res.constraint_residual = cres.size() ? cres.lpNorm<Eigen::Infinity>() / (cscale > 0 ? cscale : 1.0) : 0.0;
    if (res.constraint_residual > opt.tol_inconsistent)
        fail(ErrorKind::Numeric, "InconsistentConstraints",
             "relative residual " + std::to_string(res.constraint_residual));
    const Eigen::VectorXd st = model.P * res.z + model.g + Asel.transpose() * msel;
    const double sscale = detail::inf_norm(model.P) * zinf + (n ? model.g.lpNorm<Eigen::Infinity>() : 0.0);
    res.stationarity_residual = n ? st.lpNorm<Eigen::Infinity>() / (sscale > 0 ? sscale : 1.0) : 0.0;

    res.I_total = model.eval(res.z);
    res.I_split = power_split(model, res.z);
    return res;
}

// ---------------------------------------------------------------------------
// Definiteness

struct DefinitenessReport {
    bool positive_definite = false;
    bool semidefinite = false;
    double min_pivot = 0, max_pivot = 0;
    int offending_edge = -1;
    std::string message;
};

// 3x3 interior block over (s, w, beta) with w = R(wi - wj).
inline Eigen::Matrix3d interior_neck_block(double d, double R, double mu, double delta) {
    const CoefficientTable c = make_coefficients(d, R, mu);
    auto dp = [&](double p) { return std::pow(delta, -p); };
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    M(0, 0) = c.C[2] * dp(1.5) + c.C[3] * dp(0.5);
    M(1, 1) = c.C[9] * dp(0.5);
    M(2, 2) = c.C[4] * dp(2.5) + c.C[5] * dp(1.5) + c.C[6] * dp(0.5);
    M(1, 2) = M(2, 1) = 0.5 * (c.C[7] * dp(1.5) + c.C[8] * dp(0.5));
    return M;
}

// Hessian of the atoms of one neck restricted to the unknowns they touch.
inline std::pair<std::vector<int>, Eigen::MatrixXd> neck_hessian(const QuadraticModel& m, int edge) {
    std::vector<int> idx;
    for (const auto& a : m.atoms)
        if (a.edge == edge) {
            for (auto& t : a.a.terms) idx.push_back(t.first);
            for (auto& t : a.b.terms) idx.push_back(t.first);
        }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    auto loc = [&](int i) { return static_cast<int>(std::lower_bound(idx.begin(), idx.end(), i) - idx.begin()); };
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(idx.size(), idx.size());
    for (const auto& a : m.atoms) {
        if (a.edge != edge) continue;
        for (auto& [i, vi] : a.a.terms)
            for (auto& [j, vj] : a.b.terms) {
                H(loc(i), loc(j)) += 0.5 * a.weight * vi * vj;
                H(loc(j), loc(i)) += 0.5 * a.weight * vi * vj;
            }
    }
    return {idx, H};
}

inline DefinitenessReport check_positive_definite(const QuadraticModel& m) {
    DefinitenessReport rep;
    if (m.n == 0) {
        rep.positive_definite = true;
        rep.message = "empty model";
        return rep;
    }
    const Eigen::MatrixXd P(m.P);
    Eigen::VectorXd D(m.n);
    for (int i = 0; i < m.n; ++i) D(i) = P(i, i) > 0 ? 1.0 / std::sqrt(P(i, i)) : 1.0;
    const Eigen::MatrixXd S = D.asDiagonal() * P * D.asDiagonal();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    const Eigen::VectorXd piv = ldlt.vectorD();
    rep.min_pivot = piv.minCoeff();
    rep.max_pivot = piv.cwiseAbs().maxCoeff();
    if (rep.max_pivot == 0) {
        rep.semidefinite = true;
        rep.message = "all pivots vanish";
        return rep;
    }
    const double tol = 1e-13 * rep.max_pivot;
    if (ldlt.info() == Eigen::Success && rep.min_pivot > tol) {
        rep.positive_definite = rep.semidefinite = true;
        rep.message = "positive definite";
        return rep;
    }
    rep.semidefinite = rep.min_pivot > -tol;
    // locate a neck whose own block is indefinite
    int edges = 0;
    for (const auto& a : m.atoms) edges = std::max(edges, a.edge + 1);
    for (int e = 0; e < edges; ++e) {
        auto [idx, H] = neck_hessian(m, e);
        if (idx.empty()) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.eigenvalues().minCoeff() < -1e-12 * es.eigenvalues().cwiseAbs().maxCoeff()) {
            rep.offending_edge = e;
            break;
        }
    }
    rep.message = rep.offending_edge >= 0 ? "indefinite block at edge " + std::to_string(rep.offending_edge)
                                          : "singular or indefinite Hessian";
    return rep;
}

// ---------------------------------------------------------------------------
// Network-level helpers

inline SolveResult solve_network(const DiskNetwork& net, const BoundaryData& A, const AssemblyOptions& opt = {},
                                 const SolveOptions& sopt = {}) {
    const QuadraticModel m = assemble_Q(net, net.mu, A, opt);
    const ConstraintSystem cs = assemble_constraints(net, A, opt);
    SolveResult r = solve(m, cs, sopt);
    r.state = state_from_vector(net, all_boundary_values(net, A, opt.quasidisk_velocity), r.z);
    return r;
}

struct PinnedSet {
    std::set<int> vertices;              // interior disks with U = 0, omega = 0
    std::map<int, Vec2> translation;     // interior disks with a prescribed U only
    std::map<int, double> edge_beta;     // imposed beta per edge
    bool empty() const { return vertices.empty() && translation.empty() && edge_beta.empty(); }
};

// Appends freezing rows to the constraint system and recomputes the
// independent set. Face rows keep their indices.
inline ConstraintSystem pin_constraints(const DiskNetwork& net, const ConstraintSystem& cs, const PinnedSet& pins) {
    const Layout L = layout_of(net);
    std::vector<std::pair<int, double>> extra;
    for (int v : pins.vertices) {
        if (v < 0 || v >= net.n_interior) fail(ErrorKind::Config, "BadPin", "vertex " + std::to_string(v));
        extra.push_back({L.U(v, 0), 0.0});
        extra.push_back({L.U(v, 1), 0.0});
        extra.push_back({L.W(v), 0.0});
    }
    for (auto& [v, U] : pins.translation) {
        if (v < 0 || v >= net.n_interior) fail(ErrorKind::Config, "BadPin", "vertex " + std::to_string(v));
        extra.push_back({L.U(v, 0), U.x()});
        extra.push_back({L.U(v, 1), U.y()});
    }
    for (auto& [e, b] : pins.edge_beta) {
        if (e < 0 || e >= L.n_edges) fail(ErrorKind::Config, "BadPin", "edge " + std::to_string(e));
        extra.push_back({L.B(e), b});
    }
    ConstraintSystem out;
    const int m0 = static_cast<int>(cs.A.rows()), m = m0 + static_cast<int>(extra.size());
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < cs.A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(cs.A, k); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value());
    out.rhs = Eigen::VectorXd::Zero(m);
    out.rhs.head(m0) = cs.rhs;
    for (size_t k = 0; k < extra.size(); ++k) {
        t.emplace_back(m0 + static_cast<int>(k), extra[k].first, 1.0);
        out.rhs(m0 + static_cast<int>(k)) = extra[k].second;
    }
    out.A.resize(m, cs.A.cols());
    out.A.setFromTriplets(t.begin(), t.end());
    out.independent = independent_rows(Eigen::MatrixXd(out.A), out.rank_tol);
    return out;
}

inline SolveResult pinned_solve(const QuadraticModel& model, const ConstraintSystem& cs, const DiskNetwork& net,
                                const PinnedSet& pins, const SolveOptions& opt = {}) {
    if (pins.empty()) return solve(model, cs, opt);
    return solve(model, pin_constraints(net, cs, pins), opt);
}

}  // namespace suspnet
