// Boundary data, weak incompressibility rows and the discrete dissipation
// form Q over a disk network.
//
// Global conventions: q points from edge.i to edge.j, p = rotate_cw(q),
// angular velocities are positive clockwise and beta is the flux along +p.
// In these variables the per-neck forms keep the published coefficients.
#pragma once

#include "suspnet/core.hpp"
#include "suspnet/geometry.hpp"
#include "suspnet/lubrication.hpp"

#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace suspnet {

struct BoundaryData {
    double a = 0, b = 0, c = 0;

    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d A;
        A << a, b, c, -a;
        return A;
    }
    Vec2 operator()(const Vec2& x) const { return matrix() * x; }
    bool zero() const { return a == 0 && b == 0 && c == 0; }
};

inline void check_boundary_data(const BoundaryData& A) {
    if (!(std::isfinite(A.a) && std::isfinite(A.b) && std::isfinite(A.c)))
        fail(ErrorKind::Config, "BadBoundaryData", "non-finite entry");
    if (A.a == 0 && A.c != 0 && A.b == -1 / A.c)
        fail(ErrorKind::Config, "RigidBoundaryData", "a = 0 and b = -1/c describes a rigid motion");
}

// How the translational velocity of a quasidisk is read off the boundary data.
//   Field:   U = A x_q, the boundary velocity at the quasidisk center.
//   Printed: U = (a x, c x) on lateral sides and (b y, -a y) on top/bottom,
//            i.e. only the wall-normal coordinate of x_q enters.
enum class QuasidiskVelocity { Field, Printed };

struct BoundaryValue {
    Vec2 U{0, 0};
    double omega = 0;  // clockwise
    double tau = 0;    // tangential stretch rate t.A.t along the wall
};

inline BoundaryValue boundary_values(const Vertex& v, const BoundaryData& A,
                                     QuasidiskVelocity mode = QuasidiskVelocity::Field) {
    if (v.kind != VertexKind::Quasidisk || v.side == Side::None)
        fail(ErrorKind::Validation, "NotQuasidisk", "vertex " + std::to_string(v.index));
    const Eigen::Matrix2d M = A.matrix();
    const Vec2 n = outward_normal(v.side), t = rotate_cw(n);
    BoundaryValue out;
    if (mode == QuasidiskVelocity::Field) {
        out.U = M * v.center;
    } else {
        const bool lateral = v.side == Side::LatLeft || v.side == Side::LatRight;
        const double x = v.center.x(), y = v.center.y();
        out.U = lateral ? Vec2(A.a * x, A.c * x) : Vec2(A.b * y, -A.a * y);
    }
    // the wall's normal velocity varies as (n.A.t) s along t = rotate_cw(n),
    // which is a clockwise spin of -(n.A.t)
    out.omega = -n.dot(M * t);
    out.tau = t.dot(M * t);
    return out;
}

// Exact outward flux of A x through a wall path, divided by R.
inline double boundary_flux(const DiskNetwork& net, const WallSegment& w, const BoundaryData& A) {
    if (net.interior(w.a) || net.interior(w.b)) fail(ErrorKind::Validation, "NotBoundarySegment", "endpoint is a disk");
    return wall_flux(w.path, A, net.domain, net.R);
}

// beta = beta* - (delta/2R)(Ui+Uj).p - (wi-wj)(delta/2)(1 + delta/4R)
inline double beta_translation_factor(double delta, double R) { return delta / (2 * R); }
inline double beta_rotation_factor(double delta, double R) { return 0.5 * delta * (1 + delta / (4 * R)); }

inline double beta_transform(double beta_star, const Vec2& Ui, const Vec2& Uj, double wi, double wj, double delta,
                             double R, const Vec2& p) {
    return beta_star - beta_translation_factor(delta, R) * (Ui + Uj).dot(p) - (wi - wj) * beta_rotation_factor(delta, R);
}

inline double beta_transform_inverse(double beta, const Vec2& Ui, const Vec2& Uj, double wi, double wj, double delta,
                                     double R, const Vec2& p) {
    return beta + beta_translation_factor(delta, R) * (Ui + Uj).dot(p) + (wi - wj) * beta_rotation_factor(delta, R);
}

// ---------------------------------------------------------------------------
// Unknowns: interior U (2 per disk), interior omega, then one beta per edge.

struct Layout {
    int n_disks = 0, n_edges = 0;
    int U(int v, int c) const { return 2 * v + c; }
    int W(int v) const { return 2 * n_disks + v; }
    int B(int e) const { return 3 * n_disks + e; }
    int size() const { return 3 * n_disks + n_edges; }
};

inline Layout layout_of(const DiskNetwork& net) { return {net.n_interior, static_cast<int>(net.edges.size())}; }

struct DiscreteState {
    std::vector<Vec2> U;        // per vertex
    std::vector<double> omega;  // per vertex
    std::vector<double> beta;   // per edge
};

struct AssemblyOptions {
    QuasidiskVelocity quasidisk_velocity = QuasidiskVelocity::Field;
    std::map<int, double> wall_flux_override;  // wall index -> outward flux / R
};

// Fixed quasidisk values for every vertex (zero for disks).
inline std::vector<BoundaryValue> all_boundary_values(const DiskNetwork& net, const BoundaryData& A,
                                                      QuasidiskVelocity mode) {
    std::vector<BoundaryValue> bv(net.vertices.size());
    for (const auto& v : net.vertices)
        if (v.kind == VertexKind::Quasidisk) bv[v.index] = boundary_values(v, A, mode);
    return bv;
}

inline DiscreteState state_from_vector(const DiskNetwork& net, const std::vector<BoundaryValue>& bv,
                                       const Eigen::VectorXd& z) {
    const Layout L = layout_of(net);
    if (z.size() != L.size()) fail(ErrorKind::Validation, "DimensionMismatch", "unknown vector size");
    DiscreteState s;
    s.U.resize(net.vertices.size());
    s.omega.resize(net.vertices.size());
    for (size_t v = 0; v < net.vertices.size(); ++v) {
        if (net.interior(static_cast<int>(v))) {
            s.U[v] = Vec2(z(L.U(v, 0)), z(L.U(v, 1)));
            s.omega[v] = z(L.W(v));
        } else {
            s.U[v] = bv[v].U;
            s.omega[v] = bv[v].omega;
        }
    }
    s.beta.resize(net.edges.size());
    for (int e = 0; e < L.n_edges; ++e) s.beta[e] = z(L.B(e));
    return s;
}

inline Eigen::VectorXd vector_from_state(const DiskNetwork& net, const DiscreteState& s) {
    const Layout L = layout_of(net);
    if (s.U.size() != net.vertices.size() || s.omega.size() != net.vertices.size() ||
        s.beta.size() != net.edges.size())
        fail(ErrorKind::Validation, "DimensionMismatch", "state does not match the network");
    Eigen::VectorXd z(L.size());
    for (int v = 0; v < L.n_disks; ++v) {
        z(L.U(v, 0)) = s.U[v].x();
        z(L.U(v, 1)) = s.U[v].y();
        z(L.W(v)) = s.omega[v];
    }
    for (int e = 0; e < L.n_edges; ++e) z(L.B(e)) = s.beta[e];
    return z;
}

// Affine functional c + sum coef * z[idx].
struct Affine {
    std::vector<std::pair<int, double>> terms;
    double c = 0;

    void add(int idx, double v) {
        if (v == 0) return;
        for (auto& t : terms)
            if (t.first == idx) { t.second += v; return; }
        terms.push_back({idx, v});
    }
    double eval(const Eigen::VectorXd& z) const {
        double s = c;
        for (auto& [i, v] : terms) s += v * z(i);
        return s;
    }
};

// ---------------------------------------------------------------------------
// Constraints

struct ConstraintSystem {
    Eigen::SparseMatrix<double> A;  // one row per face
    Eigen::VectorXd rhs;
    std::vector<int> independent;   // selected rows, ascending
    double rank_tol = 0;
    int rank() const { return static_cast<int>(independent.size()); }
};

// Row of the face constraint: sum of signed beta* over necks plus the arc and
// wall fluxes, with beta* replaced by beta through the inverse transform.
inline Affine face_row(const DiskNetwork& net, const ConstraintFace& f, const std::vector<BoundaryValue>& bv,
                       const BoundaryData& A, const AssemblyOptions& opt) {
    const Layout L = layout_of(net);
    Affine row;
    auto add_U = [&](int v, const Vec2& p, double w) {
        if (net.interior(v)) {
            row.add(L.U(v, 0), w * p.x());
            row.add(L.U(v, 1), w * p.y());
        } else {
            row.c += w * bv[v].U.dot(p);
        }
    };
    auto add_W = [&](int v, double w) {
        if (net.interior(v)) row.add(L.W(v), w);
        else row.c += w * bv[v].omega;
    };
    const Eigen::Matrix2d M = A.matrix();
    const int nv = f.vertex_count();
    for (int k = 0; k < static_cast<int>(f.sides.size()); ++k) {
        const FaceSide& side = f.sides[k];
        if (side.kind == FaceSide::Wall) {
            auto it = opt.wall_flux_override.find(side.index);
            row.c += it != opt.wall_flux_override.end() ? it->second : boundary_flux(net, net.walls[side.index], A);
            continue;
        }
        const NeckEdge& E = net.edges[side.index];
        const double s = side.sign;
        const double kt = beta_translation_factor(E.delta, net.R), kr = beta_rotation_factor(E.delta, net.R);
        row.add(L.B(side.index), s);
        if (!f.vertex_shift.empty()) {
            // a vertex drawn at a periodic image moves with U + A shift
            const Vec2 sa = f.vertex_shift[k], sb = f.vertex_shift[(k + 1) % nv];
            const Vec2 si = s > 0 ? sa : sb, sj = s > 0 ? sb : sa;
            row.c += s * (kt + (net.interior(E.i) ? 1.0 : 0.0)) * (M * si).dot(E.p);
            row.c += s * (kt + (net.interior(E.j) ? 1.0 : 0.0)) * (M * sj).dot(E.p);
        }
        add_U(E.i, E.p, s * kt);
        add_U(E.j, E.p, s * kt);
        add_W(E.i, s * kr);
        add_W(E.j, -s * kr);
        // arc fluxes of the disks at the two ends
        if (net.interior(E.i)) add_U(E.i, E.p, s);
        if (net.interior(E.j)) add_U(E.j, E.p, s);
    }
    return row;
}

// Rows are normalized before the pivoted QR of A^T; the pivot order picks the
// independent subset with ties resolved by face index.
inline std::vector<int> independent_rows(const Eigen::MatrixXd& Ad, double& tol_out) {
    const int m = static_cast<int>(Ad.rows());
    if (m == 0) { tol_out = 0; return {}; }
    Eigen::MatrixXd S = Ad;
    for (int r = 0; r < m; ++r) {
        const double nr = S.row(r).norm();
        if (nr > 0) S.row(r) /= nr;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S.transpose());
    const Eigen::MatrixXd& Rm = qr.matrixR();
    const int k = static_cast<int>(std::min(Rm.rows(), Rm.cols()));
    double rmax = 0;
    for (int i = 0; i < k; ++i) rmax = std::max(rmax, std::abs(Rm(i, i)));
    const double tol = 1e-12 * std::max(rmax, 1e-300);
    tol_out = tol;
    std::vector<int> rows;
    for (int i = 0; i < k; ++i) {
        const double r = std::abs(Rm(i, i));
        if (r > tol && r < 1e3 * tol)
            fail(ErrorKind::Numeric, "RankToleranceAmbiguous", "pivot " + std::to_string(r / rmax) + " of max");
        if (r > tol) rows.push_back(qr.colsPermutation().indices()(i));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

inline ConstraintSystem assemble_constraints(const DiskNetwork& net, const BoundaryData& A,
                                             const AssemblyOptions& opt = {}) {
    check_boundary_data(A);
    const Layout L = layout_of(net);
    const auto bv = all_boundary_values(net, A, opt.quasidisk_velocity);
    const int m = static_cast<int>(net.faces.size());
    std::vector<Eigen::Triplet<double>> trip;
    ConstraintSystem cs;
    cs.rhs = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < m; ++r) {
        const Affine row = face_row(net, net.faces[r], bv, A, opt);
        for (auto& [i, v] : row.terms) trip.emplace_back(r, i, v);
        cs.rhs(r) = -row.c;
    }
    cs.A.resize(m, L.size());
    cs.A.setFromTriplets(trip.begin(), trip.end());
    cs.independent = independent_rows(Eigen::MatrixXd(cs.A), cs.rank_tol);
    return cs;
}

// ---------------------------------------------------------------------------
// Quadratic form

// One product coef * (a.z + a0)(b.z + b0), tagged with its neck and term.
struct QAtom {
    int edge = -1;
    Term term = Term::ShearSq;
    std::string label;   // C1..C9, B1..B14
    double power = 0;    // multiplies delta_ref^-power
    double coef = 0;     // coefficient C_k(d_ij), without delta_ref^-power
    double weight = 0;   // coef * delta_ref^-power
    Affine a, b;

    double eval(const Eigen::VectorXd& z) const { return weight * a.eval(z) * b.eval(z); }
};

// Q(z) = z.P.z + 2 g.z + k over the free unknowns.
struct QuadraticModel {
    int n = 0;
    double delta_ref = 1;
    Eigen::SparseMatrix<double> P;
    Eigen::VectorXd g;
    double k = 0;
    std::vector<QAtom> atoms;

    double eval(const Eigen::VectorXd& z) const { return z.dot(P * z) + 2 * g.dot(z) + k; }
};

enum class MicroflowGroup { ShearIn, SqueezeIn, PermIn, PermB, SqueezeB };

inline MicroflowGroup group_of(Term t) {
    switch (t) {
        case Term::ShearSq: return MicroflowGroup::ShearIn;
        case Term::SqueezeSq: return MicroflowGroup::SqueezeIn;
        case Term::PermSq:
        case Term::RotPerm:
        case Term::RotSq: return MicroflowGroup::PermIn;
        case Term::BSqueezeSq:
        case Term::BSqueezeStrain: return MicroflowGroup::SqueezeB;
        default: return MicroflowGroup::PermB;
    }
}

inline const char* group_name(MicroflowGroup g) {
    switch (g) {
        case MicroflowGroup::ShearIn: return "Q_sh_in";
        case MicroflowGroup::SqueezeIn: return "Q_sq_in";
        case MicroflowGroup::PermIn: return "Q_per_in";
        case MicroflowGroup::PermB: return "Q_per_b";
        case MicroflowGroup::SqueezeB: return "Q_sq_b";
    }
    return "?";
}

// Linear amplitudes of one neck in global variables.
struct NeckAmplitudes {
    Affine shear, squeeze, beta, rot;   // interior: xi, s, beta, R(wi-wj)
    Affine bS, bW, bOm, bRa;            // boundary: S, W, Omega, R tau
};

inline NeckAmplitudes neck_amplitudes(const DiskNetwork& net, int e, const std::vector<BoundaryValue>& bv,
                                      const BoundaryData& A) {
    const Layout L = layout_of(net);
    const NeckEdge& E = net.edges[e];
    const double R = net.R;
    auto U_dot = [&](Affine& f, int v, const Vec2& d, double w) {
        if (net.interior(v)) {
            f.add(L.U(v, 0), w * d.x());
            f.add(L.U(v, 1), w * d.y());
        } else {
            f.c += w * bv[v].U.dot(d);
        }
    };
    auto Om = [&](Affine& f, int v, double w) {
        if (net.interior(v)) f.add(L.W(v), w);
        else f.c += w * bv[v].omega;
    };
    NeckAmplitudes a;
    a.beta.add(L.B(e), 1.0);
    const Vec2 img = A.matrix() * E.shift;
    if (E.kind == NeckKind::InteriorInterior) {
        U_dot(a.shear, E.i, E.p, 1);
        U_dot(a.shear, E.j, E.p, -1);
        a.shear.c -= img.dot(E.p);
        Om(a.shear, E.i, R);
        Om(a.shear, E.j, R);
        U_dot(a.squeeze, E.i, E.q, -1);
        U_dot(a.squeeze, E.j, E.q, 1);
        a.squeeze.c += img.dot(E.q);
        Om(a.rot, E.i, R);
        Om(a.rot, E.j, -R);
    } else {
        U_dot(a.bS, E.i, E.p, 1);
        U_dot(a.bS, E.j, E.p, -1);
        Om(a.bS, E.i, R);
        Om(a.bW, E.i, R);
        Om(a.bW, E.j, -R);
        Om(a.bOm, E.i, R);
        U_dot(a.squeeze, E.i, E.q, -1);
        U_dot(a.squeeze, E.j, E.q, 1);
        a.bRa.c = R * bv[E.j].tau;
    }
    return a;
}

inline std::vector<QAtom> neck_atoms(const DiskNetwork& net, int e, const std::vector<BoundaryValue>& bv,
                                     const BoundaryData& A, double mu) {
    const NeckEdge& E = net.edges[e];
    const NeckAmplitudes am = neck_amplitudes(net, e, bv, A);
    std::vector<QAtom> out;
    auto pair_of = [&](Term t) -> std::pair<const Affine*, const Affine*> {
        switch (t) {
            case Term::ShearSq: return {&am.shear, &am.shear};
            case Term::SqueezeSq: return {&am.squeeze, &am.squeeze};
            case Term::PermSq: return {&am.beta, &am.beta};
            case Term::RotPerm: return {&am.rot, &am.beta};
            case Term::RotSq: return {&am.rot, &am.rot};
            case Term::BPermSq: return {&am.beta, &am.beta};
            case Term::BShearSq: return {&am.bS, &am.bS};
            case Term::BRotSq: return {&am.bW, &am.bW};
            case Term::BSqueezeSq: return {&am.squeeze, &am.squeeze};
            case Term::BPermShear: return {&am.beta, &am.bS};
            case Term::BPermRot: return {&am.beta, &am.bW};
            case Term::BPermSpin: return {&am.beta, &am.bOm};
            case Term::BShearRot: return {&am.bS, &am.bW};
            case Term::BSqueezeStrain: return {&am.squeeze, &am.bRa};
        }
        return {nullptr, nullptr};
    };
    const bool boundary = E.kind == NeckKind::InteriorBoundary;
    for (const auto& entry : coefficient_catalog()) {
        if ((entry.label[0] == 'B') != boundary) continue;
        auto [pa, pb] = pair_of(entry.term);
        QAtom q;
        q.edge = e;
        q.term = entry.term;
        q.label = entry.label;
        q.power = entry.power;
        q.coef = coeff_value(entry, E.d, net.R, mu);
        q.weight = q.coef * std::pow(net.delta_ref, -entry.power);
        q.a = *pa;
        q.b = *pb;
        out.push_back(std::move(q));
    }
    return out;
}

inline QuadraticModel assemble_Q(const DiskNetwork& net, double mu, const BoundaryData& A,
                                 const AssemblyOptions& opt = {}) {
    check_boundary_data(A);
    if (!(mu >= 0)) fail(ErrorKind::Config, "BadConfig", "viscosity must be non-negative");
    const Layout L = layout_of(net);
    const auto bv = all_boundary_values(net, A, opt.quasidisk_velocity);
    QuadraticModel m;
    m.n = L.size();
    m.delta_ref = net.delta_ref;
    m.g = Eigen::VectorXd::Zero(m.n);
    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < L.n_edges; ++e) {
        for (auto& q : neck_atoms(net, e, bv, A, mu)) {
            const double h = 0.5 * q.weight;
            for (auto& [i, vi] : q.a.terms)
                for (auto& [j, vj] : q.b.terms) {
                    trip.emplace_back(i, j, h * vi * vj);
                    trip.emplace_back(j, i, h * vi * vj);
                }
            for (auto& [i, vi] : q.a.terms) m.g(i) += h * vi * q.b.c;
            for (auto& [j, vj] : q.b.terms) m.g(j) += h * vj * q.a.c;
            m.k += q.weight * q.a.c * q.b.c;
            m.atoms.push_back(std::move(q));
        }
    }
    m.P.resize(m.n, m.n);
    m.P.setFromTriplets(trip.begin(), trip.end());
    return m;
}

// Per-atom values of a state, in atom order.
inline std::vector<double> atom_values(const QuadraticModel& m, const Eigen::VectorXd& z) {
    std::vector<double> v;
    v.reserve(m.atoms.size());
    for (const auto& a : m.atoms) v.push_back(a.eval(z));
    return v;
}

inline std::array<double, 5> microflow_split(const QuadraticModel& m, const Eigen::VectorXd& z) {
    if (z.size() != m.n) fail(ErrorKind::Validation, "DimensionMismatch", "state size");
    std::array<double, 5> s{};
    for (const auto& a : m.atoms) s[static_cast<int>(group_of(a.term))] += a.eval(z);
    return s;
}

inline std::array<double, 5> microflow_split(const DiscreteState& state, const DiskNetwork& net,
                                             const QuadraticModel& m) {
    return microflow_split(m, vector_from_state(net, state));
}

// Coefficients of delta_ref^-5/2, ^-3/2, ^-1/2.
inline std::array<double, 3> power_split(const QuadraticModel& m, const Eigen::VectorXd& z) {
    std::array<double, 3> s{};
    for (const auto& a : m.atoms) {
        const double v = a.coef * a.a.eval(z) * a.b.eval(z);
        if (a.power == 2.5) s[0] += v;
        else if (a.power == 1.5) s[1] += v;
        else s[2] += v;
    }
    return s;
}

// Sum of atoms belonging to one neck.
inline double neck_value(const QuadraticModel& m, const Eigen::VectorXd& z, int edge) {
    double s = 0;
    for (const auto& a : m.atoms)
        if (a.edge == edge) s += a.eval(z);
    return s;
}

}  // namespace suspnet
