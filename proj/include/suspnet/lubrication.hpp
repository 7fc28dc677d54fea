// Per-neck lubrication: closed-form coefficients, explicit trial and dual
// fields, and a quadrature oracle for their dissipation integrals.
//
// Neck coordinates: x is transverse, y runs along the line of centers.
// Interior necks occupy |y| < H(x)/2 with disk i on the upper side.
// Boundary necks occupy 0 < y < H(x)/2 with the wall at y = 0; their
// parameter delta is the gap to the mirror disk, so the wall clearance is delta/2.
#pragma once

#include "suspnet/core.hpp"
#include "suspnet/jet.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace suspnet {

struct GapFunction {
    double delta = 0.0;
    double R = 1.0;
    NeckKind kind = NeckKind::InteriorInterior;
};

// R - sqrt(R^2 - x^2) without cancellation
template <class T>
T sag(const T& x, double R) {
    using std::sqrt;
    return x * x / (R + sqrt(R * R - x * x));
}

inline double gap(double x, const GapFunction& g) {
    if (std::abs(x) >= g.R) fail(ErrorKind::Numeric, "OutOfNeck", "|x| >= R");
    const double s = sag(x, g.R);
    return g.kind == NeckKind::InteriorInterior ? g.delta + 2.0 * s : g.delta + s;
}

// ---------------------------------------------------------------------------
// Coefficient table

enum class Term {
    ShearSq, SqueezeSq, PermSq, RotPerm, RotSq,
    BPermSq, BShearSq, BRotSq, BSqueezeSq, BPermShear, BPermRot, BPermSpin, BShearRot, BSqueezeStrain
};

struct TableEntry {
    std::string label;  // C1..C9, B1..B14
    Term term;
    double power;    // coefficient of (R/d)^power, multiplies delta^-power in Q
    double value;    // multiple of pi*mu used by the model
    double printed;  // published value, kept for reporting
};

// Values agree with quadrature of the explicit trial fields. Where the
// published table differs (C3, C7-C9, B8-B14) the quadrature value is used.
inline const std::vector<TableEntry>& coefficient_catalog() {
    static const std::vector<TableEntry> t = {
        {"C1", Term::ShearSq, 0.5, 1.0 / 2.0, 1.0 / 2.0},
        {"C2", Term::SqueezeSq, 1.5, 3.0 / 4.0, 3.0 / 4.0},
        {"C3", Term::SqueezeSq, 0.5, 207.0 / 160.0, 207.0 / 320.0},
        {"C4", Term::PermSq, 2.5, 9.0 / 4.0, 9.0 / 4.0},
        {"C5", Term::PermSq, 1.5, 99.0 / 160.0, 99.0 / 160.0},
        {"C6", Term::PermSq, 0.5, 29241.0 / 17920.0, 29241.0 / 17920.0},
        {"C7", Term::RotPerm, 1.5, -3.0 / 4.0, -3.0},
        {"C8", Term::RotPerm, 0.5, 45.0 / 32.0, 9.0 / 40.0},
        {"C9", Term::RotSq, 0.5, 9.0 / 16.0, 3.0 / 2.0},
        {"B1", Term::BPermSq, 2.5, 18.0, 18.0},
        {"B2", Term::BPermSq, 1.5, 51.0 / 20.0, 51.0 / 20.0},
        {"B3", Term::BPermSq, 0.5, 20889.0 / 2240.0, 20889.0 / 2240.0},
        {"B4", Term::BShearSq, 0.5, 4.0, 4.0},
        {"B5", Term::BRotSq, 0.5, 9.0 / 2.0, 9.0 / 2.0},
        {"B6", Term::BSqueezeSq, 1.5, 6.0, 6.0},
        {"B7", Term::BSqueezeSq, 0.5, 63.0 / 20.0, 63.0 / 20.0},
        {"B8", Term::BPermShear, 1.5, 12.0, 6.0},
        {"B9", Term::BPermShear, 0.5, 19.0 / 10.0, 19.0 / 20.0},
        {"B10", Term::BPermRot, 1.5, -6.0, -3.0},
        {"B11", Term::BPermRot, 0.5, -3.0 / 4.0, -3.0 / 8.0},
        {"B12", Term::BPermSpin, 0.5, 3.0 / 2.0, -3.0},
        {"B13", Term::BShearRot, 0.5, -6.0, -3.0},
        {"B14", Term::BSqueezeStrain, 0.5, 12.0, 6.0},
    };
    return t;
}

inline const char* term_name(Term t) {
    switch (t) {
        case Term::ShearSq: return "shear";
        case Term::SqueezeSq: return "squeeze";
        case Term::PermSq: return "permeation";
        case Term::RotPerm: return "rotation_permeation";
        case Term::RotSq: return "rotation";
        case Term::BPermSq: return "b_permeation";
        case Term::BShearSq: return "b_shear";
        case Term::BRotSq: return "b_rotation";
        case Term::BSqueezeSq: return "b_squeeze";
        case Term::BPermShear: return "b_permeation_shear";
        case Term::BPermRot: return "b_permeation_rotation";
        case Term::BPermSpin: return "b_permeation_spin";
        case Term::BShearRot: return "b_shear_rotation";
        case Term::BSqueezeStrain: return "b_squeeze_strain";
    }
    return "?";
}

inline double coeff_value(const TableEntry& e, double d, double R, double mu) {
    if (!(d > 0.0)) fail(ErrorKind::Numeric, "BadGap", "d_ij must be positive");
    return e.value * pi * mu * std::pow(R / d, e.power);
}

inline double coeff_C(int k, double d, double R, double mu) {
    if (k < 1 || k > 9) fail(ErrorKind::Config, "BadIndex", "C index " + std::to_string(k));
    return coeff_value(coefficient_catalog()[k - 1], d, R, mu);
}

inline double coeff_B(int m, double d, double R, double mu) {
    if (m < 1 || m > 14) fail(ErrorKind::Config, "BadIndex", "B index " + std::to_string(m));
    return coeff_value(coefficient_catalog()[9 + m - 1], d, R, mu);
}

struct CoefficientTable {
    std::array<double, 10> C{};  // 1-based
    std::array<double, 15> B{};
};

inline CoefficientTable make_coefficients(double d, double R, double mu) {
    CoefficientTable t;
    for (int k = 1; k <= 9; ++k) t.C[k] = coeff_C(k, d, R, mu);
    for (int m = 1; m <= 14; ++m) t.B[m] = coeff_B(m, d, R, mu);
    return t;
}

// ---------------------------------------------------------------------------
// Trial fields

enum class TrialKind { Shear, Squeeze, Permeation, BoundaryPermeation, BoundarySqueeze };

// Amplitudes in neck coordinates. Interior: xi = U1i-U1j+R(wi+wj),
// zeta = R(wi+wj), s = U2i-U2j, w = R(wi-wj). Boundary permeation field:
// dU = U1i-U1j, omega_i, omega_j, beta. Boundary squeeze field: s, a.
struct TrialFieldSpec {
    TrialKind kind = TrialKind::Shear;
    double xi = 0, zeta = 0, s = 0, w = 0, beta = 0;
    double dU = 0, omega_i = 0, omega_j = 0, a = 0;
};

inline bool is_boundary(TrialKind k) {
    return k == TrialKind::BoundaryPermeation || k == TrialKind::BoundarySqueeze;
}

namespace lub {

constexpr int JN = 5;
using J = Jet<JN>;

// v_x = sum ax[k] y^k, v_y = sum ay[k] y^k, coefficients are jets in x
struct YField {
    std::array<J, 5> ax{}, ay{};
    YField& add(const YField& o, double s) {
        for (int k = 0; k < 5; ++k) { ax[k] += o.ax[k] * s; ay[k] += o.ay[k] * s; }
        return *this;
    }
};

// Tensor with polynomial y-dependence, values at a fixed x
struct YTensor {
    std::array<double, 5> s11{}, s12{}, s22{};
};

struct Neck {
    NeckKind kind;
    double delta, R;
    double xa, xb;  // transverse extent

    J H(double x) const { return delta + 2.0 * sag(J::variable(x), R); }
    double ylo(double x) const { return kind == NeckKind::InteriorInterior ? -0.5 * H(x).val() : 0.0; }
    double yhi(double x) const { return 0.5 * H(x).val(); }
};

enum class Basis { Xi, Zeta, Sq, Rot, Perm, BDu, BOmi, BOmj, BOm, BBeta, BSq, BA };

inline YField basis_field(Basis b, const Neck& n, double x) {
    const double R = n.R, dl = n.delta;
    const J X = J::variable(x);
    const J H = n.H(x);
    const J c = sqrt(1.0 - X * X / (R * R));
    YField f;
    switch (b) {
        case Basis::Xi: {  // shear
            J G = 1.0 / H, F = -deriv(H) / 8.0;
            f.ax[1] = G;
            f.ay[0] = F;
            f.ay[2] = -deriv(G) / 2.0;
            break;
        }
        case Basis::Zeta: {  // co-rotation correction
            J K = -sag(X, R) / (R * H);
            J M = X / (2.0 * R) - X * dl / (8.0 * R * R * c);
            f.ax[1] = K;
            f.ay[0] = M;
            f.ay[2] = -deriv(K) / 2.0;
            break;
        }
        case Basis::Sq: {
            J G = -1.5 * X / H, F = 2.0 * X / (H * H * H);
            f.ax[0] = G;
            f.ax[2] = 3.0 * F;
            f.ay[1] = -deriv(G);
            f.ay[3] = -deriv(F);
            break;
        }
        case Basis::Rot: {
            J P = -0.75 * X * X / (R * H) + 3.0 * H / (16.0 * R) + 0.5 * c;
            J Q = X * X / (R * H * H * H) - 1.0 / (4.0 * R * H);
            f.ax[0] = P;
            f.ax[2] = 3.0 * Q;
            f.ay[1] = -deriv(P);
            f.ay[3] = -deriv(Q);
            break;
        }
        case Basis::Perm: {
            J K = R * 1.5 / H, M = R * -2.0 / (H * H * H);
            f.ax[0] = K;
            f.ax[2] = 3.0 * M;
            f.ay[1] = -deriv(K);
            f.ay[3] = -deriv(M);
            break;
        }
        case Basis::BDu:
        case Basis::BOmi:
        case Basis::BOmj:
        case Basis::BOm:
        case Basis::BBeta: {
            // wall at y=0, disk surface at y=h; K, M fixed by the tangential
            // velocity st on the disk and the flux psi through x = const
            const J h = 0.5 * H;
            J st, psi;
            if (b == Basis::BDu) { st = J(1.0); psi = h; }
            if (b == Basis::BOmi) { st = sqrt(R * R - X * X); psi = J(0.5 * R * dl); }
            if (b == Basis::BOmj) { st = J(0.0); psi = 0.5 * X * X; }
            if (b == Basis::BBeta) { st = J(0.0); psi = J(R); }
            if (b == Basis::BOm) {  // rigid co-rotation about the disk center, relative to it
                const J sg = sag(X, R);
                st = -sg / R;
                psi = -X * X * sg / (2.0 * R * (2.0 * R - sg));
            }
            J K = (6.0 * psi - 2.0 * h * st) / (h * h);
            J M = (3.0 * h * st - 6.0 * psi) / (h * h * h);
            f.ax[1] = K;
            f.ax[2] = M;
            f.ay[2] = -deriv(K) / 2.0;
            f.ay[3] = -deriv(M) / 3.0;
            if (b == Basis::BOmj) f.ay[0] = X;
            if (b == Basis::BOm) f.ay[0] = X / R;
            break;
        }
        case Basis::BSq:
        case Basis::BA: {
            const J h = 0.5 * H;
            J F, G;
            if (b == Basis::BSq) { F = -6.0 * X / (h * h); G = 6.0 * X / (h * h * h); }
            else { F = -4.0 * X / h; G = 3.0 * X / (h * h); }
            f.ax[1] = F;
            f.ax[2] = G;
            f.ay[2] = -deriv(F) / 2.0;
            f.ay[3] = -deriv(G) / 3.0;
            if (b == Basis::BA) { f.ax[0] = X; f.ay[1] = J(-1.0); }
            break;
        }
    }
    return f;
}

inline YField field(const TrialFieldSpec& s, const Neck& n, double x) {
    YField f;
    auto acc = [&](Basis b, double amp) { if (amp != 0.0) f.add(basis_field(b, n, x), amp); };
    switch (s.kind) {
        case TrialKind::Shear: acc(Basis::Xi, s.xi); acc(Basis::Zeta, s.zeta); break;
        case TrialKind::Squeeze: acc(Basis::Sq, s.s); break;
        case TrialKind::Permeation: acc(Basis::Rot, s.w); acc(Basis::Perm, s.beta); break;
        case TrialKind::BoundaryPermeation: {
            // split into S = dU + R wi, W = R(wi - wj), Om = R wi
            const double R = n.R;
            acc(Basis::BDu, s.dU + R * s.omega_i);
            acc(Basis::BOmj, -s.omega_i + s.omega_j);
            acc(Basis::BOm, R * s.omega_i);
            acc(Basis::BBeta, s.beta);
            break;
        }
        case TrialKind::BoundarySqueeze: acc(Basis::BSq, s.s); acc(Basis::BA, s.a); break;
    }
    return f;
}

inline Vec2 eval(const YField& f, double y) {
    double vx = 0, vy = 0, p = 1;
    for (int k = 0; k < 5; ++k) { vx += f.ax[k].val() * p; vy += f.ay[k].val() * p; p *= y; }
    return {vx, vy};
}

inline double divergence(const YField& f, double y) {
    double d = 0, p = 1;
    for (int k = 0; k < 5; ++k) {
        d += f.ax[k].d(1) * p;
        if (k < 4) d += (k + 1) * f.ay[k + 1].val() * p;
        p *= y;
    }
    return d;
}

// Strain rate as y-polynomials
inline YTensor strain(const YField& f) {
    YTensor D;
    for (int k = 0; k < 5; ++k) {
        D.s11[k] = f.ax[k].d(1);
        D.s22[k] = k < 4 ? (k + 1) * f.ay[k + 1].val() : 0.0;
        D.s12[k] = 0.5 * ((k < 4 ? (k + 1) * f.ax[k + 1].val() : 0.0) + f.ay[k].d(1));
    }
    return D;
}

// integral over [y0, y1] of the product of two y-polynomials
inline double int_prod(const std::array<double, 5>& a, const std::array<double, 5>& b, double y0, double y1) {
    std::array<double, 9> c{};
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) c[i + j] += a[i] * b[j];
    double p0 = y0, p1 = y1, s = 0;
    for (int k = 0; k < 9; ++k) { s += c[k] * (p1 - p0) / (k + 1); p0 *= y0; p1 *= y1; }
    return s;
}

inline double int_contract(const YTensor& A, const YTensor& B, double y0, double y1) {
    return int_prod(A.s11, B.s11, y0, y1) + 2.0 * int_prod(A.s12, B.s12, y0, y1) + int_prod(A.s22, B.s22, y0, y1);
}

// Adaptive Gauss-Kronrod on panels graded toward x = 0
inline double integrate_x(const std::function<double(double)>& fn, const Neck& n, double rel_tol = 1e-12) {
    std::vector<double> pts{n.xa};
    const double s = std::sqrt(n.R * std::max(n.delta, 1e-300));
    std::vector<double> inner;
    for (double t = s / 4.0; t < std::max(-n.xa, n.xb); t *= 4.0) inner.push_back(t);
    for (auto it = inner.rbegin(); it != inner.rend(); ++it)
        if (-*it > n.xa) pts.push_back(-*it);
    if (n.xa < 0.0 && n.xb > 0.0) pts.push_back(0.0);
    for (double t : inner)
        if (t < n.xb) pts.push_back(t);
    pts.push_back(n.xb);
    double total = 0, scale = 0, err_total = 0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        double err = 0, l1 = 0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            fn, pts[i], pts[i + 1], 10, rel_tol, &err, &l1);
        total += v;
        scale += l1;
        err_total += err;
    }
    if (!(err_total <= 1e3 * rel_tol * scale + 1e-9) || !std::isfinite(total))
        fail(ErrorKind::Numeric, "QuadratureNotConverged",
             "error estimate " + std::to_string(err_total) + " vs scale " + std::to_string(scale));
    return total;
}

inline Neck make_neck(TrialKind k, double delta, double R, double gm, double gp) {
    return Neck{is_boundary(k) ? NeckKind::InteriorBoundary : NeckKind::InteriorInterior, delta, R, -gm, gp};
}

inline void check_pre(double delta, double R, double mu, double gm, double gp) {
    if (!(delta > 0.0 && R > 0.0 && mu >= 0.0)) fail(ErrorKind::Config, "BadSpec", "delta, R must be positive");
    if (!(gm > 0.0 && gp > 0.0 && gm < R && gp < R)) fail(ErrorKind::Config, "BadSpec", "neck half-widths must lie in (0, R)");
}

}  // namespace lub

// mu * int D(u):D(v) over the neck [-gm, gp]
inline double bilinear_dissipation_quadrature(const TrialFieldSpec& u, const TrialFieldSpec& v, double delta, double R,
                                              double mu, double gm, double gp) {
    lub::check_pre(delta, R, mu, gm, gp);
    if (is_boundary(u.kind) != is_boundary(v.kind)) fail(ErrorKind::Config, "BadSpec", "mixed neck kinds");
    const lub::Neck n = lub::make_neck(u.kind, delta, R, gm, gp);
    auto integrand = [&](double x) {
        const auto Du = lub::strain(lub::field(u, n, x));
        const auto Dv = lub::strain(lub::field(v, n, x));
        return lub::int_contract(Du, Dv, n.ylo(x), n.yhi(x));
    };
    return mu * lub::integrate_x(integrand, n);
}

inline double trial_dissipation_quadrature(const TrialFieldSpec& s, double delta, double R, double mu, double gm,
                                           double gp) {
    return bilinear_dissipation_quadrature(s, s, delta, R, mu, gm, gp);
}

inline double trial_dissipation_quadrature(const TrialFieldSpec& s, double delta, double R, double mu, double gamma) {
    return trial_dissipation_quadrature(s, delta, R, mu, gamma, gamma);
}

// Prescribed velocity on the disk (side = +1, disk i) or on the facing
// disk or wall (side = -1) at transverse position x.
inline Vec2 boundary_data(const TrialFieldSpec& s, double R, double delta, double x, int side) {
    const double c = std::sqrt(1.0 - x * x / (R * R));
    switch (s.kind) {
        case TrialKind::Shear: {
            const double du = s.xi - s.zeta;  // U1i - U1j
            return side > 0 ? Vec2(0.5 * du + 0.5 * s.zeta * c, s.zeta * x / (2 * R))
                            : Vec2(-0.5 * du - 0.5 * s.zeta * c, s.zeta * x / (2 * R));
        }
        case TrialKind::Squeeze: return Vec2(0.0, side * 0.5 * s.s);
        case TrialKind::Permeation: return Vec2(0.5 * s.w * c, side * s.w * x / (2 * R));
        case TrialKind::BoundaryPermeation:
            // relative to the wall translation U1j
            return side > 0 ? Vec2(s.dU + s.omega_i * std::sqrt(R * R - x * x), s.omega_i * x)
                            : Vec2(0.0, s.omega_j * x);
        case TrialKind::BoundarySqueeze:
            return side > 0 ? Vec2(0.0, s.s) : Vec2(s.a * x, 0.0);  // relative to the wall normal velocity U2j
    }
    (void)delta;
    return {0, 0};
}

// ---------------------------------------------------------------------------
// Dual fields. Isotropic parts p(x) I are dropped: they do not change the
// deviatoric energy and contract to zero against a divergence-free strain.
// div S = -(dp/dx, 0) is returned alongside for checking.

namespace lub {

// quadratic on [xa, xb] with end values va, vb and integral J
struct Quad {
    double xa, L, va, vb, kappa;
    static Quad make(double xa, double xb, double va, double vb, double J) {
        const double L = xb - xa;
        return {xa, L, va, vb, 6.0 * (J / L - 0.5 * (va + vb))};
    }
    static Quad linear(double xa, double xb, double va, double vb) { return {xa, xb - xa, va, vb, 0.0}; }
    double operator()(double x) const {
        const double t = (x - xa) / L;
        return va + (vb - va) * t + kappa * t * (1 - t);
    }
    double d(double x) const {
        const double t = (x - xa) / L;
        return ((vb - va) + kappa * (1 - 2 * t)) / L;
    }
    double prim(double t) const { return L * (va * t + (vb - va) * t * t / 2 + kappa * (t * t / 2 - t * t * t / 3)); }
    // integral from xb to x
    double I(double x) const { return prim((x - xa) / L) - prim(1.0); }
};

struct DualAt {
    YTensor S;
    double dp = 0;  // gradient of the dropped isotropic part
};

struct DualField {
    std::function<DualAt(double)> at;
};

inline double int_x_plain(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-12);
}

// Interior template for v = (G + 3y^2 F, -y G' - y^3 F'); closed = true for Sn = 0 on the lateral sides
inline DualField interior_template(std::function<std::pair<J, J>(double)> GF, const Neck& n, bool closed) {
    const double xa = n.xa, xb = n.xb;
    auto [Ga, Fa] = GF(xa);
    auto [Gb, Fb] = GF(xb);
    const double intF = int_x_plain([&](double x) { return GF(x).second.val(); }, xa, xb);
    const double alpha_a = 6 * Fa.val() - Ga.d(2), alpha_b = 6 * Fb.val() - Gb.d(2);
    const Quad A = closed ? Quad::make(xa, xb, alpha_a, alpha_b, Ga.d(1) - Gb.d(1) + 6 * intF)
                          : Quad::linear(xa, xb, alpha_a, alpha_b);
    const Quad B = Quad::make(xa, xb, -3 * Fa.d(2), -3 * Fb.d(2), 3 * (Fa.d(1) - Fb.d(1)));
    const double c0 = -Gb.d(1), c2 = -9 * Fb.d(1);
    DualField df;
    df.at = [=](double x) {
        auto [G, F] = GF(x);
        DualAt r;
        r.S.s11[0] = G.d(1) + c0;
        r.S.s11[2] = 9 * F.d(1) + 3 * B.I(x) + c2;
        r.S.s12[1] = 6 * F.val() - G.d(2) - A(x);
        r.S.s12[3] = -3 * F.d(2) - B(x);
        r.S.s22[0] = -3 * G.d(1);
        r.S.s22[2] = -3 * F.d(1) + G.d(3) / 2 + A.d(x) / 2;
        r.S.s22[4] = 0.75 * F.d(3) + B.d(x) / 4;
        r.dp = -6 * F.val() + A(x);
        return r;
    };
    return df;
}

// Shear template: S12 = G - c(x), S22 = -y G' + y c'
inline DualField shear_template(const Neck& n, double amp) {
    auto G = [n](double x) { return 1.0 / n.H(x); };
    const Quad c = Quad::linear(n.xa, n.xb, G(n.xa).val(), G(n.xb).val());
    DualField df;
    df.at = [=](double x) {
        const J g = G(x);
        DualAt r;
        r.S.s12[0] = amp * (g.val() - c(x));
        r.S.s22[1] = amp * (-g.d(1) + c.d(x));
        return r;
    };
    return df;
}

// Boundary template for v = (yF + y^2 G + ..., -(y^2/2)F' - (y^3/3)G' + ...).
// closed: traction free laterally; otherwise the lateral traction is a pure pressure.
inline DualField boundary_template(std::function<std::pair<J, J>(double)> FG, const Neck& n, bool closed) {
    const double xa = n.xa, xb = n.xb;
    auto [Fa, Ga] = FG(xa);
    auto [Fb, Gb] = FG(xb);
    const double intG = closed ? int_x_plain([&](double x) { return FG(x).second.val(); }, xa, xb) : 0.0;
    const Quad e0 = Quad::linear(xa, xb, Fa.val(), Fb.val());
    const Quad e1 = closed ? Quad::make(xa, xb, 2 * Ga.val(), 2 * Gb.val(), 2 * intG)
                           : Quad::linear(xa, xb, 2 * Ga.val(), 2 * Gb.val());
    const Quad e2 = Quad::make(xa, xb, -1.5 * Fa.d(2), -1.5 * Fb.d(2), 1.5 * (Fa.d(1) - Fb.d(1)));
    const Quad e3 = Quad::make(xa, xb, -Ga.d(2), -Gb.d(2), Ga.d(1) - Gb.d(1));
    const double k1 = -3 * Fb.d(1), k2 = -3 * Gb.d(1);
    DualField df;
    df.at = [=](double x) {
        auto [F, G] = FG(x);
        DualAt r;
        r.S.s11[1] = 3 * F.d(1) + 2 * e2.I(x) + k1;
        r.S.s11[2] = 3 * G.d(1) + 3 * e3.I(x) + k2;
        r.S.s12[0] = F.val() - e0(x);
        r.S.s12[1] = 2 * G.val() - e1(x);
        r.S.s12[2] = -1.5 * F.d(2) - e2(x);
        r.S.s12[3] = -G.d(2) - e3(x);
        r.S.s22[1] = -F.d(1) + e0.d(x);
        r.S.s22[2] = -G.d(1) + e1.d(x) / 2;
        r.S.s22[3] = 0.5 * F.d(3) + e2.d(x) / 3;
        r.S.s22[4] = 0.25 * G.d(3) + e3.d(x) / 4;
        r.dp = -2 * G.val() + e1(x);
        return r;
    };
    return df;
}

// Dual tensor for a spec, scaled by mu
inline DualField dual_field(const TrialFieldSpec& s, const Neck& n, double mu) {
    DualField base;
    switch (s.kind) {
        case TrialKind::Shear: base = shear_template(n, s.xi); break;
        case TrialKind::Squeeze:
        case TrialKind::Permeation: {
            auto GF = [n, s](double x) {
                const YField f = field(s, n, x);
                return std::make_pair(f.ax[0], f.ax[2] / 3.0);
            };
            base = interior_template(GF, n, s.kind == TrialKind::Squeeze);
            break;
        }
        case TrialKind::BoundaryPermeation:
        case TrialKind::BoundarySqueeze: {
            auto FG = [n, s](double x) {
                const YField f = field(s, n, x);
                return std::make_pair(f.ax[1], f.ax[2]);
            };
            base = boundary_template(FG, n, s.kind == TrialKind::BoundarySqueeze);
            break;
        }
    }
    DualField df;
    df.at = [base, mu](double x) {
        DualAt r = base.at(x);
        for (int k = 0; k < 5; ++k) { r.S.s11[k] *= mu; r.S.s12[k] *= mu; r.S.s22[k] *= mu; }
        r.dp *= mu;
        return r;
    };
    return df;
}

}  // namespace lub

// Dual functional in volume form: int D(v):S - (S:S - (tr S)^2/2)/(4 mu).
// Equal to the boundary form when v meets the prescribed data.
inline double dual_bound_quadrature(const TrialFieldSpec& s, double delta, double R, double mu, double gm, double gp) {
    lub::check_pre(delta, R, mu, gm, gp);
    if (mu == 0.0) return 0.0;
    const lub::Neck n = lub::make_neck(s.kind, delta, R, gm, gp);
    const lub::DualField S = lub::dual_field(s, n, mu);
    auto integrand = [&](double x) {
        const lub::YTensor D = lub::strain(lub::field(s, n, x));
        lub::YTensor T = S.at(x).S;
        const double y0 = n.ylo(x), y1 = n.yhi(x);
        // deviatoric part
        lub::YTensor dev = T;
        for (int k = 0; k < 5; ++k) {
            const double h = 0.5 * (T.s11[k] + T.s22[k]);
            dev.s11[k] -= h;
            dev.s22[k] -= h;
        }
        return lub::int_contract(D, T, y0, y1) - lub::int_contract(dev, dev, y0, y1) / (4 * mu);
    };
    return lub::integrate_x(integrand, n);
}

inline double dual_bound_quadrature(const TrialFieldSpec& s, double delta, double R, double mu, double gamma) {
    return dual_bound_quadrature(s, delta, R, mu, gamma, gamma);
}

// ---------------------------------------------------------------------------
// Closed forms

struct PowerTerm {
    double power;  // multiplies delta^-power
    double coef;
};

inline std::vector<PowerTerm> closed_form_W(const TrialFieldSpec& s, double delta, double R, double mu) {
    if (!(R > 0.0 && delta > 0.0)) fail(ErrorKind::Config, "BadSpec", "delta and R must be positive");
    std::vector<PowerTerm> out = {{2.5, 0.0}, {1.5, 0.0}, {0.5, 0.0}};
    auto add = [&](Term t, double amp) {
        for (const auto& e : coefficient_catalog())
            if (e.term == t)
                for (auto& o : out)
                    if (o.power == e.power) o.coef += amp * e.value * pi * mu * std::pow(R, e.power);
    };
    switch (s.kind) {
        case TrialKind::Shear: add(Term::ShearSq, s.xi * s.xi); break;
        case TrialKind::Squeeze: add(Term::SqueezeSq, s.s * s.s); break;
        case TrialKind::Permeation:
            add(Term::PermSq, s.beta * s.beta);
            add(Term::RotPerm, s.w * s.beta);
            add(Term::RotSq, s.w * s.w);
            break;
        case TrialKind::BoundaryPermeation: {
            const double S = s.dU + R * s.omega_i, W = R * (s.omega_i - s.omega_j), Om = R * s.omega_i;
            add(Term::BPermSq, s.beta * s.beta);
            add(Term::BShearSq, S * S);
            add(Term::BRotSq, W * W);
            add(Term::BPermShear, s.beta * S);
            add(Term::BPermRot, s.beta * W);
            add(Term::BPermSpin, s.beta * Om);
            add(Term::BShearRot, S * W);
            break;
        }
        case TrialKind::BoundarySqueeze:
            add(Term::BSqueezeSq, s.s * s.s);
            add(Term::BSqueezeStrain, s.s * R * s.a);
            break;
    }
    (void)delta;
    return out;
}

// ---------------------------------------------------------------------------
// Coefficient verification

// Least-squares fit of f(delta) = sum c_e delta^e on samples around delta0.
inline std::vector<double> fit_delta_powers(const std::function<double(double)>& f, const std::vector<double>& exps,
                                            double delta0, int extra = 2, double step_decades = 0.25) {
    const int m = static_cast<int>(exps.size()) + extra;
    Eigen::MatrixXd V(m, exps.size());
    Eigen::VectorXd y(m);
    for (int k = 0; k < m; ++k) {
        const double dl = delta0 * std::pow(10.0, step_decades * (k - 0.5 * (m - 1)));
        const double w = std::pow(dl, -exps.front());  // balance rows by the leading power
        for (size_t e = 0; e < exps.size(); ++e) V(k, e) = std::pow(dl, exps[e]) / w;
        y(k) = f(dl) / w;
    }
    Eigen::VectorXd colscale = V.colwise().norm().transpose();
    for (int e = 0; e < V.cols(); ++e) V.col(e) /= colscale(e);
    Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
    std::vector<double> out(exps.size());
    for (size_t e = 0; e < exps.size(); ++e) out[e] = c(e) / colscale(e);
    return out;
}

struct CoefficientCheck {
    std::string label;
    std::string term;
    double delta_power;  // exponent of delta, e.g. -2.5
    double closed_form;
    double printed;
    double quadrature_fit;
    double rel_error;
};

namespace lub {

// unit field of one quadratic-form variable
inline TrialFieldSpec unit_variable(const std::string& v, double R) {
    TrialFieldSpec s;
    if (v == "xi") { s.kind = TrialKind::Shear; s.xi = 1; }
    else if (v == "zeta") { s.kind = TrialKind::Shear; s.zeta = 1; }
    else if (v == "s") { s.kind = TrialKind::Squeeze; s.s = 1; }
    else if (v == "w") { s.kind = TrialKind::Permeation; s.w = 1; }
    else if (v == "beta") { s.kind = TrialKind::Permeation; s.beta = 1; }
    else if (v == "bS") { s.kind = TrialKind::BoundaryPermeation; s.dU = 1; }
    else if (v == "bW") { s.kind = TrialKind::BoundaryPermeation; s.omega_j = -1 / R; }
    else if (v == "bOm") { s.kind = TrialKind::BoundaryPermeation; s.omega_i = 1 / R; s.omega_j = 1 / R; s.dU = -1; }
    else if (v == "bBeta") { s.kind = TrialKind::BoundaryPermeation; s.beta = 1; }
    else if (v == "bs") { s.kind = TrialKind::BoundarySqueeze; s.s = 1; }
    else if (v == "bRa") { s.kind = TrialKind::BoundarySqueeze; s.a = 1 / R; }
    else fail(ErrorKind::Config, "BadSpec", "unknown variable " + v);
    return s;
}

inline std::pair<std::string, std::string> term_variables(Term t) {
    switch (t) {
        case Term::ShearSq: return {"xi", "xi"};
        case Term::SqueezeSq: return {"s", "s"};
        case Term::PermSq: return {"beta", "beta"};
        case Term::RotPerm: return {"w", "beta"};
        case Term::RotSq: return {"w", "w"};
        case Term::BPermSq: return {"bBeta", "bBeta"};
        case Term::BShearSq: return {"bS", "bS"};
        case Term::BRotSq: return {"bW", "bW"};
        case Term::BSqueezeSq: return {"bs", "bs"};
        case Term::BPermShear: return {"bBeta", "bS"};
        case Term::BPermRot: return {"bBeta", "bW"};
        case Term::BPermSpin: return {"bBeta", "bOm"};
        case Term::BShearRot: return {"bS", "bW"};
        case Term::BSqueezeStrain: return {"bs", "bRa"};
    }
    return {};
}

// Quadratic-form coefficient of a term: W for squares, 2<u,v> for cross terms.
inline double term_energy(Term t, double delta, double R, double mu, double gamma) {
    auto [a, b] = term_variables(t);
    const TrialFieldSpec u = unit_variable(a, R), v = unit_variable(b, R);
    const double f = a == b ? 1.0 : 2.0;
    return f * bilinear_dissipation_quadrature(u, v, delta, R, mu, gamma, gamma);
}

inline std::vector<double> term_powers(Term t) {
    std::vector<double> p;
    for (const auto& e : coefficient_catalog())
        if (e.term == t) p.push_back(e.power);
    return p;
}

}  // namespace lub

// Fits every term of the per-neck forms at delta0 and compares with the table.
inline std::vector<CoefficientCheck> verify_coefficients(double delta0, double R = 1.0, double mu = 1.0,
                                                         double gamma = 0.5) {
    if (!(gamma > 0.0 && gamma < R)) fail(ErrorKind::Config, "BadSpec", "gamma must lie in (0, R)");
    std::vector<CoefficientCheck> rows;
    std::vector<Term> terms;
    for (const auto& e : coefficient_catalog())
        if (terms.empty() || terms.back() != e.term) terms.push_back(e.term);
    for (Term t : terms) {
        const std::vector<double> pw = lub::term_powers(t);
        std::vector<double> exps;
        for (double p : pw) exps.push_back(-p);
        // regular remainder up to delta^5/2; at delta0 = 1e-2 fewer terms leave
        // a few percent of contamination in the delta^-1/2 coefficients
        for (double e : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) exps.push_back(e);
        auto f = [&](double dl) { return lub::term_energy(t, dl, R, mu, gamma); };
        const std::vector<double> c = fit_delta_powers(f, exps, delta0, 4, 0.1);
        for (const auto& e : coefficient_catalog()) {
            if (e.term != t) continue;
            size_t k = 0;
            while (pw[k] != e.power) ++k;
            const double closed = e.value * pi * mu * std::pow(R, e.power);
            const double fit = c[k];
            rows.push_back({e.label, term_name(t), -e.power, closed, e.printed * pi * mu * std::pow(R, e.power), fit,
                            std::abs(fit - closed) / std::abs(closed)});
        }
    }
    return rows;
}

}  // namespace suspnet
