// Network construction: Delaunay neighbors of the disk centers together with
// their mirror images in the walls, quasidisks on the walls, necks with local
// frames, and the constraint faces.
#pragma once

#include "suspnet/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace suspnet {

struct DomainRect {
    double half_width = 1.0;
    double half_height = 1.0;
};

struct DiskConfig {
    std::vector<Vec2> centers;
    double R = 1.0;
    double mu = 1.0;
};

enum class VertexKind { Interior, Quasidisk };
enum class Side { None, Top, Bottom, LatLeft, LatRight };

inline const char* side_name(Side s) {
    switch (s) {
        case Side::None: return "none";
        case Side::Top: return "top";
        case Side::Bottom: return "bottom";
        case Side::LatLeft: return "left";
        case Side::LatRight: return "right";
    }
    return "?";
}

inline Vec2 outward_normal(Side s) {
    switch (s) {
        case Side::Top: return {0, 1};
        case Side::Bottom: return {0, -1};
        case Side::LatLeft: return {-1, 0};
        case Side::LatRight: return {1, 0};
        default: return {0, 0};
    }
}

struct Vertex {
    int index = 0;
    VertexKind kind = VertexKind::Interior;
    Vec2 center{0, 0};
    Side side = Side::None;
    int source = -1;  // generating disk of a quasidisk
};

struct NeckEdge {
    int i = 0, j = 0;  // i <= j; quasidisks carry the larger indices
    double delta = 0;  // delta_ij
    double d = 0;      // delta_ij / delta_ref
    Vec2 p{1, 0}, q{0, 1};
    double gm = 0, gp = 0;  // half widths on the -p and +p sides
    NeckKind kind = NeckKind::InteriorInterior;
    Vec2 shift{0, 0};  // periodic networks: the neighbor is the image of j at x_j + shift
};

// Piece of the wall between two quasidisk centers, possibly around a corner.
struct WallSegment {
    int a = 0, b = 0;
    std::vector<Vec2> path;
};

struct FaceSide {
    enum Kind { Neck, Wall } kind = Neck;
    int index = 0;
    int sign = 1;  // +1 when the counterclockwise traversal runs from edge.i to edge.j
};

struct ConstraintFace {
    std::vector<int> vertices;  // counterclockwise
    std::vector<FaceSide> sides;
    std::vector<Vec2> vertex_shift;  // periodic networks: vertex k sits at x + vertex_shift[k]
    Vec2 circumcenter{0, 0};
    int vertex_count() const { return static_cast<int>(vertices.size()); }
};

struct DiskNetwork {
    DomainRect domain;
    double R = 1.0, mu = 1.0, delta_ref = 1.0;
    std::vector<Vertex> vertices;
    std::vector<NeckEdge> edges;
    std::vector<WallSegment> walls;
    std::vector<ConstraintFace> faces;
    int n_interior = 0;
    std::vector<std::string> notes;

    bool interior(int v) const { return vertices[v].kind == VertexKind::Interior; }
    int interior_edge_count() const {
        int n = 0;
        for (const auto& e : edges) n += e.kind == NeckKind::InteriorInterior;
        return n;
    }
};

// ---------------------------------------------------------------------------

inline double interparticle_gap(NeckKind kind, double dist, double R, bool both_quasi = false) {
    if (!(dist > 0)) fail(ErrorKind::Validation, "NegativeGap", "distance must be positive");
    const double g = both_quasi ? dist : kind == NeckKind::InteriorInterior ? dist - 2 * R : dist - R;
    if (!(g > 0)) fail(ErrorKind::Validation, "NegativeGap", "gap " + std::to_string(g));
    return g;
}

inline std::pair<Vec2, Vec2> local_frame(const Vec2& xi, const Vec2& xj) {
    const Vec2 dx = xj - xi;
    const double n = dx.norm();
    if (!(n > 0)) fail(ErrorKind::Validation, "CoincidentCenters", "x_i == x_j");
    const Vec2 q = dx / n;
    return {rotate_cw(q), q};
}

struct ClosePackingReport {
    struct Item {
        int edge, i, j;
        double d;
    };
    std::vector<Item> violations;
    bool ok() const { return violations.empty(); }
};

inline ClosePackingReport validate_close_packing(const DiskNetwork& net, double c1, double c2,
                                                 bool include_boundary = true) {
    ClosePackingReport r;
    for (size_t e = 0; e < net.edges.size(); ++e) {
        const auto& E = net.edges[e];
        if (!include_boundary && E.kind != NeckKind::InteriorInterior) continue;
        if (!(E.d > c1 && E.d < c2)) r.violations.push_back({static_cast<int>(e), E.i, E.j, E.d});
    }
    return r;
}

// Central projection of a Voronoi vertex v onto the circle of disk i, measured along p.
inline double projected_offset(const Vec2& xi, const Vec2& v, const Vec2& p, double R) {
    const Vec2 r = v - xi;
    const double n = r.norm();
    return n > 0 ? R * r.dot(p) / n : 0.0;
}

inline std::pair<double, double> neck_half_widths(const Vec2& xi, const Vec2& p, double R, const Vec2& v1,
                                                  const Vec2& v2) {
    double a = projected_offset(xi, v1, p, R), b = projected_offset(xi, v2, p, R);
    if (a > b) std::swap(a, b);
    return {-a, b};  // one of them is negative when the Voronoi edge misses the center line
}

namespace geo {

using i64 = std::int64_t;
using i128 = __int128;

struct IP {
    i64 x, y;
};

inline i128 orient(const IP& a, const IP& b, const IP& c) {
    return static_cast<i128>(b.x - a.x) * (c.y - a.y) - static_cast<i128>(b.y - a.y) * (c.x - a.x);
}

// > 0 when d lies inside the circle through the counterclockwise triangle abc
inline i128 incircle(const IP& a, const IP& b, const IP& c, const IP& d) {
    const i128 ax = a.x - d.x, ay = a.y - d.y, bx = b.x - d.x, by = b.y - d.y, cx = c.x - d.x, cy = c.y - d.y;
    const i128 a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    return a2 * (bx * cy - by * cx) - b2 * (ax * cy - ay * cx) + c2 * (ax * by - ay * bx);
}

struct Tri {
    std::array<int, 3> v;
    bool alive = true;
};

// Bowyer-Watson with exact predicates; returns counterclockwise triangles.
inline std::vector<std::array<int, 3>> delaunay(std::vector<IP> pts, i64 super) {
    const int n = static_cast<int>(pts.size());
    pts.push_back({-2 * super, -super});
    pts.push_back({2 * super, -super});
    pts.push_back({0, 2 * super});
    std::vector<Tri> tris{{{n, n + 1, n + 2}}};
    for (int k = 0; k < n; ++k) {
        const IP& p = pts[k];
        std::map<std::pair<int, int>, int> boundary;  // directed edge -> count
        for (auto& t : tris) {
            if (!t.alive) continue;
            if (incircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], p) > 0) {
                t.alive = false;
                for (int e = 0; e < 3; ++e) {
                    const int a = t.v[e], b = t.v[(e + 1) % 3];
                    auto it = boundary.find({b, a});
                    if (it != boundary.end()) boundary.erase(it);
                    else boundary[{a, b}] = 1;
                }
            }
        }
        if (boundary.empty()) fail(ErrorKind::Numeric, "DegenerateTriangulation", "duplicate site");
        std::vector<Tri> fresh;
        for (auto& [e, c] : boundary) fresh.push_back({{e.first, e.second, k}});
        std::erase_if(tris, [](const Tri& t) { return !t.alive; });
        for (auto& t : fresh) tris.push_back(t);
    }
    std::vector<std::array<int, 3>> out;
    for (auto& t : tris)
        if (t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back(t.v);
    return out;
}

enum class SiteKind { Disk, WallMirror, CornerMirror };

struct Site {
    SiteKind kind;
    int disk;
    Side wall = Side::None;
    Vec2 pos;
};

}  // namespace geo

// Build the network. Sites are the disk centers and their reflections in the
// four walls and four corners; cocircular Delaunay triangles are merged into
// one face, and only faces whose circumcenter lies in the closed domain are kept.
inline DiskNetwork build_network(const DiskConfig& cfg, const DomainRect& dom, double delta_ref) {
    using namespace geo;
    if (!(cfg.R > 0)) fail(ErrorKind::Config, "BadConfig", "radius must be positive");
    if (!(cfg.mu > 0)) fail(ErrorKind::Config, "BadConfig", "viscosity must be positive");
    if (!(dom.half_width > 0 && dom.half_height > 0)) fail(ErrorKind::Config, "BadConfig", "domain must be nonempty");
    if (!(delta_ref > 0)) fail(ErrorKind::Config, "BadConfig", "delta_ref must be positive");
    const double W = dom.half_width, H = dom.half_height, R = cfg.R;
    const int N = static_cast<int>(cfg.centers.size());
    if (N == 0) fail(ErrorKind::Config, "BadConfig", "no disks");
    for (int i = 0; i < N; ++i) {
        const Vec2& c = cfg.centers[i];
        if (!(std::abs(c.x()) + R < W && std::abs(c.y()) + R < H))
            fail(ErrorKind::Validation, "OverlappingDisks", "disk " + std::to_string(i) + " crosses the boundary");
        for (int j = 0; j < i; ++j)
            if ((c - cfg.centers[j]).norm() <= 2 * R)
                fail(ErrorKind::Validation, "OverlappingDisks", std::to_string(j) + "," + std::to_string(i));
    }

    // quantization; the mirror images stay exact
    const double ext = 3.0 * std::max(W, H);
    const double scale = std::ldexp(1.0, 25) / ext;
    const i64 Wq = std::llround(W * scale), Hq = std::llround(H * scale);
    std::vector<Site> sites;
    std::vector<IP> ip;
    auto add = [&](SiteKind k, int disk, Side wall, double x, double y, i64 qx, i64 qy) {
        sites.push_back({k, disk, wall, Vec2(x, y)});
        ip.push_back({qx, qy});
    };
    for (int i = 0; i < N; ++i) {
        const double x = cfg.centers[i].x(), y = cfg.centers[i].y();
        const i64 qx = std::llround(x * scale), qy = std::llround(y * scale);
        add(SiteKind::Disk, i, Side::None, x, y, qx, qy);
        add(SiteKind::WallMirror, i, Side::LatRight, 2 * W - x, y, 2 * Wq - qx, qy);
        add(SiteKind::WallMirror, i, Side::LatLeft, -2 * W - x, y, -2 * Wq - qx, qy);
        add(SiteKind::WallMirror, i, Side::Top, x, 2 * H - y, qx, 2 * Hq - qy);
        add(SiteKind::WallMirror, i, Side::Bottom, x, -2 * H - y, qx, -2 * Hq - qy);
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                add(SiteKind::CornerMirror, i, Side::None, 2 * sx * W - x, 2 * sy * H - y, 2 * sx * Wq - qx,
                    2 * sy * Hq - qy);
    }
    const auto tris = delaunay(ip, std::llround(std::ldexp(1.0, 27)));

    // merge cocircular neighbors
    const int T = static_cast<int>(tris.size());
    std::vector<int> parent(T);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    std::map<std::pair<int, int>, int> dir;
    for (int t = 0; t < T; ++t)
        for (int e = 0; e < 3; ++e) dir[{tris[t][e], tris[t][(e + 1) % 3]}] = t;
    for (int t = 0; t < T; ++t)
        for (int e = 0; e < 3; ++e) {
            auto it = dir.find({tris[t][(e + 1) % 3], tris[t][e]});
            if (it == dir.end() || it->second < t) continue;
            const auto& o = tris[it->second];
            int opp = -1;
            for (int v : o)
                if (v != tris[t][e] && v != tris[t][(e + 1) % 3]) opp = v;
            if (incircle(ip[tris[t][0]], ip[tris[t][1]], ip[tris[t][2]], ip[opp]) == 0)
                parent[find(it->second)] = find(t);
        }
    std::map<int, std::vector<int>> groups;
    for (int t = 0; t < T; ++t) groups[find(t)].push_back(t);

    DiskNetwork net;
    net.domain = dom;
    net.R = R;
    net.mu = cfg.mu;
    net.delta_ref = delta_ref;
    net.n_interior = N;
    for (int i = 0; i < N; ++i) net.vertices.push_back({i, VertexKind::Interior, cfg.centers[i], Side::None, -1});
    std::map<std::pair<int, Side>, int> quasi;
    auto quasi_vertex = [&](int disk, Side s) {
        auto it = quasi.find({disk, s});
        if (it != quasi.end()) return it->second;
        const Vec2& c = cfg.centers[disk];
        Vec2 pos = c;
        if (s == Side::LatRight) pos.x() = W;
        if (s == Side::LatLeft) pos.x() = -W;
        if (s == Side::Top) pos.y() = H;
        if (s == Side::Bottom) pos.y() = -H;
        const int idx = static_cast<int>(net.vertices.size());
        net.vertices.push_back({idx, VertexKind::Quasidisk, pos, s, disk});
        quasi[{disk, s}] = idx;
        return idx;
    };

    struct RawFace {
        std::vector<int> verts;
        Vec2 cc;
    };
    std::vector<RawFace> raw;
    for (auto& [root, members] : groups) {
        // exact circumcenter containment test in the closed domain
        const auto& t0 = tris[members.front()];
        const IP a = ip[t0[0]], b = ip[t0[1]], c = ip[t0[2]];
        const i128 bx = b.x - a.x, by = b.y - a.y, cx = c.x - a.x, cy = c.y - a.y;
        const i128 D = 2 * (bx * cy - by * cx);
        const i128 b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
        i128 nx = a.x * D + (b2 * cy - c2 * by), ny = a.y * D + (c2 * bx - b2 * cx);
        i128 Dp = D;
        if (Dp < 0) { Dp = -Dp; nx = -nx; ny = -ny; }
        auto absv = [](i128 v) { return v < 0 ? -v : v; };
        if (absv(nx) > static_cast<i128>(Wq) * Dp || absv(ny) > static_cast<i128>(Hq) * Dp) continue;

        std::vector<int> vs;
        for (int t : members)
            for (int v : tris[t])
                if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
        // circumcenter in real coordinates, averaged over the group
        Vec2 cc(0, 0);
        for (int t : members) {
            const Vec2 A = sites[tris[t][0]].pos, B = sites[tris[t][1]].pos, C = sites[tris[t][2]].pos;
            const Vec2 u = B - A, w = C - A;
            const double d = 2 * cross(u, w);
            cc += A + Vec2(u.squaredNorm() * w.y() - w.squaredNorm() * u.y(),
                           w.squaredNorm() * u.x() - u.squaredNorm() * w.x()) / d;
        }
        cc /= static_cast<double>(members.size());
        const Vec2 ccq(static_cast<double>(nx) / static_cast<double>(Dp), static_cast<double>(ny) / static_cast<double>(Dp));
        std::sort(vs.begin(), vs.end(), [&](int u, int v) {
            const double au = std::atan2(ip[u].y - ccq.y(), ip[u].x - ccq.x());
            const double av = std::atan2(ip[v].y - ccq.y(), ip[v].x - ccq.x());
            return au < av;
        });
        // map sites to network vertices; corner mirrors become -1
        std::vector<int> mapped;
        for (int v : vs) {
            const Site& s = sites[v];
            if (s.kind == SiteKind::Disk) mapped.push_back(s.disk);
            else if (s.kind == SiteKind::WallMirror) mapped.push_back(-2 - v);  // resolved below
            else mapped.push_back(-1);
        }
        // compress runs of non-disk entries to their endpoints
        const int m = static_cast<int>(mapped.size());
        int start = 0;
        while (start < m && mapped[start] < 0) ++start;
        if (start == m) continue;  // no disk on this circle
        std::vector<int> seq;
        for (int k = 0; k < m; ++k) seq.push_back(mapped[(start + k) % m]);
        std::vector<int> out;
        for (int k = 0; k < m;) {
            if (seq[k] >= 0) { out.push_back(seq[k]); ++k; continue; }
            int e = k;
            while (e < m && seq[e] < 0) ++e;
            std::vector<int> run;
            for (int r = k; r < e; ++r)
                if (seq[r] != -1) run.push_back(seq[r]);
            if (!run.empty()) {
                out.push_back(run.front());
                if (run.size() > 1) out.push_back(run.back());
            }
            k = e;
        }
        for (int& v : out)
            if (v <= -2) {
                const Site& s = sites[-2 - v];
                v = quasi_vertex(s.disk, s.wall);
            }
        if (out.size() < 3) continue;
        raw.push_back({out, cc});
    }

    // edges and walls
    std::map<std::pair<int, int>, int> edge_of, wall_of;
    std::vector<std::vector<Vec2>> edge_vor;  // Voronoi endpoints per edge
    auto wall_path = [&](int a, int b) {
        const Vertex &A = net.vertices[a], &B = net.vertices[b];
        std::vector<Vec2> path{A.center};
        if (A.side != B.side) {
            const Vec2 na = outward_normal(A.side), nb = outward_normal(B.side);
            if (na.dot(nb) < -0.5) fail(ErrorKind::Validation, "DegenerateTriangulation", "wall path spans opposite sides");
            const Vec2 s = na + nb;
            path.push_back(Vec2(s.x() * W, s.y() * H));
        }
        path.push_back(B.center);
        return path;
    };
    for (auto& rf : raw) {
        ConstraintFace f;
        f.vertices = rf.verts;
        f.circumcenter = rf.cc;
        const int m = static_cast<int>(rf.verts.size());
        for (int k = 0; k < m; ++k) {
            const int u = rf.verts[k], v = rf.verts[(k + 1) % m];
            const int i = std::min(u, v), j = std::max(u, v);
            FaceSide side;
            side.sign = u == i ? 1 : -1;
            if (!net.interior(i)) {
                auto it = wall_of.find({i, j});
                if (it == wall_of.end()) {
                    it = wall_of.emplace(std::make_pair(i, j), static_cast<int>(net.walls.size())).first;
                    net.walls.push_back({i, j, wall_path(i, j)});
                }
                side.kind = FaceSide::Wall;
                side.index = it->second;
            } else {
                auto it = edge_of.find({i, j});
                if (it == edge_of.end()) {
                    it = edge_of.emplace(std::make_pair(i, j), static_cast<int>(net.edges.size())).first;
                    NeckEdge E;
                    E.i = i;
                    E.j = j;
                    E.kind = net.interior(j) ? NeckKind::InteriorInterior : NeckKind::InteriorBoundary;
                    const Vec2 xi = net.vertices[i].center, xj = net.vertices[j].center;
                    std::tie(E.p, E.q) = local_frame(xi, xj);
                    E.delta = interparticle_gap(E.kind, (xj - xi).norm(), R);
                    E.d = E.delta / delta_ref;
                    net.edges.push_back(E);
                    edge_vor.emplace_back();
                }
                side.kind = FaceSide::Neck;
                side.index = it->second;
                edge_vor[it->second].push_back(rf.cc);
            }
            f.sides.push_back(side);
        }
        net.faces.push_back(std::move(f));
    }
    for (size_t e = 0; e < net.edges.size(); ++e) {
        auto& E = net.edges[e];
        if (edge_vor[e].size() != 2)
            fail(ErrorKind::Validation, "DegenerateTriangulation",
                 "edge " + std::to_string(E.i) + "-" + std::to_string(E.j) + " bounds " +
                     std::to_string(edge_vor[e].size()) + " faces");
        std::tie(E.gm, E.gp) = neck_half_widths(net.vertices[E.i].center, E.p, R, edge_vor[e][0], edge_vor[e][1]);
        if (!(E.gm > 0 && E.gp > 0))
            net.notes.push_back("edge " + std::to_string(E.i) + "-" + std::to_string(E.j) +
                                ": Voronoi edge does not cross the line of centers");
    }

    // connectivity over necks
    std::vector<int> comp(net.vertices.size(), -1);
    std::vector<int> stack{0};
    comp[0] = 0;
    std::vector<std::vector<int>> adj(net.vertices.size());
    for (auto& E : net.edges) { adj[E.i].push_back(E.j); adj[E.j].push_back(E.i); }
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
            if (comp[w] < 0) { comp[w] = 0; stack.push_back(w); }
    }
    for (int i = 0; i < N; ++i)
        if (comp[i] < 0) fail(ErrorKind::Validation, "DisconnectedNetwork", "disk " + std::to_string(i));
    return net;
}

// Outward flux of f = A x through a polyline on the wall, divided by R.
template <class Field>
double wall_flux(const std::vector<Vec2>& path, const Field& f, const DomainRect& dom, double R) {
    double s = 0;
    for (size_t k = 0; k + 1 < path.size(); ++k) {
        const Vec2 a = path[k], b = path[k + 1];
        // the outward normal of the side containing both points
        Vec2 n(0, 0);
        const Vec2 m = 0.5 * (a + b);
        if (std::abs(m.x() - dom.half_width) < 1e-12 * dom.half_width) n = {1, 0};
        else if (std::abs(m.x() + dom.half_width) < 1e-12 * dom.half_width) n = {-1, 0};
        else if (std::abs(m.y() - dom.half_height) < 1e-12 * dom.half_height) n = {0, 1};
        else if (std::abs(m.y() + dom.half_height) < 1e-12 * dom.half_height) n = {0, -1};
        else fail(ErrorKind::Validation, "NotBoundarySegment", "segment off the wall");
        // f is affine, so the midpoint rule is exact
        s += f(m).dot(n) * (b - a).norm();
    }
    return s / R;
}

}  // namespace suspnet
