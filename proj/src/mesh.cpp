#include "trispline/mesh.hpp"

#include "trispline/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace trispline {

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double dist(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// squared distance from p to segment [a,b]
double point_segment_dist2(const Point2& p, const Point2& a, const Point2& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double wx = p.x - a.x, wy = p.y - a.y;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = wx - t * vx, dy = wy - t * vy;
    return dx * dx + dy * dy;
}

} // namespace

Triangulation::Triangulation(std::vector<Point2> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    validate_and_index();
    build_locator();
}

std::array<Point2, 3> Triangulation::corners(int t) const {
    const auto& tr = triangles_[static_cast<std::size_t>(t)];
    return {vertices_[static_cast<std::size_t>(tr[0])], vertices_[static_cast<std::size_t>(tr[1])],
            vertices_[static_cast<std::size_t>(tr[2])]};
}

void Triangulation::validate_and_index() {
    const int nv = n_vertices();
    const int nt = n_triangles();
    if (nv < 3 || nt < 1)
        throw validation_error("triangulation needs at least 3 vertices and 1 triangle");

    for (auto& t : triangles_)
        for (int k = 0; k < 3; ++k)
            if (t[static_cast<std::size_t>(k)] < 0 || t[static_cast<std::size_t>(k)] >= nv)
                throw validation_error("triangle vertex index out of range");

    areas_.resize(static_cast<std::size_t>(nt));
    domain_area_ = 0.0;
    for (int t = 0; t < nt; ++t) {
        auto c = corners(t);
        const double a = signed_area(c[0], c[1], c[2]);
        if (a <= 0.0)
            throw validation_error("triangle " + std::to_string(t) +
                                   " is not counterclockwise or is degenerate");
        areas_[static_cast<std::size_t>(t)] = a;
        domain_area_ += a;
    }
    for (int t = 0; t < nt; ++t)
        if (areas_[static_cast<std::size_t>(t)] <= area_eps * domain_area_)
            throw validation_error("triangle " + std::to_string(t) + " is degenerate (area " +
                                   std::to_string(areas_[static_cast<std::size_t>(t)]) + ")");

    // Edge incidence: every undirected edge belongs to at most two triangles,
    // and the two orientations must oppose (consistent winding, no fans).
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int t = 0; t < nt; ++t) {
        const auto& tr = triangles_[static_cast<std::size_t>(t)];
        for (int k = 0; k < 3; ++k) {
            int a = tr[static_cast<std::size_t>(k)], b = tr[static_cast<std::size_t>((k + 1) % 3)];
            if (a == b)
                throw validation_error("triangle " + std::to_string(t) + " repeats a vertex");
            edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
        }
    }
    interior_edges_.clear();
    for (const auto& [e, ts] : edge_tris) {
        if (ts.size() > 2)
            throw validation_error("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                                   ") is shared by more than two triangles");
        if (ts.size() == 2) {
            InteriorEdge ie;
            ie.tri_a = std::min(ts[0], ts[1]);
            ie.tri_b = std::max(ts[0], ts[1]);
            ie.v0 = e.first;
            ie.v1 = e.second;
            interior_edges_.push_back(ie);
        }
    }

    // T-junction scan: no vertex may sit strictly inside another triangle's
    // edge. Meshes here are small, the quadratic sweep is fine.
    const double tol2 = 1e-24 * domain_area_;
    for (const auto& [e, ts] : edge_tris) {
        const Point2& a = vertices_[static_cast<std::size_t>(e.first)];
        const Point2& b = vertices_[static_cast<std::size_t>(e.second)];
        const double elen = dist(a, b);
        for (int v = 0; v < nv; ++v) {
            if (v == e.first || v == e.second) continue;
            const Point2& p = vertices_[static_cast<std::size_t>(v)];
            if (point_segment_dist2(p, a, b) < tol2) {
                const double da = dist(p, a), db = dist(p, b);
                if (da > 1e-9 * elen && db > 1e-9 * elen)
                    throw validation_error("vertex " + std::to_string(v) +
                                           " lies in the interior of edge (" + std::to_string(e.first) +
                                           "," + std::to_string(e.second) + ") — T-junction");
            }
        }
    }

    bbox_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
             std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
    for (const auto& p : vertices_) {
        bbox_[0] = std::min(bbox_[0], p.x);
        bbox_[1] = std::max(bbox_[1], p.x);
        bbox_[2] = std::min(bbox_[2], p.y);
        bbox_[3] = std::max(bbox_[3], p.y);
    }
}

void Triangulation::build_locator() {
    const int nt = n_triangles();
    // ~2 triangles per cell on average
    const int target = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nt))));
    grid_nx_ = grid_ny_ = 2 * target;
    const double w = bbox_[1] - bbox_[0], h = bbox_[3] - bbox_[2];
    cell_w_ = w > 0.0 ? w / grid_nx_ : 1.0;
    cell_h_ = h > 0.0 ? h / grid_ny_ : 1.0;
    cells_.assign(static_cast<std::size_t>(grid_nx_) * static_cast<std::size_t>(grid_ny_), {});
    for (int t = 0; t < nt; ++t) {
        auto c = corners(t);
        double x0 = std::min({c[0].x, c[1].x, c[2].x}), x1 = std::max({c[0].x, c[1].x, c[2].x});
        double y0 = std::min({c[0].y, c[1].y, c[2].y}), y1 = std::max({c[0].y, c[1].y, c[2].y});
        int i0 = std::clamp(static_cast<int>((x0 - bbox_[0]) / cell_w_), 0, grid_nx_ - 1);
        int i1 = std::clamp(static_cast<int>((x1 - bbox_[0]) / cell_w_), 0, grid_nx_ - 1);
        int j0 = std::clamp(static_cast<int>((y0 - bbox_[2]) / cell_h_), 0, grid_ny_ - 1);
        int j1 = std::clamp(static_cast<int>((y1 - bbox_[2]) / cell_h_), 0, grid_ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                cells_[static_cast<std::size_t>(j) * grid_nx_ + i].push_back(t);
    }
    for (auto& cell : cells_)
        std::sort(cell.begin(), cell.end()); // keeps the lowest-index tie-break cheap
}

Barycentric Triangulation::barycentric(int t, const Point2& z) const {
    auto c = corners(t);
    const double det = (c[1].x - c[0].x) * (c[2].y - c[0].y) - (c[2].x - c[0].x) * (c[1].y - c[0].y);
    const double b1 = ((c[1].x - z.x) * (c[2].y - z.y) - (c[2].x - z.x) * (c[1].y - z.y)) / det;
    const double b2 = ((c[2].x - z.x) * (c[0].y - z.y) - (c[0].x - z.x) * (c[2].y - z.y)) / det;
    return Barycentric{{b1, b2, 1.0 - b1 - b2}};
}

std::optional<Located> Triangulation::locate(const Point2& z) const {
    if (z.x < bbox_[0] - locate_eps || z.x > bbox_[1] + locate_eps || z.y < bbox_[2] - locate_eps ||
        z.y > bbox_[3] + locate_eps)
        return std::nullopt;
    int ci = std::clamp(static_cast<int>((z.x - bbox_[0]) / cell_w_), 0, grid_nx_ - 1);
    int cj = std::clamp(static_cast<int>((z.y - bbox_[2]) / cell_h_), 0, grid_ny_ - 1);
    for (int t : cells_[static_cast<std::size_t>(cj) * grid_nx_ + ci]) {
        Barycentric b = barycentric(t, z);
        if (b[0] >= -locate_eps && b[1] >= -locate_eps && b[2] >= -locate_eps)
            return Located{t, b};
    }
    return std::nullopt;
}

MeshQuality Triangulation::quality() const {
    MeshQuality q;
    q.min_angle = std::numeric_limits<double>::max();
    for (int t = 0; t < n_triangles(); ++t) {
        auto c = corners(t);
        const double e0 = dist(c[0], c[1]), e1 = dist(c[1], c[2]), e2 = dist(c[2], c[0]);
        const double longest = std::max({e0, e1, e2});
        const double perim = e0 + e1 + e2;
        const double inradius = 2.0 * areas_[static_cast<std::size_t>(t)] / perim;
        if (!(inradius > 0.0))
            throw validation_error("triangle " + std::to_string(t) + " is degenerate");
        q.size = std::max(q.size, longest);
        q.shape_parameter = std::max(q.shape_parameter, longest / inradius);
        // law of cosines per corner
        const std::array<std::array<double, 3>, 3> sides = {{{e0, e2, e1}, {e0, e1, e2}, {e1, e2, e0}}};
        for (const auto& s : sides) {
            const double cosv = (s[0] * s[0] + s[1] * s[1] - s[2] * s[2]) / (2.0 * s[0] * s[1]);
            q.min_angle = std::min(q.min_angle, std::acos(std::clamp(cosv, -1.0, 1.0)));
        }
    }
    return q;
}

int suggest_triangle_count(int n_subjects, int n_pixels, int degree, SmoothMethod method, double c) {
    if (n_subjects < 1 || n_pixels < 1)
        throw validation_error("suggest_triangle_count: n and N must be positive");
    if (degree < 0)
        throw validation_error("suggest_triangle_count: degree must be nonnegative");
    const long double n = static_cast<long double>(n_subjects);
    const long double N = static_cast<long double>(n_pixels);
    long double value;
    if (method == SmoothMethod::bpst) {
        const long double grow =
            c * std::pow(n, 1.0L / (2.0L * degree + 2.0L)) * std::sqrt(N);
        value = std::min(std::floor(grow), N / 10.0L);
    } else {
        const long double grow = c * std::pow(n, -0.25L) * N;
        value = std::min(std::floor(grow), N / 2.0L);
    }
    return std::max(1, static_cast<int>(value));
}

// ---------------------------------------------------------------------------
// Bowyer-Watson Delaunay

namespace {

struct BwTriangle {
    int v0, v1, v2;
    bool alive;
};

bool in_circumcircle(const Point2& a, const Point2& b, const Point2& c, const Point2& p) {
    const double ax = a.x - p.x, ay = a.y - p.y;
    const double bx = b.x - p.x, by = b.y - p.y;
    const double cx = c.x - p.x, cy = c.y - p.y;
    const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                       (bx * bx + by * by) * (ax * cy - cx * ay) +
                       (cx * cx + cy * cy) * (ax * by - bx * ay);
    return det > 0.0;
}

} // namespace

std::vector<std::array<int, 3>> delaunay_triangles(const std::vector<Point2>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 3)
        throw validation_error("delaunay: need at least 3 points");

    std::vector<Point2> pts = points;
    double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
    const double dmax = std::max(x1 - x0, y1 - y0) * 16.0 + 1.0;
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    pts.push_back({cx - 2.0 * dmax, cy - dmax});
    pts.push_back({cx + 2.0 * dmax, cy - dmax});
    pts.push_back({cx, cy + 2.0 * dmax});

    std::vector<BwTriangle> tris;
    tris.push_back({n, n + 1, n + 2, true});

    for (int ip = 0; ip < n; ++ip) {
        const Point2& p = pts[static_cast<std::size_t>(ip)];
        // edges of the cavity boundary
        std::map<std::pair<int, int>, int> edge_count;
        std::vector<std::pair<int, int>> boundary;
        for (auto& t : tris) {
            if (!t.alive) continue;
            if (in_circumcircle(pts[static_cast<std::size_t>(t.v0)], pts[static_cast<std::size_t>(t.v1)],
                                pts[static_cast<std::size_t>(t.v2)], p)) {
                t.alive = false;
                const std::array<std::pair<int, int>, 3> edges = {
                    {{t.v0, t.v1}, {t.v1, t.v2}, {t.v2, t.v0}}};
                for (auto e : edges) {
                    auto key = std::minmax(e.first, e.second);
                    edge_count[{key.first, key.second}]++;
                }
            }
        }
        // rebuild triangle list keeping only shared-once edges oriented as seen
        std::vector<BwTriangle> kept;
        kept.reserve(tris.size());
        std::vector<std::array<int, 2>> cavity;
        for (auto& t : tris)
            if (t.alive) kept.push_back(t);
        // recollect oriented boundary edges from the dead set
        for (auto& t : tris) {
            if (t.alive) continue;
            const std::array<std::pair<int, int>, 3> edges = {
                {{t.v0, t.v1}, {t.v1, t.v2}, {t.v2, t.v0}}};
            for (auto e : edges) {
                auto key = std::minmax(e.first, e.second);
                if (edge_count[{key.first, key.second}] == 1)
                    cavity.push_back({e.first, e.second});
            }
        }
        for (auto e : cavity)
            kept.push_back({e[0], e[1], ip, true});
        tris = std::move(kept);
    }

    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.v0 >= n || t.v1 >= n || t.v2 >= n) continue;
        std::array<int, 3> tri = {t.v0, t.v1, t.v2};
        const double a = signed_area(points[static_cast<std::size_t>(tri[0])],
                                     points[static_cast<std::size_t>(tri[1])],
                                     points[static_cast<std::size_t>(tri[2])]);
        if (std::fabs(a) < 1e-14) continue;
        if (a < 0.0) std::swap(tri[1], tri[2]);
        out.push_back(tri);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Triangulation delaunay_grid(int nx, int ny, double x0, double x1, double y0, double y1) {
    if (nx < 2 || ny < 2)
        throw validation_error("delaunay_grid: need at least a 2x2 grid");
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            pts.push_back({x0 + (x1 - x0) * i / (nx - 1), y0 + (y1 - y0) * j / (ny - 1)});
    // split each grid cell along a consistent diagonal; no circumcircle
    // degeneracies to worry about
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const int a = j * nx + i, b = j * nx + i + 1, c = (j + 1) * nx + i, d = (j + 1) * nx + i + 1;
            tris.push_back({a, b, d});
            tris.push_back({a, d, c});
        }
    return Triangulation(std::move(pts), std::move(tris));
}

} // namespace trispline
