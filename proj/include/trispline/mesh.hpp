#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace trispline {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Barycentric {
    std::array<double, 3> b{};
    double operator[](int i) const { return b[static_cast<std::size_t>(i)]; }
};

struct Located {
    int triangle = -1;
    Barycentric bary;
};

// One interior edge: the two incident triangles plus the shared vertex pair.
struct InteriorEdge {
    int tri_a = -1;
    int tri_b = -1;
    int v0 = -1; // global vertex indices, v0 < v1
    int v1 = -1;
};

struct MeshQuality {
    double size = 0.0;            // longest edge over the whole mesh
    double shape_parameter = 0.0; // max over triangles of |T| / inradius
    double min_angle = 0.0;       // radians
};

// Triangulation of a polygonal domain, immutable once built. Triangles are
// stored counterclockwise; any nonempty pairwise intersection must be a
// shared vertex or a shared full edge.
class Triangulation {
public:
    // relative signed-area threshold for rejecting degenerate triangles
    static constexpr double area_eps = 1e-12;
    // edge-inclusive barycentric tolerance for point membership
    static constexpr double locate_eps = 1e-12;

    Triangulation(std::vector<Point2> vertices, std::vector<std::array<int, 3>> triangles);

    const std::vector<Point2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<InteriorEdge>& interior_edges() const { return interior_edges_; }

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_triangles() const { return static_cast<int>(triangles_.size()); }

    double domain_area() const { return domain_area_; }
    double area(int t) const { return areas_[static_cast<std::size_t>(t)]; }
    std::array<Point2, 3> corners(int t) const;

    // Containing triangle and barycentric coordinates, or empty when z lies
    // outside the domain. Points on shared edges/vertices resolve to the
    // lowest containing triangle index.
    std::optional<Located> locate(const Point2& z) const;

    // Barycentric coordinates of z with respect to triangle t (unclamped).
    Barycentric barycentric(int t, const Point2& z) const;

    MeshQuality quality() const;

    std::array<double, 4> bounding_box() const { return bbox_; } // xmin,xmax,ymin,ymax

private:
    void validate_and_index();
    void build_locator();

    std::vector<Point2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<InteriorEdge> interior_edges_;
    std::vector<double> areas_;
    double domain_area_ = 0.0;
    std::array<double, 4> bbox_{};

    // uniform background grid: cell -> sorted candidate triangle indices
    int grid_nx_ = 0, grid_ny_ = 0;
    double cell_w_ = 0.0, cell_h_ = 0.0;
    std::vector<std::vector<std::int32_t>> cells_;
};

enum class SmoothMethod { bpst, pcst };

// Rule-of-thumb triangle count for a given sample size, pixel count and
// degree. Clamped below at 1.
int suggest_triangle_count(int n_subjects, int n_pixels, int degree, SmoothMethod method,
                           double c = 1.0);

// Convenience Delaunay triangulation of an nx-by-ny rectangular grid of
// points over [x0,x1] x [y0,y1].
Triangulation delaunay_grid(int nx, int ny, double x0, double x1, double y0, double y1);

// Delaunay triangulation of an arbitrary point set (Bowyer-Watson, used by
// the fixture generators). Triangles whose centroid falls outside `keep`
// are dropped when a keep-predicate is supplied.
std::vector<std::array<int, 3>> delaunay_triangles(const std::vector<Point2>& points);

// Mesh file I/O. JSON: {"vertices":[[x,y],...],"triangles":[[i,j,k],...]}.
Triangulation load_mesh_json(const std::string& path);
void save_mesh_json(const Triangulation& tri, const std::string& path);
// CSV pair: vertices.csv with rows "x,y", triangles.csv with rows "i,j,k".
Triangulation load_mesh_csv(const std::string& vertices_path, const std::string& triangles_path);

} // namespace trispline
