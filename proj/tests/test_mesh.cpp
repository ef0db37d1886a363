#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>

#include "trispline/errors.hpp"
#include "trispline/mesh.hpp"
#include "trispline/rng.hpp"

using namespace trispline;

namespace {

std::shared_ptr<Triangulation> unit_right_triangle() {
    return std::make_shared<Triangulation>(
        std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}},
        std::vector<std::array<int, 3>>{{0, 1, 2}});
}

std::shared_ptr<Triangulation> two_triangle_square() {
    return std::make_shared<Triangulation>(
        std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}},
        std::vector<std::array<int, 3>>{{0, 1, 2}, {0, 2, 3}});
}

} // namespace

TEST_CASE("locate: centroid, vertex, interior oracle") {
    auto tri = unit_right_triangle();

    auto c = tri->locate({1.0 / 3.0, 1.0 / 3.0});
    REQUIRE(c.has_value());
    CHECK(c->triangle == 0);
    for (int k = 0; k < 3; ++k)
        CHECK(std::fabs(c->bary[k] - 1.0 / 3.0) < 1e-12);

    auto v = tri->locate({0.0, 0.0});
    REQUIRE(v.has_value());
    CHECK(std::fabs(v->bary[0] - 1.0) < 1e-12);
    CHECK(std::fabs(v->bary[1]) < 1e-12);
    CHECK(std::fabs(v->bary[2]) < 1e-12);

    // oracle: solve the 2x2 affine system for z=(0.25,0.25) by hand:
    // b2 = x = 0.25, b3 = y = 0.25, b1 = 0.5
    auto p = tri->locate({0.25, 0.25});
    REQUIRE(p.has_value());
    CHECK(std::fabs(p->bary[0] - 0.5) < 1e-12);
    CHECK(std::fabs(p->bary[1] - 0.25) < 1e-12);
    CHECK(std::fabs(p->bary[2] - 0.25) < 1e-12);

    CHECK_FALSE(tri->locate({0.8, 0.8}).has_value());
}

TEST_CASE("locate: barycentric coordinates reproduce the query point") {
    auto tri = two_triangle_square();
    Rng rng(42);
    for (int it = 0; it < 200; ++it) {
        Point2 z{rng.next_uniform(), rng.next_uniform()};
        auto loc = tri->locate(z);
        REQUIRE(loc.has_value());
        auto c = tri->corners(loc->triangle);
        const double x = loc->bary[0] * c[0].x + loc->bary[1] * c[1].x + loc->bary[2] * c[2].x;
        const double y = loc->bary[0] * c[0].y + loc->bary[1] * c[1].y + loc->bary[2] * c[2].y;
        CHECK(std::fabs(x - z.x) < 1e-12);
        CHECK(std::fabs(y - z.y) < 1e-12);
        const double s = loc->bary[0] + loc->bary[1] + loc->bary[2];
        CHECK(std::fabs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("locate: shared-edge tie-break is the lowest index, deterministically") {
    auto tri = two_triangle_square();
    // diagonal from (0,0) to (1,1) is shared between triangles 0 and 1
    for (int it = 0; it < 10; ++it) {
        auto loc = tri->locate({0.5, 0.5});
        REQUIRE(loc.has_value());
        CHECK(loc->triangle == 0);
    }
}

TEST_CASE("quality: right triangle and equilateral") {
    auto tri = unit_right_triangle();
    auto q = tri->quality();
    CHECK(q.size == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    const double h = std::sqrt(3.0) / 2.0;
    Triangulation eq({{0, 0}, {1, 0}, {0.5, h}}, {{0, 1, 2}});
    auto qe = eq.quality();
    // inradius of a unit equilateral is 1/(2 sqrt(3)); shape = 2 sqrt(3)
    CHECK(qe.shape_parameter == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
    CHECK(qe.min_angle == doctest::Approx(M_PI / 3.0).epsilon(1e-12));
}

TEST_CASE("quality: shape parameter is at least 2 and areas add up") {
    auto tri = two_triangle_square();
    CHECK(tri->quality().shape_parameter >= 2.0);
    double sum = 0.0;
    for (int t = 0; t < tri->n_triangles(); ++t)
        sum += tri->area(t);
    CHECK(std::fabs(sum - tri->domain_area()) < 1e-10 * tri->domain_area());
    CHECK(tri->domain_area() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("validation rejects degenerate and inconsistent meshes") {
    // zero-area triangle
    CHECK_THROWS_AS(Triangulation({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}), validation_error);
    // clockwise triangle
    CHECK_THROWS_AS(Triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}}), validation_error);
    // T-junction: vertex 3 sits in the middle of edge (1,2) of triangle 0
    CHECK_THROWS_AS(Triangulation({{0, 0}, {1, 0}, {1, 1}, {1, 0.5}, {2, 0.5}},
                                  {{0, 1, 2}, {1, 4, 3}, {3, 4, 2}}),
                    validation_error);
    // the properly split version of the same configuration is accepted
    CHECK_NOTHROW(Triangulation({{0, 0}, {1, 0}, {1, 1}, {1, 0.5}, {2, 0.5}},
                                {{0, 1, 3}, {0, 3, 2}, {1, 4, 3}, {3, 4, 2}}));
    // edge shared by three triangles
    CHECK_THROWS_AS(Triangulation({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 1}},
                                  {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}}),
                    validation_error);
}

TEST_CASE("interior edges are collected once each") {
    auto tri = two_triangle_square();
    REQUIRE(tri->interior_edges().size() == 1);
    const auto& e = tri->interior_edges()[0];
    CHECK(e.tri_a == 0);
    CHECK(e.tri_b == 1);
    CHECK(e.v0 == 0);
    CHECK(e.v1 == 2);
}

TEST_CASE("suggest_triangle_count matches the sizing rule") {
    CHECK(suggest_triangle_count(50, 3182, 5, SmoothMethod::bpst, 1.0) == 78);
    CHECK(suggest_triangle_count(50, 3182, 0, SmoothMethod::pcst, 1.0) == 1196);
    CHECK(suggest_triangle_count(1, 10, 0, SmoothMethod::bpst, 0.3) == 1);
    CHECK_THROWS_AS(suggest_triangle_count(0, 10, 5, SmoothMethod::bpst, 1.0), validation_error);
    CHECK_THROWS_AS(suggest_triangle_count(10, -1, 5, SmoothMethod::bpst, 1.0), validation_error);
}

TEST_CASE("delaunay grid covers the rectangle") {
    auto tri = delaunay_grid(5, 4, 0.0, 2.0, 0.0, 1.0);
    CHECK(tri.n_vertices() == 20);
    CHECK(tri.n_triangles() == 2 * 4 * 3);
    CHECK(tri.domain_area() == doctest::Approx(2.0).epsilon(1e-12));
    Rng rng(7);
    for (int it = 0; it < 100; ++it) {
        Point2 z{2.0 * rng.next_uniform(), rng.next_uniform()};
        CHECK(tri.locate(z).has_value());
    }
}

TEST_CASE("bowyer-watson delaunay on jittered points is a valid mesh") {
    Rng rng(3);
    std::vector<Point2> pts;
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 6; ++i)
            pts.push_back({i + 0.3 * (rng.next_uniform() - 0.5), j + 0.3 * (rng.next_uniform() - 0.5)});
    auto tris = delaunay_triangles(pts);
    Triangulation mesh(pts, tris); // constructor validates
    CHECK(mesh.n_triangles() >= 2 * 25); // convex-ish hull of a 6x6 cloud
}
