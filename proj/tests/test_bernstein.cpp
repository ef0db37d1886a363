#include <doctest.h>

#include <cmath>

#include "trispline/bernstein.hpp"
#include "trispline/errors.hpp"
#include "trispline/rng.hpp"

using namespace trispline;

namespace {

const std::array<Point2, 3> unit_tri = {{{0, 0}, {1, 0}, {0, 1}}};

// closed-form integral of a product of two Bernstein functions over T:
// int_T B_ijk B_i'j'k' = 2A * (d!/(i!j!k!)) (d!/(i'!j'!k'!)) *
//                       (i+i')!(j+j')!(k+k')! / (2d+2)!
double product_integral(int d, BernsteinIndex a, BernsteinIndex b, double area) {
    auto fact = [](int n) {
        double f = 1.0;
        for (int k = 2; k <= n; ++k) f *= k;
        return f;
    };
    const double ca = fact(d) / (fact(a.i) * fact(a.j) * fact(a.k));
    const double cb = fact(d) / (fact(b.i) * fact(b.j) * fact(b.k));
    return 2.0 * area * ca * cb * fact(a.i + b.i) * fact(a.j + b.j) * fact(a.k + b.k) /
           fact(2 * d + 2);
}

std::array<double, 3> random_bary(Rng& rng) {
    double u = rng.next_uniform(), v = rng.next_uniform();
    if (u + v > 1.0) { u = 1.0 - u; v = 1.0 - v; }
    return {1.0 - u - v, u, v};
}

} // namespace

TEST_CASE("index enumeration is lexicographic with d* entries") {
    auto idx = basis_indices(3);
    REQUIRE(static_cast<int>(idx.size()) == basis_count(3));
    CHECK(idx.front().i == 3);
    CHECK(idx.back().k == 3);
    for (std::size_t m = 0; m < idx.size(); ++m)
        CHECK(basis_rank(3, idx[m].i, idx[m].j, idx[m].k) == static_cast<int>(m));
}

TEST_CASE("vertex evaluation puts all mass on one function") {
    for (int d : {1, 2, 5}) {
        auto v = eval_basis(d, {1.0, 0.0, 0.0});
        CHECK(v(0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(v.tail(v.size() - 1).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("degree-2 centroid value of B_110 is 2/9") {
    auto v = eval_basis(2, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    CHECK(v(basis_rank(2, 1, 1, 0)) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("degree-1 basis equals the barycentric coordinates") {
    Rng rng(11);
    for (int it = 0; it < 50; ++it) {
        auto b = random_bary(rng);
        auto v = eval_basis(1, b);
        CHECK(v(0) == doctest::Approx(b[0]).epsilon(1e-14));
        CHECK(v(1) == doctest::Approx(b[1]).epsilon(1e-14));
        CHECK(v(2) == doctest::Approx(b[2]).epsilon(1e-14));
    }
}

TEST_CASE("partition of unity at random interior points") {
    Rng rng(5);
    for (int d : {2, 5}) {
        for (int it = 0; it < 1000; ++it) {
            auto v = eval_basis(d, random_bary(rng));
            CHECK(std::fabs(v.sum() - 1.0) < 1e-12);
            CHECK(v.minCoeff() >= 0.0);
            CHECK(v.maxCoeff() <= 1.0);
        }
    }
}

TEST_CASE("invalid barycentric input is rejected") {
    CHECK_THROWS_AS(eval_basis(2, {0.5, 0.5, 0.5}), validation_error);
    CHECK_THROWS_AS(eval_basis(2, {1.2, -0.2, 0.0}), validation_error);
}

TEST_CASE("first derivatives of the linear basis on the unit triangle") {
    // basis = (1-z1-z2, z1, z2): d/dz1 = (-1, 1, 0), d/dz2 = (-1, 0, 1)
    auto dx = eval_derivatives(1, unit_tri, {0.3, 0.3, 0.4}, 1, 0);
    CHECK(dx(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(dx(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dx(2) == doctest::Approx(0.0).epsilon(1e-14));
    auto dy = eval_derivatives(1, unit_tri, {0.3, 0.3, 0.4}, 0, 1);
    CHECK(dy(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(dy(1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(dy(2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("derivatives of the constant sum vanish") {
    Rng rng(17);
    const std::array<Point2, 3> tri = {{{0.2, -0.1}, {1.3, 0.4}, {0.5, 1.1}}};
    for (int d : {1, 3, 5}) {
        for (auto [a1, a2] : {std::pair{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}) {
            auto v = eval_derivatives(d, tri, random_bary(rng), a1, a2);
            CHECK(std::fabs(v.sum()) < 1e-10);
        }
    }
}

TEST_CASE("degree zero has zero derivatives and below-order returns zeros") {
    auto v = eval_derivatives(0, unit_tri, {0.2, 0.3, 0.5}, 1, 0);
    CHECK(v.size() == 1);
    CHECK(v(0) == 0.0);
    auto w = eval_derivatives(1, unit_tri, {0.2, 0.3, 0.5}, 2, 0);
    CHECK(w.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(eval_derivatives(3, unit_tri, {0.2, 0.3, 0.5}, 2, 1), validation_error);
}

TEST_CASE("derivatives match central finite differences") {
    Rng rng(23);
    const std::array<Point2, 3> tri = {{{0.1, 0.0}, {1.2, 0.3}, {0.4, 1.0}}};
    const double h = 1e-5;
    auto bary_at = [&](Point2 z) -> std::array<double, 3> {
        const double det = (tri[1].x - tri[0].x) * (tri[2].y - tri[0].y) -
                           (tri[2].x - tri[0].x) * (tri[1].y - tri[0].y);
        const double b1 = ((tri[1].x - z.x) * (tri[2].y - z.y) - (tri[2].x - z.x) * (tri[1].y - z.y)) / det;
        const double b2 = ((tri[2].x - z.x) * (tri[0].y - z.y) - (tri[0].x - z.x) * (tri[2].y - z.y)) / det;
        return {b1, b2, 1.0 - b1 - b2};
    };
    for (int d : {2, 4, 5}) {
        for (int it = 0; it < 20; ++it) {
            auto b = random_bary(rng);
            // keep clear of the boundary so the FD stencil stays inside
            for (auto& c : b) c = 0.1 + 0.8 * c / 3.0 * 3.0;
            double s = b[0] + b[1] + b[2];
            for (auto& c : b) c /= s;
            const Point2 z{b[0] * tri[0].x + b[1] * tri[1].x + b[2] * tri[2].x,
                           b[0] * tri[0].y + b[1] * tri[1].y + b[2] * tri[2].y};
            auto vx = eval_derivatives(d, tri, b, 1, 0);
            auto vy = eval_derivatives(d, tri, b, 0, 1);
            auto vp = eval_basis(d, bary_at({z.x + h, z.y}));
            auto vm = eval_basis(d, bary_at({z.x - h, z.y}));
            auto wp = eval_basis(d, bary_at({z.x, z.y + h}));
            auto wm = eval_basis(d, bary_at({z.x, z.y - h}));
            CHECK(((vp - vm) / (2 * h) - vx).cwiseAbs().maxCoeff() < 1e-6);
            CHECK(((wp - wm) / (2 * h) - vy).cwiseAbs().maxCoeff() < 1e-6);
            // second derivatives against first-derivative differences
            auto sxx = eval_derivatives(d, tri, b, 2, 0);
            auto fxp = eval_derivatives(d, tri, bary_at({z.x + h, z.y}), 1, 0);
            auto fxm = eval_derivatives(d, tri, bary_at({z.x - h, z.y}), 1, 0);
            CHECK(((fxp - fxm) / (2 * h) - sxx).cwiseAbs().maxCoeff() < 1e-5);
        }
    }
}

TEST_CASE("basis integral closed form: 2A/((d+1)(d+2))") {
    const std::array<Point2, 3> tri = {{{0.0, 0.0}, {2.0, 0.2}, {0.3, 1.5}}};
    const double area = 0.5 * std::fabs((2.0 - 0.0) * (1.5 - 0.0) - (0.3 - 0.0) * (0.2 - 0.0));
    for (int d : {0, 1, 3, 5}) {
        auto ge = gram_and_energy(d, tri);
        const double expected = 2.0 * area / ((d + 1.0) * (d + 2.0));
        // row sums of the mass matrix = int of B_m * (partition of unity)
        for (int m = 0; m < basis_count(d); ++m)
            CHECK(std::fabs(ge.mass.row(m).sum() - expected) < 1e-12);
    }
}

TEST_CASE("mass matrix matches the factorial product formula entrywise") {
    const std::array<Point2, 3> tri = {{{-0.5, 0.1}, {1.1, -0.2}, {0.2, 0.9}}};
    const double area = 0.5 * std::fabs((tri[1].x - tri[0].x) * (tri[2].y - tri[0].y) -
                                        (tri[2].x - tri[0].x) * (tri[1].y - tri[0].y));
    for (int d : {1, 2, 5}) {
        auto ge = gram_and_energy(d, tri);
        auto idx = basis_indices(d);
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a; b < idx.size(); ++b) {
                const double expected = product_integral(d, idx[a], idx[b], area);
                CHECK(ge.mass(static_cast<int>(a), static_cast<int>(b)) ==
                      doctest::Approx(expected).epsilon(1e-12));
            }
        // symmetric positive definite
        Eigen::LLT<Eigen::MatrixXd> llt(ge.mass);
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("energy of linear splines is zero, quadratic z1^2 has energy 4A") {
    const std::array<Point2, 3> tri = {{{0.3, -0.2}, {1.4, 0.1}, {0.6, 1.2}}};
    const double area = 0.5 * std::fabs((tri[1].x - tri[0].x) * (tri[2].y - tri[0].y) -
                                        (tri[2].x - tri[0].x) * (tri[1].y - tri[0].y));

    auto ge1 = gram_and_energy(1, tri);
    CHECK(ge1.energy.cwiseAbs().maxCoeff() < 1e-12);

    // coefficients of s(z) = z1^2 in the degree-2 basis: values at domain
    // points determine the coefficients through interpolation
    auto ge2 = gram_and_energy(2, tri);
    auto idx = basis_indices(2);
    Eigen::MatrixXd V(basis_count(2), basis_count(2));
    Eigen::VectorXd f(basis_count(2));
    for (std::size_t m = 0; m < idx.size(); ++m) {
        const std::array<double, 3> b = {idx[m].i / 2.0, idx[m].j / 2.0, idx[m].k / 2.0};
        const double x = b[0] * tri[0].x + b[1] * tri[1].x + b[2] * tri[2].x;
        V.row(static_cast<int>(m)) = eval_basis(2, b).transpose();
        f(static_cast<int>(m)) = x * x;
    }
    Eigen::VectorXd gamma = V.fullPivLu().solve(f);
    const double energy = gamma.dot(ge2.energy * gamma);
    CHECK(energy == doctest::Approx(4.0 * area).epsilon(1e-10));

    // any linear function in the degree-2 basis has zero energy
    Eigen::VectorXd flin(basis_count(2));
    for (std::size_t m = 0; m < idx.size(); ++m) {
        const std::array<double, 3> b = {idx[m].i / 2.0, idx[m].j / 2.0, idx[m].k / 2.0};
        const double x = b[0] * tri[0].x + b[1] * tri[1].x + b[2] * tri[2].x;
        const double y = b[0] * tri[0].y + b[1] * tri[1].y + b[2] * tri[2].y;
        flin(static_cast<int>(m)) = 2.0 * x - 3.0 * y + 1.0;
    }
    Eigen::VectorXd glin = V.fullPivLu().solve(flin);
    CHECK(std::fabs(glin.dot(ge2.energy * glin)) < 1e-10);

    // energy is PSD with nullity >= 3 for d >= 1
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ge2.energy);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    int nullity = 0;
    for (int k = 0; k < es.eigenvalues().size(); ++k)
        if (es.eigenvalues()(k) < 1e-9 * es.eigenvalues().maxCoeff()) ++nullity;
    CHECK(nullity >= 3);
}
