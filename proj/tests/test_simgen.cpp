#include <doctest.h>

#include <cmath>
#include <cstring>

#include "trispline/errors.hpp"
#include "trispline/rng.hpp"
#include "trispline/simgen.hpp"
#include "trispline/variance.hpp"

using namespace trispline;

TEST_CASE("shipped fixtures: mesh and pixel counts") {
    auto hs = load_domain(DomainKind::horseshoe);
    CHECK(hs.mesh_coarse->n_triangles() == 90);
    CHECK(hs.mesh_coarse->n_vertices() == 73);
    CHECK(hs.mesh_fine->n_triangles() == 346);
    CHECK(hs.nx == 100);
    CHECK(hs.ny == 50);
    int inside = 0;
    for (const auto& z : hs.pixels)
        if (hs.mesh_coarse->locate(z)) ++inside;
    CHECK(inside == 3182);
    CHECK(hs.expected_inside == 3182);

    auto s5 = load_domain(DomainKind::slice5);
    CHECK(s5.nx == 79);
    CHECK(s5.ny == 95);
    int in5 = 0;
    for (const auto& z : s5.pixels)
        if (s5.mesh_coarse->locate(z)) ++in5;
    CHECK(in5 == 3476);

    auto s35 = load_domain(DomainKind::slice35);
    int in35 = 0;
    for (const auto& z : s35.pixels)
        if (s35.mesh_coarse->locate(z)) ++in35;
    CHECK(in35 == 5203);

    CHECK(hs.mesh_coarse->domain_area() ==
          doctest::Approx(hs.mesh_fine->domain_area()).epsilon(1e-12));
    CHECK(s5.mesh_coarse->domain_area() ==
          doctest::Approx(s5.mesh_fine->domain_area()).epsilon(1e-9));
}

TEST_CASE("noiseless limit: responses equal the regression surface") {
    auto hs = load_domain(DomainKind::horseshoe);
    SimDesign d;
    d.coeff = CoeffKind::smooth;
    d.n = 5;
    d.lambda1 = 0.0;
    d.lambda2 = 0.0;
    d.sigma = 0.0;
    d.seed = 3;
    auto g = generate(d, hs);
    for (int i = 0; i < d.n; ++i)
        for (Eigen::Index j = 0; j < g.data.Y.cols(); ++j) {
            if (!g.inside[static_cast<std::size_t>(j)]) {
                CHECK(g.data.Y(i, j) == 0.0);
                continue;
            }
            double mean = 0.0;
            for (int l = 0; l < 2; ++l)
                mean += g.data.X(i, l) * g.beta_true(l, j);
            CHECK(g.data.Y(i, j) == doctest::Approx(mean).epsilon(1e-14));
        }
}

TEST_CASE("generator moments: truncated covariates and unit scores") {
    Rng rng(77);
    const double c22 = std::sqrt(0.75);
    double s11 = 0, s22 = 0, s12 = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        double x1, x2;
        do {
            const double z1 = rng.next_normal(), z2 = rng.next_normal();
            x1 = z1;
            x2 = 0.5 * z1 + c22 * z2;
        } while (std::fabs(x1) > 3.0 || std::fabs(x2) > 3.0);
        s11 += x1 * x1;
        s22 += x2 * x2;
        s12 += x1 * x2;
    }
    CHECK(s12 / n > 0.45);
    CHECK(s12 / n < 0.55);
    CHECK(s11 / n > 0.9);
    CHECK(s11 / n < 1.1);
    CHECK(s22 / n > 0.9);
    CHECK(s22 / n < 1.1);

    double sxi = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.next_normal();
        sxi += v * v;
    }
    CHECK(sxi / n > 0.95);
    CHECK(sxi / n < 1.05);
}

TEST_CASE("process covariance matches the two-component expansion") {
    auto hs = load_domain(DomainKind::horseshoe);
    SimDesign d;
    d.coeff = CoeffKind::smooth;
    d.lambda1 = 0.2;
    d.lambda2 = 0.05;
    Generated g = generate(d, hs);

    Rng rng(123);
    std::vector<Point2> zs;
    for (const auto& z : hs.pixels) {
        if (zs.size() >= 20) break;
        if (hs.mesh_coarse->locate(z) && rng.next_uniform() < 0.02)
            zs.push_back(z);
    }
    REQUIRE(zs.size() == 20);
    const int reps = 10000;
    std::vector<double> cov_acc(10, 0.0);
    for (int it = 0; it < reps; ++it) {
        const double xi1 = rng.next_normal(), xi2 = rng.next_normal();
        for (int k = 0; k < 10; ++k) {
            const auto& za = zs[static_cast<std::size_t>(2 * k)];
            const auto& zb = zs[static_cast<std::size_t>(2 * k + 1)];
            const double ea =
                std::sqrt(0.2) * xi1 * g.psi1(za) + std::sqrt(0.05) * xi2 * g.psi2(za);
            const double eb =
                std::sqrt(0.2) * xi1 * g.psi1(zb) + std::sqrt(0.05) * xi2 * g.psi2(zb);
            cov_acc[static_cast<std::size_t>(k)] += ea * eb;
        }
    }
    for (int k = 0; k < 10; ++k) {
        const auto& za = zs[static_cast<std::size_t>(2 * k)];
        const auto& zb = zs[static_cast<std::size_t>(2 * k + 1)];
        const double analytic = 0.2 * g.psi1(za) * g.psi1(zb) + 0.05 * g.psi2(za) * g.psi2(zb);
        CHECK(std::fabs(cov_acc[static_cast<std::size_t>(k)] / reps - analytic) <
              0.1 * std::max(0.02, std::fabs(analytic)));
    }
}

TEST_CASE("same seed reproduces the dataset byte for byte") {
    auto hs = load_domain(DomainKind::horseshoe);
    SimDesign d;
    d.coeff = CoeffKind::jump;
    d.n = 4;
    d.seed = 99;
    auto a = generate(d, hs);
    auto b = generate(d, hs);
    REQUIRE(a.data.Y.size() == b.data.Y.size());
    CHECK(std::memcmp(a.data.Y.data(), b.data.Y.data(),
                      sizeof(double) * static_cast<std::size_t>(a.data.Y.size())) == 0);
    CHECK(std::memcmp(a.data.X.data(), b.data.X.data(),
                      sizeof(double) * static_cast<std::size_t>(a.data.X.size())) == 0);
}

TEST_CASE("mse: exact fit and uniform offset") {
    auto hs = load_domain(DomainKind::horseshoe);
    SimDesign d;
    d.coeff = CoeffKind::flat;
    d.n = 4;
    d.sigma = 0.0;
    d.lambda1 = d.lambda2 = 0.0;
    auto g = generate(d, hs);

    FitResult fr;
    fr.beta_surfaces = g.beta_true;
    Eigen::VectorXd m0 = mse(fr, g.beta_true, g.inside);
    CHECK(m0.cwiseAbs().maxCoeff() == 0.0);

    fr.beta_surfaces.array() += 0.1;
    Eigen::VectorXd m1 = mse(fr, g.beta_true, g.inside);
    CHECK(m1(0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(m1(1) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("monte carlo on a noiseless representable design: zero error, full coverage") {
    auto hs = load_domain(DomainKind::horseshoe);
    SimDesign d;
    d.coeff = CoeffKind::flat;
    d.n = 12;
    d.sigma = 0.0;
    d.lambda1 = d.lambda2 = 0.0;
    d.seed = 5;
    MethodConfig cfg;
    cfg.method = SmoothMethod::pcst;
    cfg.with_scc = true;
    cfg.n_boot = 50;
    auto res = run_monte_carlo(d, hs, cfg, 1, 1);
    CHECK(res.mse_mean.maxCoeff() < 1e-18);
    CHECK(res.coverage.minCoeff() == 1.0);
}

TEST_CASE("monte carlo results are independent of the thread count") {
    auto hs = load_domain(DomainKind::horseshoe);
    SimDesign d;
    d.coeff = CoeffKind::jump;
    d.n = 8;
    d.sigma = 1.0;
    d.lambda1 = 0.1;
    d.lambda2 = 0.02;
    d.seed = 31;
    MethodConfig cfg;
    cfg.method = SmoothMethod::pcst;
    auto r1 = run_monte_carlo(d, hs, cfg, 4, 1);
    auto r2 = run_monte_carlo(d, hs, cfg, 4, 2);
    CHECK((r1.mse_per_rep - r2.mse_per_rep).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("design validation") {
    auto hs = load_domain(DomainKind::horseshoe);
    SimDesign d;
    d.coeff = CoeffKind::example2;
    CHECK_THROWS_AS(generate(d, hs), validation_error);
    SimDesign d2;
    d2.lambda1 = 0.0;
    d2.lambda2 = 0.1;
    CHECK_THROWS_AS(generate(d2, hs), validation_error);
    SimDesign d3;
    d3.sigma = -1.0;
    CHECK_THROWS_AS(generate(d3, hs), validation_error);
}
