#include <doctest.h>

#include <cmath>
#include <memory>

#include "trispline/errors.hpp"
#include "trispline/fit.hpp"
#include "trispline/rng.hpp"
#include "trispline/variance.hpp"

using namespace trispline;

namespace {

std::shared_ptr<Triangulation> square_mesh(int nx, int ny) {
    return std::make_shared<Triangulation>(delaunay_grid(nx, ny, 0.0, 1.0, 0.0, 1.0));
}

std::vector<Point2> lattice_pixels(int nx, int ny) {
    std::vector<Point2> px;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            px.push_back({(i + 0.5) / nx, (j + 0.5) / ny});
    return px;
}

Eigen::MatrixXd random_design(int n, int p, Rng& rng) {
    Eigen::MatrixXd X(n, p + 1);
    X.col(0).setOnes();
    for (int i = 0; i < n; ++i)
        for (int l = 1; l <= p; ++l)
            X(i, l) = rng.next_normal();
    return X;
}

} // namespace

TEST_CASE("zero residuals give zero eta and zero sigma2") {
    auto space = std::make_shared<SplineSpace>(square_mesh(3, 3), 2, 0);
    auto ctx = std::make_shared<FitContext>(space, lattice_pixels(12, 12));
    Rng rng(1);
    const int n = 6, p = 1;
    Eigen::MatrixXd X = random_design(n, p, rng);
    Eigen::MatrixXd gamma0(space->n_coeff(), p + 1);
    for (int l = 0; l <= p; ++l) {
        Eigen::VectorXd th(space->dim());
        for (int a = 0; a < th.size(); ++a) th(a) = rng.next_normal();
        gamma0.col(l) = space->null_basis() * th;
    }
    Eigen::MatrixXd Y = X * (ctx->eval().B * gamma0).transpose();
    auto fr = fit_bpst({X, Y, ctx->pixels()}, ctx, Eigen::VectorXd::Zero(1));
    auto cov = estimate_covariance({X, Y, ctx->pixels()}, fr, ctx);
    CHECK(cov.eta_hat.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(cov.sigma2.maxCoeff() < 1e-16);
}

TEST_CASE("residuals inside the eta space are absorbed exactly") {
    auto space = std::make_shared<SplineSpace>(square_mesh(3, 3), 2, 0);
    auto ctx = std::make_shared<FitContext>(space, lattice_pixels(12, 12));
    Rng rng(2);
    const int n = 8;
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);

    Eigen::MatrixXd eta_gamma(space->n_coeff(), n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd th(space->dim());
        for (int a = 0; a < th.size(); ++a) th(a) = rng.next_normal();
        eta_gamma.col(i) = space->null_basis() * th;
    }
    Eigen::MatrixXd Y = (ctx->eval().B * eta_gamma).transpose(); // n x N

    auto fr = fit_bpst({X, Y, ctx->pixels()}, ctx, Eigen::VectorXd::Zero(1));
    auto cov = estimate_covariance({X, Y, ctx->pixels()}, fr, ctx);
    CHECK(cov.sigma2.maxCoeff() < 1e-16);

    // G_hat diagonal matches the direct Gram of the residual surfaces
    Eigen::MatrixXd resid = Y;
    for (int i = 0; i < n; ++i)
        resid.row(i) -= fr.beta_surfaces.row(0);
    for (int j = 0; j < cov.g_diag.size(); ++j) {
        if (!ctx->eval().inside[static_cast<std::size_t>(j)]) continue;
        const double direct = resid.col(j).squaredNorm() / n;
        CHECK(cov.g_diag(j) == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("residual orthogonality against the eta space basis") {
    auto space = std::make_shared<SplineSpace>(square_mesh(3, 3), 2, 0);
    auto ctx = std::make_shared<FitContext>(space, lattice_pixels(14, 14));
    Rng rng(3);
    const int n = 5, p = 1;
    Eigen::MatrixXd X = random_design(n, p, rng);
    Eigen::MatrixXd Y(n, static_cast<Eigen::Index>(ctx->pixels().size()));
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < Y.cols(); ++j)
            Y(i, j) = rng.next_normal();
    auto fr = fit_bpst({X, Y, ctx->pixels()}, ctx, Eigen::VectorXd::Constant(1, 0.5));
    auto cov = estimate_covariance({X, Y, ctx->pixels()}, fr, ctx);

    Eigen::MatrixXd Bfull = ctx->eval().B * space->null_basis(); // N x q
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd eps = Eigen::VectorXd::Zero(Y.cols());
        for (Eigen::Index j = 0; j < Y.cols(); ++j) {
            if (!ctx->eval().inside[static_cast<std::size_t>(j)]) continue;
            double fitv = 0.0;
            for (int l = 0; l <= p; ++l) fitv += X(i, l) * fr.beta_surfaces(l, j);
            eps(j) = Y(i, j) - fitv - cov.eta_hat(i, j);
        }
        Eigen::VectorXd inner = Bfull.transpose() * eps;
        CHECK(inner.cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, eps.norm()));
    }
}

TEST_CASE("implicit covariance surface is symmetric and PSD") {
    auto space = std::make_shared<SplineSpace>(square_mesh(3, 3), 2, 0);
    auto ctx = std::make_shared<FitContext>(space, lattice_pixels(12, 12));
    Rng rng(4);
    const int n = 6;
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
    Eigen::MatrixXd Y(n, static_cast<Eigen::Index>(ctx->pixels().size()));
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < Y.cols(); ++j)
            Y(i, j) = rng.next_normal();
    auto fr = fit_bpst({X, Y, ctx->pixels()}, ctx, Eigen::VectorXd::Zero(1));
    auto cov = estimate_covariance({X, Y, ctx->pixels()}, fr, ctx);

    for (int it = 0; it < 20; ++it) {
        Point2 a{rng.next_uniform(), rng.next_uniform()};
        Point2 b{rng.next_uniform(), rng.next_uniform()};
        auto gab = cov.g_at(a, b);
        auto gba = cov.g_at(b, a);
        REQUIRE(gab.has_value());
        CHECK(*gab == doctest::Approx(*gba).epsilon(1e-12));
    }
    for (int it = 0; it < 5; ++it) {
        std::vector<Point2> zs;
        for (int k = 0; k < 6; ++k) zs.push_back({rng.next_uniform(), rng.next_uniform()});
        Eigen::MatrixXd G(6, 6);
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                G(a, b) = *cov.g_at(zs[static_cast<std::size_t>(a)],
                                    zs[static_cast<std::size_t>(b)]);
        Eigen::VectorXd v(6);
        for (int k = 0; k < 6; ++k) v(k) = rng.next_normal();
        CHECK(v.dot(G * v) >= -1e-10);
    }
    CHECK_FALSE(cov.g_at({5.0, 5.0}, {0.5, 0.5}).has_value());
}

TEST_CASE("factorized sandwich equals the naive double sum on a tiny instance") {
    auto space = std::make_shared<SplineSpace>(square_mesh(2, 2), 2, 0);
    auto ctx = std::make_shared<FitContext>(space, lattice_pixels(10, 5));
    const int q = space->dim();
    REQUIRE(q <= 30);
    Rng rng(5);
    const int n = 4, p = 1, N = 50;
    Eigen::MatrixXd X = random_design(n, p, rng);
    Eigen::MatrixXd Y(n, N);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < N; ++j)
            Y(i, j) = 0.3 * X(i, 1) + rng.next_normal();

    for (bool per_ell : {false, true}) {
        Eigen::VectorXd rho(p + 1);
        if (per_ell)
            rho << 0.21, 0.87;
        else
            rho = Eigen::VectorXd::Constant(p + 1, 0.4);
        auto fr = fit_bpst({X, Y, ctx->pixels()}, ctx, rho);
        auto cov = estimate_covariance({X, Y, ctx->pixels()}, fr, ctx);
        auto se = se_bpst({X, Y, ctx->pixels()}, fr, cov);

        Eigen::MatrixXd BQ = Eigen::MatrixXd(ctx->eval().B) * space->null_basis(); // N x q
        Eigen::MatrixXd Ghat = cov.eta_hat.transpose() * cov.eta_hat / n;          // N x N
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero((p + 1) * q, (p + 1) * q);
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXd Ui((p + 1) * q, N);
            for (int j = 0; j < N; ++j)
                for (int l = 0; l <= p; ++l)
                    Ui.block(l * q, j, q, 1) = X(i, l) * BQ.row(j).transpose();
            K.noalias() += Ui * Ghat * Ui.transpose();
            for (int j = 0; j < N; ++j)
                K.noalias() += std::max(cov.sigma2(j), sigma2_floor) * Ui.col(j) *
                               Ui.col(j).transpose();
        }
        Eigen::MatrixXd Gam = Eigen::MatrixXd::Zero((p + 1) * q, (p + 1) * q);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < N; ++j) {
                Eigen::VectorXd u((p + 1) * q);
                for (int l = 0; l <= p; ++l)
                    u.segment(l * q, q) = X(i, l) * BQ.row(j).transpose();
                Gam.noalias() += u * u.transpose();
            }
        for (int l = 0; l <= p; ++l)
            Gam.block(l * q, l * q, q, q) += rho(l) * space->reduced_penalty();
        Gam /= static_cast<double>(n) * N;
        Eigen::MatrixXd Gi = Gam.inverse();
        Eigen::MatrixXd mid = Gi * K * Gi / (static_cast<double>(n) * n * N * N);
        for (int j = 0; j < N; ++j) {
            for (int l = 0; l <= p; ++l) {
                Eigen::VectorXd bb = Eigen::VectorXd::Zero((p + 1) * q);
                bb.segment(l * q, q) = BQ.row(j).transpose();
                const double naive = std::sqrt(bb.dot(mid * bb));
                CHECK(se.se(l, j) == doctest::Approx(naive).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("pure-noise sandwich reduces to the unpenalized closed form") {
    auto space = std::make_shared<SplineSpace>(square_mesh(2, 2), 2, 0);
    auto ctx = std::make_shared<FitContext>(space, lattice_pixels(10, 5));
    Rng rng(6);
    const int n = 4, p = 1, N = 50;
    Eigen::MatrixXd X = random_design(n, p, rng);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, N);

    auto fr = fit_bpst({X, Y, ctx->pixels()}, ctx, Eigen::VectorXd::Zero(1));
    auto cov = estimate_covariance({X, Y, ctx->pixels()}, fr, ctx);
    const double c = 0.7;
    cov.eta_hat.setZero();
    cov.eta_theta.setZero();
    cov.sigma2.setConstant(c);
    cov.g_diag.setZero();
    auto se = se_bpst({X, Y, ctx->pixels()}, fr, cov);

    Eigen::MatrixXd BQ = Eigen::MatrixXd(ctx->eval().B) * space->null_basis();
    Eigen::MatrixXd Gi = (BQ.transpose() * BQ).inverse();
    Eigen::MatrixXd Si = (X.transpose() * X).inverse();
    for (int j = 0; j < N; ++j) {
        const double quad = BQ.row(j) * Gi * BQ.row(j).transpose();
        for (int l = 0; l <= p; ++l) {
            const double expect = std::sqrt(c * Si(l, l) * quad);
            CHECK(se.se(l, j) == doctest::Approx(expect).epsilon(1e-9));
            CHECK(se.se(l, j) > 0.0);
        }
    }
}

TEST_CASE("doubling n with identical surfaces halves the squared standard error") {
    auto space = std::make_shared<SplineSpace>(square_mesh(3, 3), 2, 0);
    auto ctx = std::make_shared<FitContext>(space, lattice_pixels(12, 12));
    Rng rng(7);
    const int n = 8, p = 1;
    const Eigen::Index N = static_cast<Eigen::Index>(ctx->pixels().size());
    Eigen::MatrixXd X = random_design(n, p, rng);
    Eigen::MatrixXd Y(n, N);
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            Y(i, j) = rng.next_normal();

    const double rho = 0.3;
    auto fit1 = fit_bpst({X, Y, ctx->pixels()}, ctx, Eigen::VectorXd::Constant(1, rho));
    auto cov1 = estimate_covariance({X, Y, ctx->pixels()}, fit1, ctx);
    auto se1 = se_bpst({X, Y, ctx->pixels()}, fit1, cov1);

    // duplicate every subject; double rho so the fitted surfaces are identical
    Eigen::MatrixXd X2(2 * n, p + 1), Y2(2 * n, N);
    X2 << X, X;
    Y2 << Y, Y;
    auto fit2 = fit_bpst({X2, Y2, ctx->pixels()}, ctx, Eigen::VectorXd::Constant(1, 2.0 * rho));
    CHECK((fit2.beta_surfaces - fit1.beta_surfaces).cwiseAbs().maxCoeff() < 1e-9);
    auto cov2 = estimate_covariance({X2, Y2, ctx->pixels()}, fit2, ctx);
    auto se2 = se_bpst({X2, Y2, ctx->pixels()}, fit2, cov2);

    for (Eigen::Index j = 0; j < N; ++j) {
        if (!ctx->eval().inside[static_cast<std::size_t>(j)]) continue;
        for (int l = 0; l <= p; ++l) {
            const double ratio = (se2.se(l, j) * se2.se(l, j)) / (se1.se(l, j) * se1.se(l, j));
            CHECK(ratio == doctest::Approx(0.5).epsilon(0.05));
        }
    }

    // pcst path scales the same way
    auto space0 = std::make_shared<SplineSpace>(square_mesh(3, 3), 0, 0);
    auto ctx0 = std::make_shared<FitContext>(space0, ctx->pixels());
    auto f1 = fit_pcst({X, Y, ctx->pixels()}, ctx0);
    auto c1 = estimate_covariance({X, Y, ctx->pixels()}, f1, ctx0);
    auto s1 = se_pcst({X, Y, ctx->pixels()}, f1, c1);
    auto f2 = fit_pcst({X2, Y2, ctx->pixels()}, ctx0);
    auto c2 = estimate_covariance({X2, Y2, ctx->pixels()}, f2, ctx0);
    auto s2 = se_pcst({X2, Y2, ctx->pixels()}, f2, c2);
    for (Eigen::Index j = 0; j < N; ++j) {
        if (!ctx0->eval().inside[static_cast<std::size_t>(j)]) continue;
        const double ratio = (s2.se(0, j) * s2.se(0, j)) / (s1.se(0, j) * s1.se(0, j));
        CHECK(ratio == doctest::Approx(0.5).epsilon(0.05));
    }
}

TEST_CASE("pcst standard error closed form and scaling") {
    auto space0 = std::make_shared<SplineSpace>(square_mesh(3, 3), 0, 0);
    auto ctx0 = std::make_shared<FitContext>(space0, lattice_pixels(12, 12));
    Rng rng(8);
    const int n = 10;
    const Eigen::Index N = static_cast<Eigen::Index>(ctx0->pixels().size());
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, N);

    auto fr = fit_pcst({X, Y, ctx0->pixels()}, ctx0);
    auto cov = estimate_covariance({X, Y, ctx0->pixels()}, fr, ctx0);
    cov.g_diag.setZero();
    cov.sigma2.setConstant(1.0);
    auto se = se_pcst({X, Y, ctx0->pixels()}, fr, cov);

    const auto& tri_of = ctx0->eval().triangle_of;
    const double N_in = ctx0->n_inside();
    for (Eigen::Index j = 0; j < N; ++j) {
        if (tri_of[static_cast<std::size_t>(j)] < 0) continue;
        const double a_m = ctx0->space().mesh().area(tri_of[static_cast<std::size_t>(j)]) /
                           ctx0->space().mesh().domain_area();
        const double expect = std::sqrt(1.0 / (n * N_in * a_m));
        CHECK(se.se(0, j) == doctest::Approx(expect).epsilon(1e-12));
    }

    // quadrupling the bracket doubles the band
    auto cov4 = cov;
    cov4.sigma2.setConstant(4.0);
    auto se4 = se_pcst({X, Y, ctx0->pixels()}, fr, cov4);
    for (Eigen::Index j = 0; j < N; ++j)
        if (tri_of[static_cast<std::size_t>(j)] >= 0)
            CHECK(se4.se(0, j) == doctest::Approx(2.0 * se.se(0, j)).epsilon(1e-12));
}
