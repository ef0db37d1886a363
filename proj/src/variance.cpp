#include "trispline/variance.hpp"

#include <cmath>

#include "trispline/bernstein.hpp"
#include "trispline/errors.hpp"

namespace trispline {

namespace {

Eigen::MatrixXd gather_inside(const Eigen::MatrixXd& wide, const FitContext& ctx) {
    Eigen::MatrixXd out(wide.rows(), ctx.n_inside());
    const auto& cols = ctx.inside_columns();
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (cols[j] >= 0) out.col(cols[j]) = wide.col(static_cast<Eigen::Index>(j));
    return out;
}

// square-root factor of a PSD matrix; LLT normally, eigen fallback when the
// matrix is only semidefinite
Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& C) {
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() == Eigen::Success)
        return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

} // namespace

std::optional<double> CovarianceEstimate::g_at(const Point2& z, const Point2& zp) const {
    const auto& sp = eta_context->space();
    auto la = sp.mesh().locate(z);
    auto lb = sp.mesh().locate(zp);
    if (!la || !lb)
        return std::nullopt;
    const int d_star = basis_count(sp.degree());
    auto reduced_row = [&](const Located& loc) -> Eigen::RowVectorXd {
        std::array<double, 3> b = loc.bary.b;
        for (auto& v : b) v = std::max(v, 0.0);
        const double sum = b[0] + b[1] + b[2];
        for (auto& v : b) v /= sum;
        const Eigen::VectorXd vals = eval_basis(sp.degree(), b);
        return vals.transpose() * sp.null_basis().middleRows(loc.triangle * d_star, d_star);
    };
    // eta_i(z) = (Q2' B(z))' theta_i
    const Eigen::VectorXd va = (reduced_row(*la) * eta_theta).transpose();
    const Eigen::VectorXd vb = (reduced_row(*lb) * eta_theta).transpose();
    return va.dot(vb) / static_cast<double>(eta_theta.cols());
}

CovarianceEstimate estimate_covariance(const Dataset& data, const FitResult& fit,
                                       std::shared_ptr<const FitContext> eta_context) {
    if (!fit.context)
        throw validation_error("estimate_covariance: fit carries no solver context");
    const FitContext& fctx = *fit.context;
    if (static_cast<Eigen::Index>(fctx.pixels().size()) != data.Y.cols())
        throw validation_error("estimate_covariance: fit and data pixel counts differ");
    if (eta_context->pixels().size() != fctx.pixels().size())
        throw validation_error("estimate_covariance: eta space built over different pixels");
    validate_dataset(data, fctx);

    const int n = data.n();
    const int N = data.n_pixels();

    Eigen::MatrixXd beta_in = gather_inside(fit.beta_surfaces, fctx); // (p+1) x N_in
    Eigen::MatrixXd R = gather_inside(data.Y, fctx);                  // n x N_in
    R.noalias() -= data.X * beta_in;

    // unpenalized per-subject smooth: in the eta W basis the projector is an
    // orthogonal projection, coefficients = Bw_eta * residual row
    const Eigen::MatrixXd& Bw = eta_context->basis_w();
    Eigen::MatrixXd ctheta = Bw * R.transpose();        // q_eta x n, W coordinates
    Eigen::MatrixXd eta_in = (Bw.transpose() * ctheta); // N_in x n

    CovarianceEstimate cov;
    cov.eta_context = eta_context;
    cov.eta_theta = eta_context->w() * ctheta;
    cov.eta_hat = Eigen::MatrixXd::Zero(n, N);
    cov.sigma2 = Eigen::VectorXd::Zero(N);
    cov.g_diag = Eigen::VectorXd::Zero(N);
    const auto& cols = fctx.inside_columns();
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const int c = cols[j];
        if (c < 0) continue;
        cov.eta_hat.col(static_cast<Eigen::Index>(j)) = eta_in.row(c).transpose();
        const Eigen::VectorXd eps = R.col(c) - eta_in.row(c).transpose();
        cov.sigma2(static_cast<Eigen::Index>(j)) = eps.squaredNorm() / n;
        cov.g_diag(static_cast<Eigen::Index>(j)) = eta_in.row(c).squaredNorm() / n;
    }
    return cov;
}

SESurfaces se_bpst(const Dataset& data, const FitResult& fit, const CovarianceEstimate& cov) {
    if (fit.method != SmoothMethod::bpst)
        throw validation_error("se_bpst: fit was not produced by the penalized method");
    if (!fit.context)
        throw validation_error("se_bpst: fit carries no factorized solver context");
    const FitContext& ctx = *fit.context;
    const int n = data.n();
    const int p1 = data.p() + 1;
    const int q = ctx.dim();
    const int N = data.n_pixels();
    const Eigen::MatrixXd& Bw = ctx.basis_w();

    const Eigen::MatrixXd S = data.X.transpose() * data.X;
    const Eigen::VectorXd& s = ctx.penalty_eigs();
    const Eigen::VectorXd rho =
        fit.rho.size() == p1 ? fit.rho : Eigen::VectorXd::Constant(p1, fit.rho(0));

    // C = n^-1 sum_i v_i v_i' + sum_j Btilde(z_j) Btilde(z_j)' sigma2(z_j),
    // expressed in the W basis
    Eigen::MatrixXd eta_in = gather_inside(cov.eta_hat, ctx); // n x N_in
    Eigen::VectorXd sig_in(ctx.n_inside());
    {
        const auto& cols = ctx.inside_columns();
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (cols[j] >= 0)
                sig_in(cols[j]) =
                    std::max(cov.sigma2(static_cast<Eigen::Index>(j)), sigma2_floor);
    }

    Eigen::MatrixXd V = Bw * eta_in.transpose(); // q x n
    Eigen::MatrixXd C = (V * V.transpose()) / static_cast<double>(n);
    C.noalias() += Bw * sig_in.asDiagonal() * Bw.transpose();
    const Eigen::MatrixXd L = psd_sqrt_factor(C);

    SESurfaces out;
    out.se = Eigen::MatrixXd::Zero(p1, N);
    Eigen::MatrixXd se2_in = Eigen::MatrixXd::Zero(p1, ctx.n_inside());

    const bool shared_rho = (rho.maxCoeff() - rho.minCoeff()) == 0.0;
    if (shared_rho) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        const Eigen::VectorXd lam = es.eigenvalues();
        const Eigen::MatrixXd& Vx = es.eigenvectors();
        if (lam.minCoeff() <= 0.0)
            throw numerical_error("se_bpst: X'X is singular");
        for (int k = 0; k < p1; ++k) {
            const Eigen::ArrayXd dvec = 1.0 / (lam(k) + rho(0) * s.array());
            const Eigen::MatrixXd M = L.transpose() * (dvec.matrix().asDiagonal() * Bw);
            const Eigen::RowVectorXd mk = M.colwise().squaredNorm();
            for (int l = 0; l < p1; ++l)
                se2_in.row(l) += (Vx(l, k) * Vx(l, k) * lam(k)) * mk;
        }
    } else {
        // per-coefficient penalties: per-eigenvalue small inverses, one GEMM
        // per (c,l) channel
        std::vector<Eigen::MatrixXd> Minv(static_cast<std::size_t>(q));
        Eigen::MatrixXd A(p1, p1);
        for (int a = 0; a < q; ++a) {
            A = S;
            for (int l = 0; l < p1; ++l)
                A(l, l) += rho(l) * s(a);
            Minv[static_cast<std::size_t>(a)] = A.inverse();
        }
        for (int l = 0; l < p1; ++l) {
            std::vector<Eigen::MatrixXd> T(static_cast<std::size_t>(p1));
            Eigen::VectorXd chan(q);
            for (int c = 0; c < p1; ++c) {
                for (int a = 0; a < q; ++a)
                    chan(a) = Minv[static_cast<std::size_t>(a)](c, l);
                T[static_cast<std::size_t>(c)] = L.transpose() * (chan.asDiagonal() * Bw);
            }
            for (int c = 0; c < p1; ++c)
                for (int cp = 0; cp < p1; ++cp)
                    se2_in.row(l) += S(c, cp) *
                                     (T[static_cast<std::size_t>(c)].array() *
                                      T[static_cast<std::size_t>(cp)].array())
                                         .colwise()
                                         .sum()
                                         .matrix();
        }
    }

    const auto& cols = ctx.inside_columns();
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (cols[j] >= 0)
            out.se.col(static_cast<Eigen::Index>(j)) =
                se2_in.col(cols[j]).cwiseMax(0.0).cwiseSqrt();
    return out;
}

SESurfaces se_pcst(const Dataset& data, const FitResult& fit, const CovarianceEstimate& cov) {
    if (fit.method != SmoothMethod::pcst)
        throw validation_error("se_pcst: fit was not produced by the piecewise-constant method");
    if (!fit.context)
        throw validation_error("se_pcst: fit carries no solver context");
    const FitContext& ctx = *fit.context;
    const Triangulation& mesh = ctx.space().mesh();
    const int n = data.n();
    const int p1 = data.p() + 1;
    const int N = data.n_pixels();
    const double N_in = ctx.n_inside();

    const Eigen::MatrixXd Sx_inv =
        (data.X.transpose() * data.X / static_cast<double>(n)).inverse();

    SESurfaces out;
    out.se = Eigen::MatrixXd::Zero(p1, N);
    const auto& tri_of = ctx.eval().triangle_of;
    for (std::size_t j = 0; j < tri_of.size(); ++j) {
        const int t = tri_of[j];
        if (t < 0) continue;
        const double a_m = mesh.area(t) / mesh.domain_area();
        const double g = cov.g_diag(static_cast<Eigen::Index>(j));
        const double s2 = std::max(cov.sigma2(static_cast<Eigen::Index>(j)), sigma2_floor);
        const double common = g + s2 / (N_in * a_m);
        for (int l = 0; l < p1; ++l)
            out.se(l, static_cast<Eigen::Index>(j)) =
                std::sqrt(Sx_inv(l, l) * common / static_cast<double>(n));
    }
    return out;
}

} // namespace trispline
