#include "trispline/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trispline/errors.hpp"
#include "trispline/parallel.hpp"
#include "trispline/rng.hpp"
#include "trispline/stats.hpp"

namespace trispline {

Band pci(const FitResult& fit, const SESurfaces& se, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw validation_error("pci: alpha must be in (0,1)");
    if (se.se.rows() != fit.beta_surfaces.rows() || se.se.cols() != fit.beta_surfaces.cols())
        throw validation_error("pci: fit and standard-error shapes differ");
    const double z = normal_quantile(1.0 - alpha / 2.0);
    Band b;
    b.kind = BandKind::pci;
    b.alpha_nominal = alpha;
    b.alpha_adjusted = Eigen::VectorXd::Constant(fit.beta_surfaces.rows(), alpha);
    b.boundary_flag.assign(static_cast<std::size_t>(fit.beta_surfaces.rows()), false);
    b.lower = fit.beta_surfaces - z * se.se;
    b.upper = fit.beta_surfaces + z * se.se;
    return b;
}

namespace {

std::vector<double> default_alpha_grid(double alpha0) {
    const double lo = 1e-3;
    const double hi = alpha0;
    std::vector<double> grid;
    const int m = 60;
    for (int k = 0; k < m; ++k)
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (m - 1)));
    return grid;
}

} // namespace

Band scc(const Dataset& data, const FitResult& fit, const CovarianceEstimate& cov,
         const SccConfig& cfg) {
    if (!fit.context)
        throw validation_error("scc: fit carries no solver context");
    const auto ctx = fit.context;
    const int n = data.n();
    const int p1 = data.p() + 1;
    const int N = data.n_pixels();
    const int B = cfg.n_boot;
    if (B < 50)
        throw validation_error("scc: need at least 50 bootstrap replicates");
    if (!(cfg.alpha0 > 0.0 && cfg.alpha0 < 1.0))
        throw validation_error("scc: alpha0 must be in (0,1)");

    // the resolution requirement B >= 2/min(alpha) guards explicit grids;
    // the default grid keeps its full range so deep calibration stays
    // reachable at moderate B
    std::vector<double> grid;
    if (cfg.alpha_grid.empty()) {
        grid = default_alpha_grid(cfg.alpha0);
    } else {
        grid = cfg.alpha_grid;
        std::sort(grid.begin(), grid.end());
        if (B < 2.0 / grid.front())
            throw validation_error("scc: bootstrap sample too small for the alpha grid "
                                   "(need B >= 2/min(alpha_grid))");
    }
    std::sort(grid.begin(), grid.end());
    if (grid.front() <= 0.0 || grid.back() > cfg.alpha0 + 1e-12)
        throw validation_error("scc: alpha grid must lie in (0, alpha0]");

    // fitted mean per subject and pixel, shared across replicates
    const Eigen::MatrixXd mu = data.X * fit.beta_surfaces; // n x N
    const std::vector<bool>& inside = ctx->eval().inside;

    // per-pixel bootstrap z-scores t_b = |beta - beta*_b| / se*_b
    std::vector<Eigen::MatrixXd> tmat(static_cast<std::size_t>(p1));
    for (auto& m : tmat)
        m.resize(N, B);

    parallel_for(B, cfg.threads, [&](int b) {
        Eigen::MatrixXd Ystar(n, N);
        Ystar.setZero();
        for (int i = 0; i < n; ++i) {
            const double di = rademacher(cfg.seed, static_cast<std::uint64_t>(b),
                                         static_cast<std::uint64_t>(i));
            for (int j = 0; j < N; ++j) {
                if (!inside[static_cast<std::size_t>(j)]) continue;
                const double eps = data.Y(i, j) - mu(i, j) - cov.eta_hat(i, j);
                const double dij =
                    rademacher(cfg.seed, static_cast<std::uint64_t>(b),
                               static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
                Ystar(i, j) = mu(i, j) + di * cov.eta_hat(i, j) + dij * eps;
            }
        }
        Dataset dstar{data.X, std::move(Ystar), data.pixels};
        FitResult fstar = fit.method == SmoothMethod::bpst
                              ? fit_bpst(dstar, ctx, fit.rho)
                              : fit_pcst(dstar, ctx);
        CovarianceEstimate cstar = estimate_covariance(dstar, fstar, cov.eta_context);
        SESurfaces sstar = fit.method == SmoothMethod::bpst ? se_bpst(dstar, fstar, cstar)
                                                            : se_pcst(dstar, fstar, cstar);
        for (int l = 0; l < p1; ++l)
            for (int j = 0; j < N; ++j) {
                if (!inside[static_cast<std::size_t>(j)]) {
                    tmat[static_cast<std::size_t>(l)](j, b) = 0.0;
                    continue;
                }
                const double num = std::fabs(fit.beta_surfaces(l, j) - fstar.beta_surfaces(l, j));
                const double den = sstar.se(l, j);
                tmat[static_cast<std::size_t>(l)](j, b) =
                    den > 0.0 ? num / den
                              : (num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            }
    });

    // per pixel, the coverage condition tau(alpha) >= 1 - alpha0 holds iff
    // Z_{1-alpha/2} reaches the m-th smallest bootstrap z-score; taking the
    // max over pixels gives the per-coefficient critical score
    const int m_rank = static_cast<int>(std::ceil((1.0 - cfg.alpha0) * B));
    Band out;
    out.kind = BandKind::scc;
    out.alpha_nominal = cfg.alpha0;
    out.alpha_adjusted = Eigen::VectorXd::Constant(p1, grid.front());
    out.boundary_flag.assign(static_cast<std::size_t>(p1), false);
    out.lower = Eigen::MatrixXd::Zero(p1, N);
    out.upper = Eigen::MatrixXd::Zero(p1, N);

    for (int l = 0; l < p1; ++l) {
        double crit = 0.0;
        std::vector<double> col(static_cast<std::size_t>(B));
        for (int j = 0; j < N; ++j) {
            if (!inside[static_cast<std::size_t>(j)]) continue;
            for (int b = 0; b < B; ++b)
                col[static_cast<std::size_t>(b)] = tmat[static_cast<std::size_t>(l)](j, b);
            std::nth_element(col.begin(), col.begin() + (m_rank - 1), col.end());
            crit = std::max(crit, col[static_cast<std::size_t>(m_rank - 1)]);
        }
        // grid root, rounded toward the wider band: largest grid alpha whose
        // normal quantile still covers the critical score
        double alpha_hat = std::numeric_limits<double>::quiet_NaN();
        for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
            if (normal_quantile(1.0 - *it / 2.0) >= crit) {
                alpha_hat = *it;
                break;
            }
        }
        bool flagged = false;
        if (std::isnan(alpha_hat)) {
            alpha_hat = grid.front(); // even the widest band failed
            flagged = true;
        }
        if (alpha_hat == grid.front() || alpha_hat == grid.back())
            flagged = true; // calibration pinned at a grid end
        out.alpha_adjusted(l) = alpha_hat;
        out.boundary_flag[static_cast<std::size_t>(l)] = flagged;
    }

    // final corridor from the original fit and standard errors
    SESurfaces se = fit.method == SmoothMethod::bpst ? se_bpst(data, fit, cov)
                                                     : se_pcst(data, fit, cov);
    for (int l = 0; l < p1; ++l) {
        const double z = normal_quantile(1.0 - out.alpha_adjusted(l) / 2.0);
        out.lower.row(l) = fit.beta_surfaces.row(l) - z * se.se.row(l);
        out.upper.row(l) = fit.beta_surfaces.row(l) + z * se.se.row(l);
    }
    for (int j = 0; j < N; ++j)
        if (!inside[static_cast<std::size_t>(j)]) {
            out.lower.col(j).setZero();
            out.upper.col(j).setZero();
        }
    return out;
}

SignificanceMap significance_map(const Band& band, const std::vector<bool>& inside) {
    SignificanceMap map;
    map.code.resize(band.lower.rows(), band.lower.cols());
    map.code.setZero();
    for (Eigen::Index l = 0; l < band.lower.rows(); ++l)
        for (Eigen::Index j = 0; j < band.lower.cols(); ++j) {
            if (!inside[static_cast<std::size_t>(j)]) continue;
            if (band.lower(l, j) > 0.0)
                map.code(l, j) = 1;
            else if (band.upper(l, j) < 0.0)
                map.code(l, j) = -1;
        }
    return map;
}

} // namespace trispline
