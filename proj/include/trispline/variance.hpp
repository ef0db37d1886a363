#pragma once

#include <memory>

#include <Eigen/Dense>

#include "trispline/fit.hpp"

namespace trispline {

// Within-subject process covariance and noise variance, estimated from the
// fit residuals. eta_hat rows are the per-subject unpenalized spline
// smooths of the residual images; G_eta(z,z') = n^-1 sum_i eta_i(z)eta_i(z')
// is only ever represented through the reduced coefficients (never as an
// N x N matrix).
struct CovarianceEstimate {
    Eigen::MatrixXd eta_hat;   // n x N, zero at masked pixels
    Eigen::MatrixXd eta_theta; // q_eta x n reduced coefficients in the eta space
    Eigen::VectorXd sigma2;    // length N, zero at masked pixels
    Eigen::VectorXd g_diag;    // length N: G_hat(z_j, z_j)
    std::shared_ptr<const FitContext> eta_context;

    // implicit covariance surface at an arbitrary pair of points (empty
    // outside the domain)
    std::optional<double> g_at(const Point2& z, const Point2& zp) const;
};

// floor applied to sigma2 before it enters any standard-error formula
constexpr double sigma2_floor = 1e-12;

// Per-subject unpenalized smoothing of the residuals R_ij onto the eta
// space, then sigma2(z_j) = n^-1 sum_i (R_ij - eta_i(z_j))^2.
CovarianceEstimate estimate_covariance(const Dataset& data, const FitResult& fit,
                                       std::shared_ptr<const FitContext> eta_context);

struct SESurfaces {
    Eigen::MatrixXd se; // (p+1) x N, zero at masked pixels
};

// Standard errors of the penalized spline coefficient surfaces through the
// plug-in variance sandwich; the eta double sum is collapsed through the
// low-rank covariance factor, so the cost is O(nN + q^2 N), never O(N^2).
SESurfaces se_bpst(const Dataset& data, const FitResult& fit, const CovarianceEstimate& cov);

// Closed-form piecewise-constant standard errors:
// n^-1/2 [ e_l' (n^-1 X'X)^-1 e_l { G(z,z) + sigma2(z) / (N A_m(z)) } ]^1/2
// with A_m the containing triangle's share of the domain area.
SESurfaces se_pcst(const Dataset& data, const FitResult& fit, const CovarianceEstimate& cov);

} // namespace trispline
