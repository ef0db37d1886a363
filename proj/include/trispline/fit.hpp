#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "trispline/spline_space.hpp"

namespace trispline {

// Image-on-scalar data: n subjects, each an image sampled at the same N
// pixel centers. The first covariate column is the intercept (all ones).
// Pixels outside the triangulation are masked and excluded from every sum.
struct Dataset {
    Eigen::MatrixXd X; // n x (p+1)
    Eigen::MatrixXd Y; // n x N (may be NaN at masked pixels only)
    std::vector<Point2> pixels;

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()) - 1; }
    int n_pixels() const { return static_cast<int>(pixels.size()); }
};

// Solver cache for one (space, pixel set) pair. Uses the generalized
// eigenbasis W of (Gtilde, D) with Gtilde = sum_j Btilde(z_j) Btilde(z_j)',
// Btilde = Q2' B: in that basis the penalized normal equations decouple
// into q small (p+1) x (p+1) systems, so cross-validation folds, penalty
// grids and bootstrap refits all reuse one O(q^3) factorization.
class FitContext {
public:
    FitContext(std::shared_ptr<const SplineSpace> space, std::vector<Point2> pixels);

    const SplineSpace& space() const { return *space_; }
    std::shared_ptr<const SplineSpace> space_ptr() const { return space_; }
    const EvalMatrix& eval() const { return em_; }
    const std::vector<Point2>& pixels() const { return pixels_; }
    int n_inside() const { return em_.n_inside; }
    int dim() const { return space_->dim(); }

    // q x n_inside matrix of W-basis values at the inside pixels
    const Eigen::MatrixXd& basis_w() const { return basis_w_; }
    const Eigen::MatrixXd& w() const { return W_; }
    const Eigen::VectorXd& penalty_eigs() const { return s_; }
    // column of basis_w for pixel j (global index), -1 when masked
    int inside_column(int j) const { return inside_col_[static_cast<std::size_t>(j)]; }
    const std::vector<int>& inside_columns() const { return inside_col_; }

    // data-to-penalty scale: trace(Gtilde)/trace(D), 0 when D vanishes
    double penalty_scale() const { return penalty_scale_; }

    // 10-point log-spaced default grid in [1e-4, 1e2] * penalty_scale
    std::vector<double> default_rho_grid() const;

private:
    std::shared_ptr<const SplineSpace> space_;
    std::vector<Point2> pixels_;
    EvalMatrix em_;
    Eigen::MatrixXd W_;       // q x q generalized eigenvectors
    Eigen::VectorXd s_;       // q nonnegative penalty eigenvalues
    Eigen::MatrixXd basis_w_; // q x n_inside
    std::vector<int> inside_col_;
    double penalty_scale_ = 0.0;
};

struct FitResult {
    Eigen::MatrixXd theta;         // q x (p+1) reduced coefficients
    Eigen::MatrixXd gamma;         // n_coeff x (p+1), gamma = Q2 theta
    Eigen::MatrixXd beta_surfaces; // (p+1) x N, zero at masked pixels
    Eigen::VectorXd rho;           // penalty per coefficient function
    double cv_score = std::numeric_limits<double>::quiet_NaN();
    SmoothMethod method = SmoothMethod::bpst;
    std::shared_ptr<const FitContext> context;
};

// Throws on non-finite X, NaN responses at inside pixels, n < 2, or a
// collinear design (condition number of X'X above 1e12).
void validate_dataset(const Dataset& data, const FitContext& ctx);

// Penalized least squares with per-coefficient penalties rho (size p+1, or
// size 1 to share one value).
FitResult fit_bpst(const Dataset& data, std::shared_ptr<const FitContext> ctx,
                   const Eigen::VectorXd& rho);

// Piecewise-constant closed form (degree-0 space): independent OLS of Y on
// X restricted to each triangle's pixels.
FitResult fit_pcst(const Dataset& data, std::shared_ptr<const FitContext> ctx);

struct CvResult {
    Eigen::VectorXd best_rho;
    double best_score = 0.0;
    std::vector<double> grid;
    std::vector<double> scores; // aligned with grid
};

// K-fold cross-validation over a shared penalty grid. Subjects are
// partitioned by a seeded shuffle; ties resolve to the smaller rho.
CvResult cross_validate(const Dataset& data, std::shared_ptr<const FitContext> ctx,
                        const std::vector<double>& rho_grid, int K, std::uint64_t seed);

} // namespace trispline
