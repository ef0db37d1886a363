#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "trispline/mesh.hpp"

namespace trispline {

// Global spline space S^r_d over a triangulation: Bernstein coefficients per
// triangle stacked in triangle order, cross-edge smoothness expressed as
// H gamma = 0, an orthonormal null-space basis Q2 of H, the block-diagonal
// thin-plate energy matrix P, and the reduced penalty D = Q2' P Q2.
class SplineSpace {
public:
    // rank_tol: relative threshold on |R| diagonals when ranking H.
    // allow_low_degree: permit r >= 1 with d < 3r+2 (reduced approximation
    // power) instead of rejecting the configuration.
    SplineSpace(std::shared_ptr<const Triangulation> mesh, int d, int r,
                double rank_tol = 1e-10, bool allow_low_degree = false);

    const Triangulation& mesh() const { return *mesh_; }
    std::shared_ptr<const Triangulation> mesh_ptr() const { return mesh_; }
    int degree() const { return d_; }
    int smoothness() const { return r_; }
    int n_coeff() const { return n_coeff_; }         // H_tri * d*
    int dim() const { return q_; }                    // null-space dimension

    const Eigen::SparseMatrix<double>& constraints() const { return H_; }
    const Eigen::MatrixXd& null_basis() const { return Q2_; }
    const Eigen::SparseMatrix<double>& penalty() const { return P_; }
    const Eigen::MatrixXd& reduced_penalty() const { return D_; }

    // global coefficient slot of Bernstein index rank `m` on triangle `t`
    int global_index(int t, int m) const;

    // spline value at z for a full coefficient vector (empty optional
    // outside the domain)
    std::optional<double> evaluate(const Eigen::VectorXd& gamma, const Point2& z) const;

private:
    std::shared_ptr<const Triangulation> mesh_;
    int d_, r_;
    int n_coeff_ = 0;
    int q_ = 0;
    Eigen::SparseMatrix<double> H_;
    Eigen::MatrixXd Q2_;
    Eigen::SparseMatrix<double> P_;
    Eigen::MatrixXd D_;
};

// Cross-edge C^r constraint rows for the given mesh/degree; one row per
// smoothness condition. Exposed separately so the constraint block can be
// tested on its own.
Eigen::SparseMatrix<double> build_constraints(const Triangulation& mesh, int d, int r);

// Orthonormal basis of ker(H) via QR of H'; rank decided by
// |R_ii| > rank_tol * max|R_ii|.
Eigen::MatrixXd nullspace(const Eigen::SparseMatrix<double>& H, int n_cols, double rank_tol);

// Rows of Bernstein basis values at pixel locations: N x n_coeff sparse,
// zero rows (mask false) for pixels outside the domain.
struct EvalMatrix {
    Eigen::SparseMatrix<double, Eigen::RowMajor> B;
    std::vector<bool> inside;
    std::vector<int> triangle_of; // containing triangle per pixel, -1 outside
    int n_inside = 0;
};
EvalMatrix build_eval_matrix(const SplineSpace& space, const std::vector<Point2>& pixels);

} // namespace trispline
