#include "trispline/spline_space.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "trispline/bernstein.hpp"
#include "trispline/errors.hpp"

namespace trispline {

namespace {

// Map a Bernstein index expressed in a permuted-local vertex order back to
// the stored order. `perm[s]` is the stored slot of desired-local vertex s:
// a coefficient with desired exponents (e0,e1,e2) has stored exponents
// exp[perm[s]] = e_s.
int rank_in_stored_order(int d, const std::array<int, 3>& perm, int e0, int e1, int e2) {
    std::array<int, 3> exp{};
    exp[static_cast<std::size_t>(perm[0])] = e0;
    exp[static_cast<std::size_t>(perm[1])] = e1;
    exp[static_cast<std::size_t>(perm[2])] = e2;
    return basis_rank(d, exp[0], exp[1], exp[2]);
}

// permutation of a triangle's stored vertices (t0,t1,t2) so that local
// order is (off, a, b); returns perm with perm[s] = stored slot
std::array<int, 3> local_permutation(const std::array<int, 3>& tri, int off, int a, int b) {
    std::array<int, 3> perm{};
    for (int s = 0; s < 3; ++s) {
        const int want = (s == 0) ? off : (s == 1) ? a : b;
        int found = -1;
        for (int k = 0; k < 3; ++k)
            if (tri[static_cast<std::size_t>(k)] == want) found = k;
        if (found < 0)
            throw numerical_error("local_permutation: vertex not in triangle");
        perm[static_cast<std::size_t>(s)] = found;
    }
    return perm;
}

} // namespace

Eigen::SparseMatrix<double> build_constraints(const Triangulation& mesh, int d, int r) {
    if (r > d)
        throw validation_error("build_constraints: smoothness r exceeds degree d");
    const int d_star = basis_count(d);
    const int n_coeff = mesh.n_triangles() * d_star;

    std::vector<Eigen::Triplet<double>> trip;
    int row = 0;
    if (d >= 1) {
        for (const auto& e : mesh.interior_edges()) {
            const auto& ta = mesh.triangles()[static_cast<std::size_t>(e.tri_a)];
            const auto& tb = mesh.triangles()[static_cast<std::size_t>(e.tri_b)];
            auto off_vertex = [&](const std::array<int, 3>& t) {
                for (int k = 0; k < 3; ++k)
                    if (t[static_cast<std::size_t>(k)] != e.v0 && t[static_cast<std::size_t>(k)] != e.v1)
                        return t[static_cast<std::size_t>(k)];
                throw numerical_error("interior edge without off-edge vertex");
            };
            const int u = off_vertex(ta); // off-edge vertex of tri_a
            const int w = off_vertex(tb); // off-edge vertex of tri_b
            const auto perm_a = local_permutation(ta, u, e.v0, e.v1);
            const auto perm_b = local_permutation(tb, w, e.v0, e.v1);

            // barycentric coordinates of w with respect to (u, v0, v1)
            const auto& vs = mesh.vertices();
            const std::array<Point2, 3> T = {vs[static_cast<std::size_t>(u)],
                                             vs[static_cast<std::size_t>(e.v0)],
                                             vs[static_cast<std::size_t>(e.v1)]};
            const Point2 pw = vs[static_cast<std::size_t>(w)];
            const double det = (T[1].x - T[0].x) * (T[2].y - T[0].y) -
                               (T[2].x - T[0].x) * (T[1].y - T[0].y);
            const double beta1 = ((T[1].x - pw.x) * (T[2].y - pw.y) -
                                  (T[2].x - pw.x) * (T[1].y - pw.y)) / det;
            const double beta2 = ((T[2].x - pw.x) * (T[0].y - pw.y) -
                                  (T[0].x - pw.x) * (T[2].y - pw.y)) / det;
            const std::array<double, 3> beta = {beta1, beta2, 1.0 - beta1 - beta2};

            for (int s = 0; s <= r; ++s) {
                const Eigen::VectorXd bs = eval_basis_unchecked(s, beta); // beta can be negative
                const auto idx_s = basis_indices(s);
                for (int j = d - s; j >= 0; --j) {
                    const int k = d - s - j;
                    // c~_{s,j,k} - sum_{|al|=s} B^s_al(beta) c_{al0, j+al1, k+al2} = 0
                    const int col_b = e.tri_b * d_star + rank_in_stored_order(d, perm_b, s, j, k);
                    trip.emplace_back(row, col_b, 1.0);
                    for (std::size_t m = 0; m < idx_s.size(); ++m) {
                        const auto [n0, n1, n2] = idx_s[m];
                        const int col_a = e.tri_a * d_star +
                                          rank_in_stored_order(d, perm_a, n0, j + n1, k + n2);
                        trip.emplace_back(row, col_a, -bs(static_cast<Eigen::Index>(m)));
                    }
                    ++row;
                }
            }
        }
    }
    Eigen::SparseMatrix<double> H(row, n_coeff);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

Eigen::MatrixXd nullspace(const Eigen::SparseMatrix<double>& H, int n_cols, double rank_tol) {
    if (H.rows() == 0)
        return Eigen::MatrixXd::Identity(n_cols, n_cols);
    Eigen::MatrixXd Ht = Eigen::MatrixXd(H).transpose(); // n_cols x m
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Ht);
    const Eigen::MatrixXd& R = qr.matrixQR();
    const int kmax = static_cast<int>(std::min(R.rows(), R.cols()));
    double rmax = 0.0;
    for (int k = 0; k < kmax; ++k)
        rmax = std::max(rmax, std::fabs(R(k, k)));
    int rank = 0;
    for (int k = 0; k < kmax; ++k)
        if (std::fabs(R(k, k)) > rank_tol * rmax) ++rank;
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n_cols, n_cols);
    return Q.rightCols(n_cols - rank);
}

SplineSpace::SplineSpace(std::shared_ptr<const Triangulation> mesh, int d, int r, double rank_tol,
                         bool allow_low_degree)
    : mesh_(std::move(mesh)), d_(d), r_(r) {
    if (d_ < 0 || r_ < 0)
        throw validation_error("SplineSpace: degree and smoothness must be nonnegative");
    if (r_ > d_)
        throw validation_error("SplineSpace: smoothness r exceeds degree d");
    if (r_ >= 1 && d_ < 3 * r_ + 2 && !allow_low_degree)
        throw validation_error("SplineSpace: d >= 3r+2 required for full approximation power "
                               "(pass allow_low_degree to override)");
    const int d_star = basis_count(d_);
    n_coeff_ = mesh_->n_triangles() * d_star;

    H_ = build_constraints(*mesh_, d_, r_);
    Q2_ = nullspace(H_, n_coeff_, rank_tol);
    q_ = static_cast<int>(Q2_.cols());

    // block-diagonal energy
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh_->n_triangles()) *
                 static_cast<std::size_t>(d_star) * static_cast<std::size_t>(d_star));
    for (int t = 0; t < mesh_->n_triangles(); ++t) {
        const auto ge = gram_and_energy(d_, mesh_->corners(t));
        for (int a = 0; a < d_star; ++a)
            for (int b = 0; b < d_star; ++b)
                if (ge.energy(a, b) != 0.0)
                    trip.emplace_back(t * d_star + a, t * d_star + b, ge.energy(a, b));
    }
    P_.resize(n_coeff_, n_coeff_);
    P_.setFromTriplets(trip.begin(), trip.end());
    D_ = Q2_.transpose() * P_ * Q2_;
    D_ = 0.5 * (D_ + D_.transpose().eval()); // symmetrize roundoff
}

int SplineSpace::global_index(int t, int m) const {
    return t * basis_count(d_) + m;
}

std::optional<double> SplineSpace::evaluate(const Eigen::VectorXd& gamma, const Point2& z) const {
    auto loc = mesh_->locate(z);
    if (!loc)
        return std::nullopt;
    const Eigen::VectorXd vals = eval_basis(d_, loc->bary.b);
    const int base = loc->triangle * basis_count(d_);
    return vals.dot(gamma.segment(base, basis_count(d_)));
}

EvalMatrix build_eval_matrix(const SplineSpace& space, const std::vector<Point2>& pixels) {
    const int N = static_cast<int>(pixels.size());
    const int d_star = basis_count(space.degree());
    EvalMatrix em;
    em.B.resize(N, space.n_coeff());
    em.inside.assign(static_cast<std::size_t>(N), false);
    em.triangle_of.assign(static_cast<std::size_t>(N), -1);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(N) * static_cast<std::size_t>(d_star));
    for (int j = 0; j < N; ++j) {
        const auto& z = pixels[static_cast<std::size_t>(j)];
        if (!std::isfinite(z.x) || !std::isfinite(z.y))
            throw validation_error("build_eval_matrix: non-finite pixel coordinate at row " +
                                   std::to_string(j));
        auto loc = space.mesh().locate(z);
        if (!loc)
            continue;
        em.inside[static_cast<std::size_t>(j)] = true;
        em.triangle_of[static_cast<std::size_t>(j)] = loc->triangle;
        ++em.n_inside;
        std::array<double, 3> b = loc->bary.b;
        // clip roundoff so eval_basis validation stays happy
        for (auto& v : b) v = std::max(v, 0.0);
        const double s = b[0] + b[1] + b[2];
        for (auto& v : b) v /= s;
        const Eigen::VectorXd vals = eval_basis(space.degree(), b);
        const int base = loc->triangle * d_star;
        for (int m = 0; m < d_star; ++m)
            trip.emplace_back(j, base + m, vals(m));
    }
    em.B.setFromTriplets(trip.begin(), trip.end());
    return em;
}

} // namespace trispline
