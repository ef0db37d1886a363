#include "trispline/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trispline/bernstein.hpp"
#include "trispline/errors.hpp"
#include "trispline/rng.hpp"

namespace trispline {

FitContext::FitContext(std::shared_ptr<const SplineSpace> space, std::vector<Point2> pixels)
    : space_(std::move(space)), pixels_(std::move(pixels)) {
    em_ = build_eval_matrix(*space_, pixels_);
    const int q = space_->dim();
    const int N_in = em_.n_inside;
    if (N_in == 0)
        throw validation_error("FitContext: no pixels fall inside the triangulation");

    inside_col_.assign(pixels_.size(), -1);
    int col = 0;
    for (std::size_t j = 0; j < pixels_.size(); ++j)
        if (em_.inside[j]) inside_col_[j] = col++;

    // Btilde rows at inside pixels: B_in * Q2, sparse times dense
    Eigen::MatrixXd BQ(N_in, q);
    {
        Eigen::MatrixXd full = em_.B * space_->null_basis(); // N x q, masked rows zero
        int r = 0;
        for (std::size_t j = 0; j < pixels_.size(); ++j)
            if (em_.inside[j]) BQ.row(r++) = full.row(static_cast<Eigen::Index>(j));
    }

    // a degree-0 space fails exactly when some triangle holds no pixel;
    // report those triangles rather than a bare factorization failure
    if (space_->degree() == 0) {
        std::vector<int> empty;
        std::vector<int> count(static_cast<std::size_t>(space_->mesh().n_triangles()), 0);
        for (int t : em_.triangle_of)
            if (t >= 0) count[static_cast<std::size_t>(t)]++;
        for (int t = 0; t < space_->mesh().n_triangles(); ++t)
            if (count[static_cast<std::size_t>(t)] == 0) empty.push_back(t);
        if (!empty.empty()) {
            std::ostringstream os;
            os << "FitContext: triangulation too fine, triangles without pixels:";
            for (int t : empty) os << ' ' << t;
            throw numerical_error(os.str());
        }
    }

    Eigen::MatrixXd Gt = Eigen::MatrixXd::Zero(q, q);
    Gt.selfadjointView<Eigen::Lower>().rankUpdate(BQ.transpose());
    Gt = Gt.selfadjointView<Eigen::Lower>();

    Eigen::LLT<Eigen::MatrixXd> llt(Gt);
    if (llt.info() != Eigen::Success)
        throw numerical_error(
            "FitContext: pixel layout does not determine the spline space "
            "(reduced Gram matrix not positive definite); coarsen the "
            "triangulation or supply more pixels");

    const double trace_G = Gt.trace();
    const double trace_D = space_->reduced_penalty().trace();
    penalty_scale_ = trace_D > 0.0 ? trace_G / trace_D : 0.0;

    // W' Gt W = I, W' D W = diag(s)
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        space_->reduced_penalty(), Gt, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success)
        throw numerical_error("FitContext: generalized eigendecomposition failed");
    W_ = ges.eigenvectors();
    s_ = ges.eigenvalues().cwiseMax(0.0);

    basis_w_ = W_.transpose() * BQ.transpose(); // q x N_in
}

std::vector<double> FitContext::default_rho_grid() const {
    if (penalty_scale_ <= 0.0)
        return {0.0};
    // the useful penalties sit well above the raw trace ratio because the
    // data side of the normal equations is replicated over subjects
    std::vector<double> grid;
    const double lo = 1e-2 * penalty_scale_, hi = 1e6 * penalty_scale_;
    const int m = 10;
    for (int k = 0; k < m; ++k)
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (m - 1)));
    return grid;
}

void validate_dataset(const Dataset& data, const FitContext& ctx) {
    const int n = data.n();
    if (n < 2)
        throw validation_error("Dataset: need at least two subjects");
    if (data.X.cols() < 1)
        throw validation_error("Dataset: X needs at least the intercept column");
    if (!data.X.allFinite())
        throw validation_error("Dataset: X contains non-finite entries");
    if (data.Y.rows() != n)
        throw validation_error("Dataset: X and Y row counts differ");
    if (data.Y.cols() != static_cast<Eigen::Index>(data.pixels.size()))
        throw validation_error("Dataset: Y has " + std::to_string(data.Y.cols()) +
                               " columns but there are " + std::to_string(data.pixels.size()) +
                               " pixels");
    for (Eigen::Index j = 0; j < data.Y.cols(); ++j) {
        if (!ctx.eval().inside[static_cast<std::size_t>(j)]) continue;
        for (Eigen::Index i = 0; i < data.Y.rows(); ++i)
            if (!std::isfinite(data.Y(i, j)))
                throw validation_error("Dataset: missing response at inside pixel " +
                                       std::to_string(j) + " (subject " + std::to_string(i) +
                                       "); gaps are allowed at masked pixels only");
    }
    Eigen::MatrixXd S = data.X.transpose() * data.X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12)
        throw validation_error("Dataset: covariate columns are collinear (X'X condition " +
                               std::to_string(lmax / std::max(lmin, 1e-300)) + ")");
}

namespace {

// responses gathered at inside pixels: n x N_in
Eigen::MatrixXd inside_responses(const Dataset& data, const FitContext& ctx) {
    Eigen::MatrixXd Yin(data.n(), ctx.n_inside());
    const auto& cols = ctx.inside_columns();
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (cols[j] >= 0) Yin.col(cols[j]) = data.Y.col(static_cast<Eigen::Index>(j));
    return Yin;
}

Eigen::VectorXd expand_rho(const Eigen::VectorXd& rho, int p1) {
    if (rho.size() == p1) return rho;
    if (rho.size() == 1) return Eigen::VectorXd::Constant(p1, rho(0));
    throw validation_error("rho must have one entry or one per coefficient function");
}

// solve (S + diag(rho_l * s_a)) x_a = rhs_a for every penalty eigenvalue a
Eigen::MatrixXd solve_decoupled(const Eigen::MatrixXd& S, const Eigen::VectorXd& s,
                                const Eigen::VectorXd& rho, const Eigen::MatrixXd& rhs) {
    const int q = static_cast<int>(rhs.rows());
    const int p1 = static_cast<int>(S.rows());
    Eigen::MatrixXd out(q, p1);
    Eigen::MatrixXd A(p1, p1);
    for (int a = 0; a < q; ++a) {
        A = S;
        for (int l = 0; l < p1; ++l)
            A(l, l) += rho(l) * s(a);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            throw numerical_error("fit: singular reduced system at penalty eigenvalue index " +
                                  std::to_string(a) + " (smallest pivot " +
                                  std::to_string(ldlt.vectorD().minCoeff()) + ")");
        out.row(a) = ldlt.solve(rhs.row(a).transpose()).transpose();
    }
    return out;
}

Eigen::MatrixXd surfaces_from_gamma(const FitContext& ctx, const Eigen::MatrixXd& gamma) {
    // evaluation contract: surfaces are B * gamma, masked rows stay zero
    return (ctx.eval().B * gamma).transpose(); // (p+1) x N
}

} // namespace

FitResult fit_bpst(const Dataset& data, std::shared_ptr<const FitContext> ctx,
                   const Eigen::VectorXd& rho_in) {
    validate_dataset(data, *ctx);
    const int p1 = data.p() + 1;
    const Eigen::VectorXd rho = expand_rho(rho_in, p1);
    if (rho.size() > 0 && rho.minCoeff() < 0.0)
        throw validation_error("fit_bpst: penalties must be nonnegative");

    const Eigen::MatrixXd S = data.X.transpose() * data.X;
    const Eigen::MatrixXd Yin = inside_responses(data, *ctx);
    const Eigen::MatrixXd C = data.X.transpose() * Yin;       // (p+1) x N_in
    const Eigen::MatrixXd R = ctx->basis_w() * C.transpose(); // q x (p+1)
    const Eigen::MatrixXd Xw = solve_decoupled(S, ctx->penalty_eigs(), rho, R);

    FitResult fr;
    fr.method = SmoothMethod::bpst;
    fr.context = ctx;
    fr.rho = rho;
    fr.theta = ctx->w() * Xw; // q x (p+1)
    fr.gamma = ctx->space().null_basis() * fr.theta;
    fr.beta_surfaces = surfaces_from_gamma(*ctx, fr.gamma);
    return fr;
}

FitResult fit_pcst(const Dataset& data, std::shared_ptr<const FitContext> ctx) {
    validate_dataset(data, *ctx);
    if (ctx->space().degree() != 0)
        throw validation_error("fit_pcst: requires a degree-0 space");
    const int p1 = data.p() + 1;
    const int H = ctx->space().mesh().n_triangles();

    std::vector<int> count(static_cast<std::size_t>(H), 0);
    const auto& tri_of = ctx->eval().triangle_of;
    for (std::size_t j = 0; j < tri_of.size(); ++j)
        if (tri_of[j] >= 0) count[static_cast<std::size_t>(tri_of[j])]++;
    std::vector<int> starved;
    for (int t = 0; t < H; ++t)
        if (count[static_cast<std::size_t>(t)] < p1) starved.push_back(t);
    if (!starved.empty()) {
        std::ostringstream os;
        os << "fit_pcst: triangulation too fine, triangles with fewer than " << p1
           << " pixels:";
        for (int t : starved) os << ' ' << t;
        throw validation_error(os.str());
    }

    const Eigen::MatrixXd S = data.X.transpose() * data.X;
    Eigen::LDLT<Eigen::MatrixXd> Sldlt(S);

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(p1, H);
    for (std::size_t j = 0; j < tri_of.size(); ++j) {
        const int t = tri_of[j];
        if (t < 0) continue;
        rhs.col(t).noalias() += data.X.transpose() * data.Y.col(static_cast<Eigen::Index>(j));
    }
    for (int t = 0; t < H; ++t)
        rhs.col(t) /= static_cast<double>(count[static_cast<std::size_t>(t)]);

    FitResult fr;
    fr.method = SmoothMethod::pcst;
    fr.context = ctx;
    fr.rho = Eigen::VectorXd::Zero(p1);
    fr.gamma = Sldlt.solve(rhs).transpose(); // H x (p+1): row t = coefficients on triangle t
    // degree-0 spaces are unconstrained; express theta in the W basis so the
    // downstream variance path sees a consistent parameterization
    fr.theta = ctx->w().partialPivLu().solve(fr.gamma);
    fr.beta_surfaces = surfaces_from_gamma(*ctx, fr.gamma);
    return fr;
}

CvResult cross_validate(const Dataset& data, std::shared_ptr<const FitContext> ctx,
                        const std::vector<double>& rho_grid, int K, std::uint64_t seed) {
    validate_dataset(data, *ctx);
    if (rho_grid.empty())
        throw validation_error("cross_validate: empty penalty grid");
    const int n = data.n();
    const int p1 = data.p() + 1;
    if (K < 2 || n < K)
        throw validation_error("cross_validate: need 2 <= K <= n");

    // seeded shuffle, folds filled round-robin so sizes differ by at most one
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(K));
    for (int i = 0; i < n; ++i)
        folds[static_cast<std::size_t>(i % K)].push_back(order[static_cast<std::size_t>(i)]);
    for (const auto& f : folds)
        if (static_cast<int>(n - f.size()) < p1)
            throw validation_error("cross_validate: training folds have fewer subjects than "
                                   "coefficient functions");

    const Eigen::MatrixXd Yin = inside_responses(data, *ctx);
    const double N_in = ctx->n_inside();
    std::vector<double> scores(rho_grid.size(), 0.0);

    for (int k = 0; k < K; ++k) {
        const auto& val = folds[static_cast<std::size_t>(k)];
        std::vector<char> in_val(static_cast<std::size_t>(n), 0);
        for (int i : val) in_val[static_cast<std::size_t>(i)] = 1;

        Eigen::MatrixXd Xtr(n - static_cast<int>(val.size()), p1);
        Eigen::MatrixXd Ytr(n - static_cast<int>(val.size()), Yin.cols());
        int r = 0;
        for (int i = 0; i < n; ++i)
            if (!in_val[static_cast<std::size_t>(i)]) {
                Xtr.row(r) = data.X.row(i);
                Ytr.row(r) = Yin.row(i);
                ++r;
            }
        const Eigen::MatrixXd S = Xtr.transpose() * Xtr;
        const Eigen::MatrixXd R = ctx->basis_w() * (Xtr.transpose() * Ytr).transpose();

        for (std::size_t g = 0; g < rho_grid.size(); ++g) {
            const Eigen::VectorXd rho = Eigen::VectorXd::Constant(p1, rho_grid[g]);
            const Eigen::MatrixXd Xw = solve_decoupled(S, ctx->penalty_eigs(), rho, R);
            const Eigen::MatrixXd beta_in = ctx->basis_w().transpose() * Xw; // N_in x (p+1)
            double sse = 0.0;
            for (int i : val) {
                const Eigen::VectorXd fitted = beta_in * data.X.row(i).transpose();
                sse += (Yin.row(i).transpose() - fitted).squaredNorm();
            }
            scores[g] += sse / (static_cast<double>(val.size()) * N_in);
        }
    }
    for (auto& s : scores) s /= K;

    CvResult out;
    out.grid = rho_grid;
    out.scores = scores;
    std::size_t best = 0;
    for (std::size_t g = 1; g < scores.size(); ++g)
        if (scores[g] < scores[best] ||
            (scores[g] == scores[best] && rho_grid[g] < rho_grid[best]))
            best = g;
    out.best_rho = Eigen::VectorXd::Constant(p1, rho_grid[best]);
    out.best_score = scores[best];
    return out;
}

} // namespace trispline
