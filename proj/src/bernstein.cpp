#include "trispline/bernstein.hpp"

#include <cmath>

#include "trispline/errors.hpp"
#include "trispline/quadrature.hpp"

namespace trispline {

std::vector<BernsteinIndex> basis_indices(int d) {
    std::vector<BernsteinIndex> out;
    out.reserve(static_cast<std::size_t>(basis_count(d)));
    for (int i = d; i >= 0; --i)
        for (int j = d - i; j >= 0; --j)
            out.push_back({i, j, d - i - j});
    return out;
}

int basis_rank(int d, int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i + j + k != d)
        throw validation_error("basis_rank: bad Bernstein index");
    // blocks with first index d, d-1, ..., i+1 have sizes 1, 2, ..., d-i
    const int di = d - i;
    return di * (di + 1) / 2 + (d - i - j);
}

namespace {

// value of every degree-d basis function, no input validation
void eval_raw(int d, double b1, double b2, double b3, Eigen::VectorXd& out) {
    const auto idx = basis_indices(d);
    out.resize(static_cast<Eigen::Index>(idx.size()));
    // multinomial coefficients via factorial ratios in double; d stays small
    std::vector<double> fact(static_cast<std::size_t>(d) + 1, 1.0);
    for (int k = 1; k <= d; ++k)
        fact[static_cast<std::size_t>(k)] = fact[static_cast<std::size_t>(k - 1)] * k;
    for (std::size_t m = 0; m < idx.size(); ++m) {
        const auto [i, j, k] = idx[m];
        const double coef = fact[static_cast<std::size_t>(d)] /
                            (fact[static_cast<std::size_t>(i)] * fact[static_cast<std::size_t>(j)] *
                             fact[static_cast<std::size_t>(k)]);
        out(static_cast<Eigen::Index>(m)) =
            coef * std::pow(b1, i) * std::pow(b2, j) * std::pow(b3, k);
    }
}

// gradients of the barycentric coordinate functions of a triangle; each
// coordinate is affine in z so these are constant vectors
std::array<Point2, 3> bary_gradients(const std::array<Point2, 3>& t) {
    const double det = (t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y);
    if (det == 0.0)
        throw validation_error("bary_gradients: degenerate triangle");
    std::array<Point2, 3> g;
    g[0] = {(t[1].y - t[2].y) / det, (t[2].x - t[1].x) / det};
    g[1] = {(t[2].y - t[0].y) / det, (t[0].x - t[2].x) / det};
    g[2] = {(t[0].y - t[1].y) / det, (t[1].x - t[0].x) / det};
    return g;
}

} // namespace

Eigen::VectorXd eval_basis(int d, const std::array<double, 3>& bary) {
    if (d < 0)
        throw validation_error("eval_basis: negative degree");
    const double s = bary[0] + bary[1] + bary[2];
    if (std::fabs(s - 1.0) > 1e-9 || bary[0] < -1e-12 || bary[1] < -1e-12 || bary[2] < -1e-12)
        throw validation_error("eval_basis: invalid barycentric coordinates");
    Eigen::VectorXd out;
    eval_raw(d, bary[0], bary[1], bary[2], out);
    return out;
}

Eigen::VectorXd eval_basis_unchecked(int d, const std::array<double, 3>& bary) {
    if (d < 0)
        throw validation_error("eval_basis: negative degree");
    Eigen::VectorXd out;
    eval_raw(d, bary[0], bary[1], bary[2], out);
    return out;
}

Eigen::VectorXd eval_derivatives(int d, const std::array<Point2, 3>& tri,
                                 const std::array<double, 3>& bary, int a1, int a2) {
    if (a1 < 0 || a2 < 0 || a1 + a2 > 2)
        throw validation_error("eval_derivatives: order must satisfy a1+a2 <= 2");
    const int d_star = basis_count(d);
    const int order = a1 + a2;
    if (order == 0)
        return eval_basis(d, bary);
    if (d < order)
        return Eigen::VectorXd::Zero(d_star);

    const auto g = bary_gradients(tri);
    auto dir = [&](int t, bool take_y) { return take_y ? g[static_cast<std::size_t>(t)].y
                                                       : g[static_cast<std::size_t>(t)].x; };
    // derivative layers: xx -> (x,x), xy -> (x,y), yy -> (y,y); first order
    // uses a single layer
    std::array<bool, 2> layer_is_y{};
    if (order == 1) {
        layer_is_y[0] = (a1 == 0);
    } else {
        if (a1 == 2) layer_is_y = {false, false};
        else if (a1 == 1) layer_is_y = {false, true};
        else layer_is_y = {true, true};
    }

    const auto idx = basis_indices(d);
    Eigen::VectorXd lower;
    eval_raw(d - order, bary[0], bary[1], bary[2], lower);
    const auto idx_low = basis_indices(d - order);

    Eigen::VectorXd out = Eigen::VectorXd::Zero(d_star);
    // D_x B^d_{ijk} = d * sum_t g_t,x * B^{d-1}_{(ijk)-e_t}; iterate twice for
    // second order. Expand the (t,u) double sum directly on the lowest level.
    for (int m = 0; m < d_star; ++m) {
        const auto [i, j, k] = idx[static_cast<std::size_t>(m)];
        const std::array<int, 3> e = {i, j, k};
        double acc = 0.0;
        if (order == 1) {
            for (int t = 0; t < 3; ++t) {
                std::array<int, 3> low = e;
                low[static_cast<std::size_t>(t)] -= 1;
                if (low[static_cast<std::size_t>(t)] < 0) continue;
                const int r = basis_rank(d - 1, low[0], low[1], low[2]);
                acc += dir(t, layer_is_y[0]) * lower(r);
            }
            out(m) = d * acc;
        } else {
            for (int t = 0; t < 3; ++t) {
                if (e[static_cast<std::size_t>(t)] < 1) continue;
                for (int u = 0; u < 3; ++u) {
                    std::array<int, 3> low = e;
                    low[static_cast<std::size_t>(t)] -= 1;
                    low[static_cast<std::size_t>(u)] -= 1;
                    if (low[static_cast<std::size_t>(u)] < 0) continue;
                    const int r = basis_rank(d - 2, low[0], low[1], low[2]);
                    acc += dir(t, layer_is_y[0]) * dir(u, layer_is_y[1]) * lower(r);
                }
            }
            out(m) = d * (d - 1) * acc;
        }
    }
    return out;
}

GramEnergy gram_and_energy(int d, const std::array<Point2, 3>& tri) {
    const double area =
        0.5 * ((tri[1].x - tri[0].x) * (tri[2].y - tri[0].y) -
               (tri[2].x - tri[0].x) * (tri[1].y - tri[0].y));
    if (!(std::fabs(area) > 0.0))
        throw validation_error("gram_and_energy: degenerate triangle");
    const int d_star = basis_count(d);
    const auto& rule = triangle_rule(2 * d);

    GramEnergy ge;
    ge.mass = Eigen::MatrixXd::Zero(d_star, d_star);
    ge.energy = Eigen::MatrixXd::Zero(d_star, d_star);

    Eigen::VectorXd vals;
    for (const auto& q : rule) {
        eval_raw(d, q.bary[0], q.bary[1], q.bary[2], vals);
        ge.mass.noalias() += (std::fabs(area) * q.weight) * (vals * vals.transpose());
        if (d >= 2) {
            const Eigen::VectorXd dxx = eval_derivatives(d, tri, q.bary, 2, 0);
            const Eigen::VectorXd dxy = eval_derivatives(d, tri, q.bary, 1, 1);
            const Eigen::VectorXd dyy = eval_derivatives(d, tri, q.bary, 0, 2);
            ge.energy.noalias() += (std::fabs(area) * q.weight) *
                                   (dxx * dxx.transpose() + 2.0 * (dxy * dxy.transpose()) +
                                    dyy * dyy.transpose());
        }
    }
    return ge;
}

} // namespace trispline
