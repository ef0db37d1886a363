#include "trispline/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>

#include "trispline/errors.hpp"

namespace trispline {

namespace {

// Golub-Welsch: nodes/weights of an n-point Gauss rule from the Jacobi
// matrix of the orthogonal polynomial recurrence.
struct Rule1d {
    std::vector<double> x; // nodes in (0,1)
    std::vector<double> w; // weights
};

// Gauss-Legendre on (0,1), weight 1
Rule1d gauss_legendre01(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k - 1, k) = b;
        J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1d r;
    r.x.resize(static_cast<std::size_t>(n));
    r.w.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        r.x[static_cast<std::size_t>(k)] = 0.5 * (es.eigenvalues()(k) + 1.0);
        const double v0 = es.eigenvectors()(0, k);
        r.w[static_cast<std::size_t>(k)] = v0 * v0; // total weight 1 on (0,1)
    }
    return r;
}

// Gauss-Jacobi with weight (1-x) on (0,1); total mass 1/2
Rule1d gauss_jacobi10(int n) {
    // recurrence for Jacobi P^(1,0) on (-1,1): standard coefficients
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    const double alpha = 1.0, beta = 0.0;
    for (int k = 0; k < n; ++k) {
        const double kk = k;
        const double denom = (2.0 * kk + alpha + beta) * (2.0 * kk + alpha + beta + 2.0);
        double a = 0.0;
        if (denom != 0.0)
            a = (beta * beta - alpha * alpha) / denom;
        if (k == 0)
            a = (beta - alpha) / (alpha + beta + 2.0);
        J(k, k) = a;
        if (k + 1 < n) {
            const double k1 = kk + 1.0;
            const double num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + alpha + beta);
            const double den = (2.0 * k1 + alpha + beta - 1.0) *
                               std::pow(2.0 * k1 + alpha + beta, 2.0) *
                               (2.0 * k1 + alpha + beta + 1.0);
            const double b = std::sqrt(num / den);
            J(k, k + 1) = b;
            J(k + 1, k) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1d r;
    r.x.resize(static_cast<std::size_t>(n));
    r.w.resize(static_cast<std::size_t>(n));
    // mu0 = integral of (1-t)^1 over (-1,1) scaled: on (-1,1) weight (1-x)^1 has mass 2
    for (int k = 0; k < n; ++k) {
        const double t = es.eigenvalues()(k);     // node in (-1,1)
        r.x[static_cast<std::size_t>(k)] = 0.5 * (t + 1.0);
        const double v0 = es.eigenvectors()(0, k);
        // on (0,1) with weight (1-x): total mass 1/2
        r.w[static_cast<std::size_t>(k)] = v0 * v0 * 0.5;
    }
    return r;
}

std::vector<QuadPoint> build_rule(int degree) {
    const int n = std::max(1, (degree + 2) / 2); // 2n-1 >= degree
    Rule1d gl = gauss_legendre01(n);
    Rule1d gj = gauss_jacobi10(n);
    std::vector<QuadPoint> pts;
    pts.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    // map (u,v) in square -> barycentric (b1,b2,b3) on triangle via collapse:
    // b1 = v, b2 = u(1-v), b3 = (1-u)(1-v); Jacobian absorbs the (1-v) weight
    for (std::size_t i = 0; i < gj.x.size(); ++i) {
        for (std::size_t j = 0; j < gl.x.size(); ++j) {
            const double v = gj.x[i];
            const double u = gl.x[j];
            QuadPoint q;
            q.bary = {v, u * (1.0 - v), (1.0 - u) * (1.0 - v)};
            q.weight = 2.0 * gj.w[i] * gl.w[j]; // weights sum to 1
            pts.push_back(q);
        }
    }
    return pts;
}

} // namespace

const std::vector<QuadPoint>& triangle_rule(int degree) {
    if (degree < 0)
        throw validation_error("triangle_rule: degree must be nonnegative");
    static std::map<int, std::vector<QuadPoint>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end())
        it = cache.emplace(degree, build_rule(degree)).first;
    return it->second;
}

} // namespace trispline
