#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "trispline/mesh.hpp"

namespace trispline {

// Degree-d bivariate Bernstein basis on a triangle, in barycentric form:
//   B_{ijk}(b) = d!/(i!j!k!) b1^i b2^j b3^k,  i+j+k = d.
// Indices are enumerated with i descending, then j descending, which fixes
// the coefficient layout for the whole library.

inline int basis_count(int d) { return (d + 1) * (d + 2) / 2; }

struct BernsteinIndex {
    int i, j, k;
};

// all (i,j,k) with i+j+k = d in the canonical order
std::vector<BernsteinIndex> basis_indices(int d);

// position of (i,j,k) within the canonical enumeration
int basis_rank(int d, int i, int j, int k);

// values of all d* basis functions at a barycentric point; validates that
// the coordinates sum to 1 (1e-9) with entries >= -1e-12
Eigen::VectorXd eval_basis(int d, const std::array<double, 3>& bary);

// same polynomial evaluation without the simplex-membership check; used
// where barycentric coordinates are legitimately outside [0,1] (smoothness
// relations evaluate at the opposite triangle's off-edge vertex)
Eigen::VectorXd eval_basis_unchecked(int d, const std::array<double, 3>& bary);

// Cartesian partial derivative d^(a1+a2)/dz1^a1 dz2^a2 of every basis
// function at a barycentric point of the given triangle; a1+a2 <= 2
Eigen::VectorXd eval_derivatives(int d, const std::array<Point2, 3>& tri,
                                 const std::array<double, 3>& bary, int a1, int a2);

// mass matrix  [ int_T B_m B_m' ]  and thin-plate energy matrix
// [ int_T (B_m,xx B_m',xx + 2 B_m,xy B_m',xy + B_m,yy B_m',yy) ],
// both computed with a quadrature rule exact for degree 2d
struct GramEnergy {
    Eigen::MatrixXd mass;
    Eigen::MatrixXd energy;
};
GramEnergy gram_and_energy(int d, const std::array<Point2, 3>& tri);

} // namespace trispline
