#pragma once

#include <array>
#include <vector>

#include "trispline/mesh.hpp"

namespace trispline {

struct QuadPoint {
    std::array<double, 3> bary;
    double weight; // weights sum to 1; multiply by the triangle area
};

// Quadrature rule on the reference triangle, exact for bivariate polynomials
// of total degree <= `degree`. Conical product of Gauss-Legendre and
// Gauss-Jacobi(1,0) rules collapsed onto the triangle.
const std::vector<QuadPoint>& triangle_rule(int degree);

} // namespace trispline
