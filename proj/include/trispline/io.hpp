#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trispline/mesh.hpp"

namespace trispline {

// CSV helpers. A single leading non-numeric row is treated as a header.
// Empty fields and NA/NaN parse to quiet NaN. All output uses '.' decimals
// regardless of locale.
Eigen::MatrixXd load_csv_matrix(const std::string& path);
void save_csv_matrix(const Eigen::MatrixXd& m, const std::string& path,
                     const std::string& header = "");

std::vector<Point2> load_pixels_csv(const std::string& path);
void save_pixels_csv(const std::vector<Point2>& pixels, const std::string& path);

// 8-bit PGM raster of a pixel surface, linear min-max scaling over inside
// pixels (gray 0 marks outside); scaling recorded in a sidecar JSON.
void save_pgm(const Eigen::VectorXd& values, const std::vector<bool>& inside, int nx, int ny,
              const std::string& path);

// shortest round-trippable decimal representation
std::string csv_double(double v);

} // namespace trispline
