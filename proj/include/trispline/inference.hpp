#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "trispline/variance.hpp"

namespace trispline {

enum class BandKind { pci, scc };

struct Band {
    Eigen::MatrixXd lower; // (p+1) x N, zero at masked pixels
    Eigen::MatrixXd upper;
    double alpha_nominal = 0.05;
    Eigen::VectorXd alpha_adjusted;  // per coefficient; == nominal for PCI
    std::vector<bool> boundary_flag; // per coefficient: calibration hit a grid end
    BandKind kind = BandKind::pci;
};

// Pointwise normal-quantile confidence band.
Band pci(const FitResult& fit, const SESurfaces& se, double alpha);

struct SccConfig {
    double alpha0 = 0.05;
    int n_boot = 100;
    std::vector<double> alpha_grid; // empty: 60 log-spaced points in
                                    // [max(1e-3, 2/n_boot), alpha0]
    std::uint64_t seed = 0;
    int threads = 1;
};

// Wild-bootstrap simultaneous confidence corridor. Residual components get
// independent subject-level and pixel-level sign flips, the model is refitted
// with the step-one penalties, and per-pixel coverage of the original
// estimate calibrates the adjusted level alpha_hat per coefficient surface.
// Rademacher streams are keyed by (seed, replicate, subject[, pixel]) so the
// result does not depend on the execution order of replicates.
Band scc(const Dataset& data, const FitResult& fit, const CovarianceEstimate& cov,
         const SccConfig& cfg);

struct SignificanceMap {
    // per coefficient and pixel: +1 when 0 < lower, -1 when 0 > upper,
    // 0 otherwise (and at masked pixels)
    Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> code;
};

SignificanceMap significance_map(const Band& band, const std::vector<bool>& inside);

} // namespace trispline
