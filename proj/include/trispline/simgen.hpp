#pragma once

#include <functional>
#include <memory>
#include <string>

#include "trispline/fit.hpp"
#include "trispline/inference.hpp"

namespace trispline {

enum class DomainKind { horseshoe, slice5, slice35 };
// jump/smooth: two-coefficient horseshoe designs; example2: three smooth
// coefficients on the slice domains; flat: constant coefficients,
// representable in every spline space (calibration runs and tests)
enum class CoeffKind { jump, smooth, example2, flat };

struct SimDesign {
    DomainKind domain = DomainKind::horseshoe;
    CoeffKind coeff = CoeffKind::smooth;
    int n = 50;
    double lambda1 = 0.1;
    double lambda2 = 0.02;
    double sigma = 1.0;
    std::uint64_t seed = 1;
};

// Shipped domain fixture: a coarse mesh for penalized fits, a fine mesh for
// the piecewise-constant method (both triangulating the same polygon), and
// the pixel lattice over the registered bounding box.
struct DomainFixture {
    std::string name;
    std::shared_ptr<const Triangulation> mesh_coarse;
    std::shared_ptr<const Triangulation> mesh_fine;
    std::vector<Point2> pixels;
    int nx = 0, ny = 0;
    std::array<double, 4> bbox{}; // xmin,xmax,ymin,ymax
    int expected_inside = 0;      // registered inside-pixel count
};

// Resolution order for the fixture directory: explicit argument,
// TRISPLINE_DATA environment variable, the compiled source tree.
std::string default_data_dir();
DomainFixture load_domain(DomainKind kind, const std::string& data_dir = "");

// Arc-length/offset coordinates of the horseshoe centerline; the smooth
// test surface is ramp(z) = a + d^2 and the jump variant flips its sign
// across the centerline.
struct HorseshoeCoords {
    double a; // position along the spine
    double d; // signed offset from the spine
};
HorseshoeCoords horseshoe_coords(const Point2& z);

struct Generated {
    Dataset data;
    Eigen::MatrixXd beta_true; // (p+1) x N, zero at pixels outside
    std::vector<bool> inside;  // membership decided by the coarse mesh
    // error-process pieces, exposed for oracle checks
    std::function<double(const Point2&)> psi1, psi2;
    double lambda1 = 0.0, lambda2 = 0.0;
};

Generated generate(const SimDesign& design, const DomainFixture& fixture);

// mean over inside pixels of (beta_hat - beta_true)^2, one entry per
// coefficient surface
Eigen::VectorXd mse(const FitResult& fit, const Eigen::MatrixXd& beta_true,
                    const std::vector<bool>& inside);

struct MethodConfig {
    SmoothMethod method = SmoothMethod::bpst;
    int d = 5;
    int r = 1;
    std::vector<double> rho_grid; // empty: context default; single value: fixed
    int cv_folds = 5;
    bool allow_low_degree = false;
    bool with_scc = false;
    double alpha0 = 0.05;
    int n_boot = 100;
};

struct MonteCarloResult {
    Eigen::MatrixXd mse_per_rep;   // reps x (p+1)
    Eigen::VectorXd mse_mean;      // (p+1)
    Eigen::VectorXd coverage;      // (p+1), NaN unless with_scc
    Eigen::VectorXd mean_width;    // (p+1), NaN unless with_scc
    Eigen::MatrixXd width_per_rep; // reps x (p+1)
    Eigen::VectorXd rho_mean;      // (p+1) average selected penalty
};

// Runs `reps` independent replicates of the design with per-replicate seeds
// derived from design.seed; replicates are distributed over `threads`
// workers and merged by replicate index, so results do not depend on the
// thread count.
MonteCarloResult run_monte_carlo(const SimDesign& design, const DomainFixture& fixture,
                                 const MethodConfig& cfg, int reps, int threads);

} // namespace trispline
