// Command-line front end: penalized spline fits over triangulations,
// simultaneous confidence corridors, and the simulation harness.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trispline/errors.hpp"
#include "trispline/inference.hpp"
#include "trispline/io.hpp"
#include "trispline/parallel.hpp"
#include "trispline/rng.hpp"
#include "trispline/simgen.hpp"
#include "trispline/stats.hpp"
#include "trispline/variance.hpp"

using namespace trispline;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_numeric = 3;
constexpr int exit_io = 4;

struct FitIo {
    std::string mesh_path;
    std::string x_path, y_path, pixels_path;
    int d = 5, r = 1;
    bool allow_low_degree = false;
    std::string method = "bpst";
    double rho = -1.0; // <0: cross-validate
    int folds = 5;
    std::uint64_t seed = 1;
    int eta_d = -1, eta_r = -1; // defaults: the fit space
    std::string out_dir = "out";
    bool images = false;
    int threads = 0;
};

// Expand `--config FILE` into option tokens placed before the explicit
// flags, so the command line overrides the file. Lines are `key=value`
// with long option names as keys; blank lines and #-comments are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw validation_error("--config needs a file path");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty())
        return args;
    if (args.empty())
        throw validation_error("--config requires a subcommand");
    std::ifstream in(path);
    if (!in)
        throw validation_error("config file does not exist: " + path);
    std::vector<std::string> tokens;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error(path + ":" + std::to_string(lineno) +
                                   ": expected key=value");
        std::string key = line.substr(first, eq - first);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        strip(key);
        strip(value);
        static const std::set<std::string> flag_keys = {"allow-low-degree", "images",
                                                        "coverage"};
        if (flag_keys.count(key)) {
            if (value == "true" || value == "yes" || value == "1")
                tokens.push_back("--" + key);
            else if (value != "false" && value != "no" && value != "0")
                throw validation_error(path + ":" + std::to_string(lineno) + ": flag '" + key +
                                       "' expects true or false");
        } else {
            tokens.push_back("--" + key);
            tokens.push_back(value);
        }
    }
    // insert after the subcommand name so explicit flags come later and win
    args.insert(args.begin() + 1, tokens.begin(), tokens.end());
    return args;
}

void add_fit_io(CLI::App* app, FitIo& io) {
    app->add_option("--mesh", io.mesh_path, "triangulation JSON file")->required();
    app->add_option("--x", io.x_path, "covariate CSV (n rows, p+1 columns, header)")->required();
    app->add_option("--y", io.y_path, "response CSV (n rows, N columns)")->required();
    app->add_option("--pixels", io.pixels_path, "pixel-center CSV (N rows: z1,z2)")->required();
    app->add_option("-d,--degree", io.d, "spline degree");
    app->add_option("-r,--smoothness", io.r, "cross-edge smoothness");
    app->add_flag("--allow-low-degree", io.allow_low_degree,
                  "permit r >= 1 with d < 3r+2");
    app->add_option("--method", io.method, "bpst or pcst")
        ->check(CLI::IsMember({"bpst", "pcst"}));
    app->add_option("--rho", io.rho, "fixed penalty (omit to cross-validate)");
    app->add_option("-K,--folds", io.folds, "cross-validation folds");
    app->add_option("--seed", io.seed, "seed for fold shuffling");
    app->add_option("--eta-d", io.eta_d, "degree of the residual-smoothing space");
    app->add_option("--eta-r", io.eta_r, "smoothness of the residual-smoothing space");
    app->add_option("--out", io.out_dir, "output directory");
    app->add_flag("--images", io.images, "also write PGM rasters");
    app->add_option("--threads", io.threads, "worker threads (0: auto)");
}

struct LoadedProblem {
    std::shared_ptr<const Triangulation> mesh;
    std::shared_ptr<const SplineSpace> space;
    std::shared_ptr<FitContext> ctx;
    std::shared_ptr<FitContext> eta_ctx;
    Dataset data;
};

LoadedProblem load_problem(const FitIo& io) {
    for (const std::string& p : {io.mesh_path, io.x_path, io.y_path, io.pixels_path})
        if (!fs::exists(p))
            throw validation_error("input file does not exist: " + p);
    LoadedProblem lp;
    lp.mesh = std::make_shared<Triangulation>(load_mesh_json(io.mesh_path));
    const bool pcst = io.method == "pcst";
    const int d = pcst ? 0 : io.d;
    const int r = pcst ? 0 : io.r;
    lp.space = std::make_shared<SplineSpace>(lp.mesh, d, r, 1e-10, io.allow_low_degree);
    Eigen::MatrixXd X = load_csv_matrix(io.x_path);
    Eigen::MatrixXd Y = load_csv_matrix(io.y_path);
    auto pixels = load_pixels_csv(io.pixels_path);
    lp.data = Dataset{std::move(X), std::move(Y), std::move(pixels)};
    lp.ctx = std::make_shared<FitContext>(lp.space, lp.data.pixels);
    if (io.eta_d >= 0) {
        auto eta_space = std::make_shared<SplineSpace>(
            lp.mesh, io.eta_d, io.eta_r < 0 ? 0 : io.eta_r, 1e-10, io.allow_low_degree);
        lp.eta_ctx = std::make_shared<FitContext>(eta_space, lp.data.pixels);
    } else {
        lp.eta_ctx = lp.ctx;
    }
    return lp;
}

void write_surface_csv(const std::vector<Point2>& pixels, const Eigen::VectorXd& values,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open " + path + " for writing");
    out << "z1,z2,value\n";
    for (std::size_t j = 0; j < pixels.size(); ++j)
        out << csv_double(pixels[j].x) << ',' << csv_double(pixels[j].y) << ','
            << csv_double(values(static_cast<Eigen::Index>(j))) << '\n';
}

void write_fit_artifacts(const FitIo& io, const LoadedProblem& lp, const FitResult& fit,
                         const CovarianceEstimate& cov, const SESurfaces& se, double cv_score) {
    fs::create_directories(io.out_dir);
    const int p1 = lp.data.p() + 1;

    {
        std::ofstream out(io.out_dir + "/coefficients.csv");
        if (!out)
            throw io_error("cannot open " + io.out_dir + "/coefficients.csv for writing");
        out << "ell,index,value\n";
        for (int l = 0; l < p1; ++l)
            for (Eigen::Index m = 0; m < fit.gamma.rows(); ++m)
                out << l << ',' << m << ',' << csv_double(fit.gamma(m, l)) << '\n';
    }
    for (int l = 0; l < p1; ++l) {
        write_surface_csv(lp.data.pixels, fit.beta_surfaces.row(l).transpose(),
                          io.out_dir + "/beta_surface_" + std::to_string(l) + ".csv");
        write_surface_csv(lp.data.pixels, se.se.row(l).transpose(),
                          io.out_dir + "/se_surface_" + std::to_string(l) + ".csv");
    }
    write_surface_csv(lp.data.pixels, cov.sigma2, io.out_dir + "/sigma2.csv");

    nlohmann::json run;
    run["command"] = "fit";
    run["mesh"] = io.mesh_path;
    run["method"] = io.method;
    run["d"] = lp.space->degree();
    run["r"] = lp.space->smoothness();
    run["n"] = lp.data.n();
    run["p"] = lp.data.p();
    run["n_pixels"] = lp.data.n_pixels();
    run["n_inside"] = lp.ctx->n_inside();
    run["rho"] = std::vector<double>(fit.rho.data(), fit.rho.data() + fit.rho.size());
    if (std::isfinite(cv_score))
        run["cv_score"] = cv_score;
    run["pixels"] = io.pixels_path;
    std::ofstream rj(io.out_dir + "/run.json");
    rj << run.dump(1) << '\n';

    if (io.images) {
        // raster layout inferred from the lattice: count distinct x in row 0
        int nx = 0;
        const double y0 = lp.data.pixels.front().y;
        while (nx < lp.data.n_pixels() &&
               lp.data.pixels[static_cast<std::size_t>(nx)].y == y0)
            ++nx;
        if (nx > 0 && lp.data.n_pixels() % nx == 0) {
            const int ny = lp.data.n_pixels() / nx;
            for (int l = 0; l < p1; ++l)
                save_pgm(fit.beta_surfaces.row(l).transpose(), lp.ctx->eval().inside, nx, ny,
                         io.out_dir + "/beta_surface_" + std::to_string(l) + ".pgm");
        } else {
            std::cerr << "warning: pixels are not a row-major lattice, skipping images\n";
        }
    }
}

int cmd_fit(const FitIo& io) {
    const auto t0 = std::chrono::steady_clock::now();
    LoadedProblem lp = load_problem(io);
    FitResult fit;
    double cv_score = std::numeric_limits<double>::quiet_NaN();
    if (io.method == "pcst") {
        fit = fit_pcst(lp.data, lp.ctx);
    } else if (io.rho >= 0.0) {
        fit = fit_bpst(lp.data, lp.ctx, Eigen::VectorXd::Constant(1, io.rho));
    } else {
        auto cv = cross_validate(lp.data, lp.ctx, lp.ctx->default_rho_grid(), io.folds, io.seed);
        cv_score = cv.best_score;
        fit = fit_bpst(lp.data, lp.ctx, cv.best_rho);
        fit.cv_score = cv.best_score;
    }
    auto cov = estimate_covariance(lp.data, fit, lp.eta_ctx);
    auto se = io.method == "pcst" ? se_pcst(lp.data, fit, cov) : se_bpst(lp.data, fit, cov);
    write_fit_artifacts(io, lp, fit, cov, se, cv_score);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("fit: method=%s rho=%s cv=%s wall=%.2fs -> %s\n", io.method.c_str(),
                csv_double(fit.rho(0)).c_str(),
                std::isfinite(cv_score) ? csv_double(cv_score).c_str() : "-", secs,
                io.out_dir.c_str());
    return exit_ok;
}

int cmd_cv(const FitIo& io) {
    LoadedProblem lp = load_problem(io);
    if (io.method == "pcst")
        throw validation_error("cv: the piecewise-constant method has no penalty to tune");
    auto cv = cross_validate(lp.data, lp.ctx, lp.ctx->default_rho_grid(), io.folds, io.seed);
    std::printf("rho,score\n");
    for (std::size_t g = 0; g < cv.grid.size(); ++g)
        std::printf("%s,%s\n", csv_double(cv.grid[g]).c_str(), csv_double(cv.scores[g]).c_str());
    std::printf("best rho = %s (score %s)\n", csv_double(cv.best_rho(0)).c_str(),
                csv_double(cv.best_score).c_str());
    return exit_ok;
}

int cmd_scc(const FitIo& io, double alpha0, int n_boot) {
    const auto t0 = std::chrono::steady_clock::now();
    LoadedProblem lp = load_problem(io);
    FitResult fit;
    double cv_score = std::numeric_limits<double>::quiet_NaN();
    if (io.method == "pcst") {
        fit = fit_pcst(lp.data, lp.ctx);
    } else if (io.rho >= 0.0) {
        fit = fit_bpst(lp.data, lp.ctx, Eigen::VectorXd::Constant(1, io.rho));
    } else {
        auto cv = cross_validate(lp.data, lp.ctx, lp.ctx->default_rho_grid(), io.folds, io.seed);
        cv_score = cv.best_score;
        fit = fit_bpst(lp.data, lp.ctx, cv.best_rho);
    }
    auto cov = estimate_covariance(lp.data, fit, lp.eta_ctx);
    auto se = io.method == "pcst" ? se_pcst(lp.data, fit, cov) : se_bpst(lp.data, fit, cov);
    write_fit_artifacts(io, lp, fit, cov, se, cv_score);

    SccConfig cfg;
    cfg.alpha0 = alpha0;
    cfg.n_boot = n_boot;
    cfg.seed = io.seed;
    cfg.threads = resolve_threads(io.threads);
    Band band = scc(lp.data, fit, cov, cfg);
    auto sig = significance_map(band, lp.ctx->eval().inside);

    const int p1 = lp.data.p() + 1;
    for (int l = 0; l < p1; ++l) {
        write_surface_csv(lp.data.pixels, band.lower.row(l).transpose(),
                          io.out_dir + "/scc_lower_" + std::to_string(l) + ".csv");
        write_surface_csv(lp.data.pixels, band.upper.row(l).transpose(),
                          io.out_dir + "/scc_upper_" + std::to_string(l) + ".csv");
        std::ofstream out(io.out_dir + "/significance_" + std::to_string(l) + ".csv");
        out << "pixel,code\n";
        for (Eigen::Index j = 0; j < sig.code.cols(); ++j)
            out << j << ',' << static_cast<int>(sig.code(l, j)) << '\n';
        if (band.boundary_flag[static_cast<std::size_t>(l)])
            std::cerr << "warning: alpha calibration for surface " << l
                      << " hit the grid boundary (alpha_hat = " << band.alpha_adjusted(l)
                      << ")\n";
        if (io.images) {
            int nx = 0;
            const double y0 = lp.data.pixels.front().y;
            while (nx < lp.data.n_pixels() &&
                   lp.data.pixels[static_cast<std::size_t>(nx)].y == y0)
                ++nx;
            if (nx > 0 && lp.data.n_pixels() % nx == 0) {
                Eigen::VectorXd code = sig.code.row(l).cast<double>().transpose();
                save_pgm(code, lp.ctx->eval().inside, nx, lp.data.n_pixels() / nx,
                         io.out_dir + "/significance_" + std::to_string(l) + ".pgm");
            }
        }
    }
    {
        nlohmann::json run;
        std::ifstream rj_in(io.out_dir + "/run.json");
        rj_in >> run;
        run["command"] = "scc";
        run["alpha0"] = alpha0;
        run["n_boot"] = n_boot;
        run["seed"] = io.seed;
        run["alpha_hat"] = std::vector<double>(band.alpha_adjusted.data(),
                                               band.alpha_adjusted.data() + p1);
        std::vector<bool> flags = band.boundary_flag;
        run["boundary_flag"] = flags;
        std::ofstream rj(io.out_dir + "/run.json");
        rj << run.dump(1) << '\n';
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("scc: alpha0=%g B=%d alpha_hat=[", alpha0, n_boot);
    for (int l = 0; l < p1; ++l)
        std::printf("%s%s", l ? "," : "", csv_double(band.alpha_adjusted(l)).c_str());
    std::printf("] wall=%.2fs -> %s\n", secs, io.out_dir.c_str());
    return exit_ok;
}

struct SimulateIo {
    std::string design = "ex1-smooth";
    std::string method = "bpst";
    int n = 50;
    double sigma = 1.0;
    std::string lambda = "0.1,0.02";
    int reps = 100;
    std::uint64_t seed = 1;
    int d = -1, r = -1;
    double rho = -1.0;
    bool coverage = false;
    double alpha0 = 0.05;
    int n_boot = 100;
    std::string out_dir = "out";
    std::string data_dir;
    std::string export_dir; // when set: write X/Y/pixels of replicate 0
    int threads = 0;
};

int cmd_simulate(const SimulateIo& io) {
    if (io.reps < 1)
        throw validation_error("simulate: need at least one replicate");
    SimDesign design;
    if (io.design == "ex1-smooth") {
        design.domain = DomainKind::horseshoe;
        design.coeff = CoeffKind::smooth;
    } else if (io.design == "ex1-jump") {
        design.domain = DomainKind::horseshoe;
        design.coeff = CoeffKind::jump;
    } else if (io.design == "ex2-slice5") {
        design.domain = DomainKind::slice5;
        design.coeff = CoeffKind::example2;
    } else if (io.design == "ex2-slice35") {
        design.domain = DomainKind::slice35;
        design.coeff = CoeffKind::example2;
    } else if (io.design == "flat") {
        design.domain = DomainKind::horseshoe;
        design.coeff = CoeffKind::flat;
    } else {
        throw validation_error("simulate: unknown design '" + io.design + "'");
    }
    design.n = io.n;
    design.sigma = io.sigma;
    design.seed = io.seed;
    {
        std::stringstream ss(io.lambda);
        char comma;
        if (!(ss >> design.lambda1 >> comma >> design.lambda2))
            throw validation_error("simulate: --lambda expects 'l1,l2'");
    }

    MethodConfig cfg;
    cfg.method = io.method == "pcst" ? SmoothMethod::pcst : SmoothMethod::bpst;
    if (io.d >= 0) cfg.d = io.d;
    if (io.r >= 0) cfg.r = io.r;
    if (io.design == "ex1-smooth" || io.design == "ex1-jump") {
        // two-coefficient horseshoe runs use degree 5 with no cross-edge
        // smoothness unless overridden
        if (io.d < 0) cfg.d = 5;
        if (io.r < 0) cfg.r = 0;
    }
    if (io.rho >= 0.0) cfg.rho_grid = {io.rho};
    cfg.with_scc = io.coverage;
    cfg.alpha0 = io.alpha0;
    cfg.n_boot = io.n_boot;

    auto fixture = load_domain(design.domain, io.data_dir);

    if (!io.export_dir.empty()) {
        SimDesign d0 = design;
        d0.seed = mix_keys(design.seed, 0);
        auto gen = generate(d0, fixture);
        fs::create_directories(io.export_dir);
        std::string header = "x0";
        for (int l = 1; l <= gen.data.p(); ++l) header += ",x" + std::to_string(l);
        save_csv_matrix(gen.data.X, io.export_dir + "/X.csv", header);
        save_csv_matrix(gen.data.Y, io.export_dir + "/Y.csv");
        save_pixels_csv(gen.data.pixels, io.export_dir + "/pixels.csv");
        save_csv_matrix(gen.beta_true.transpose(), io.export_dir + "/beta_true.csv");
        std::fprintf(stderr, "simulate: replicate 0 exported to %s\n", io.export_dir.c_str());
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto res = run_monte_carlo(design, fixture, cfg, io.reps, resolve_threads(io.threads));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(io.out_dir);
    const int p1 = static_cast<int>(res.mse_mean.size());
    {
        std::ofstream out(io.out_dir + "/mse_table.csv");
        out << "design,method,n,sigma,lambda1,lambda2,reps";
        for (int l = 0; l < p1; ++l) out << ",mse_beta" << l;
        out << '\n'
            << io.design << ',' << io.method << ',' << io.n << ',' << csv_double(io.sigma) << ','
            << csv_double(design.lambda1) << ',' << csv_double(design.lambda2) << ',' << io.reps;
        for (int l = 0; l < p1; ++l) out << ',' << csv_double(res.mse_mean(l));
        out << '\n';
    }
    if (io.coverage) {
        std::ofstream out(io.out_dir + "/coverage_table.csv");
        out << "design,method,n,sigma,lambda1,lambda2,reps,B,alpha0";
        for (int l = 0; l < p1; ++l) out << ",coverage_beta" << l;
        for (int l = 0; l < p1; ++l) out << ",width_beta" << l;
        out << '\n'
            << io.design << ',' << io.method << ',' << io.n << ',' << csv_double(io.sigma) << ','
            << csv_double(design.lambda1) << ',' << csv_double(design.lambda2) << ',' << io.reps
            << ',' << io.n_boot << ',' << csv_double(io.alpha0);
        for (int l = 0; l < p1; ++l) out << ',' << csv_double(res.coverage(l));
        for (int l = 0; l < p1; ++l) out << ',' << csv_double(res.mean_width(l));
        out << '\n';
    }
    std::fprintf(stderr, "simulate: %d reps in %.1fs\n", io.reps, secs);
    std::printf("mse:");
    for (int l = 0; l < p1; ++l) std::printf(" %s", csv_double(res.mse_mean(l)).c_str());
    if (io.coverage) {
        std::printf(" coverage:");
        for (int l = 0; l < p1; ++l) std::printf(" %s", csv_double(res.coverage(l)).c_str());
    }
    std::printf("\n");
    return exit_ok;
}

int cmd_mesh_info(const std::string& mesh_path, const std::string& suggest) {
    Triangulation mesh = load_mesh_json(mesh_path);
    auto q = mesh.quality();
    std::printf("vertices: %d\ntriangles: %d\ninterior edges: %zu\narea: %s\n",
                mesh.n_vertices(), mesh.n_triangles(), mesh.interior_edges().size(),
                csv_double(mesh.domain_area()).c_str());
    std::printf("size: %s\nshape parameter: %s\nmin angle (deg): %s\n",
                csv_double(q.size).c_str(), csv_double(q.shape_parameter).c_str(),
                csv_double(q.min_angle * 180.0 / M_PI).c_str());
    if (!suggest.empty()) {
        std::stringstream ss(suggest);
        std::string tok;
        std::vector<std::string> parts;
        while (std::getline(ss, tok, ',')) parts.push_back(tok);
        if (parts.size() < 4)
            throw validation_error("mesh-info: --suggest expects 'n,N,d,method[,c]'");
        const int n = std::stoi(parts[0]);
        const int N = std::stoi(parts[1]);
        const int d = std::stoi(parts[2]);
        const std::string method = parts[3];
        const double c = parts.size() > 4 ? std::stod(parts[4]) : 1.0;
        if (c < 0.3 || c > 2.0)
            std::cerr << "warning: tuning constant " << c << " outside the tested range "
                      << "[0.3, 2.0]\n";
        const int h = suggest_triangle_count(
            n, N, d, method == "pcst" ? SmoothMethod::pcst : SmoothMethod::bpst, c);
        std::printf("suggested triangles (%s): %d\n", method.c_str(), h);
    }
    return exit_ok;
}

int cmd_check(const std::string& dir) {
    std::ifstream rj(dir + "/run.json");
    if (!rj)
        throw io_error("cannot open " + dir + "/run.json");
    nlohmann::json run;
    rj >> run;

    const std::string mesh_path = run.at("mesh").get<std::string>();
    const int d = run.at("d").get<int>();
    const int r = run.at("r").get<int>();
    const int p1 = run.at("p").get<int>() + 1;
    auto mesh = std::make_shared<Triangulation>(load_mesh_json(mesh_path));
    SplineSpace space(mesh, d, r, 1e-10, true);

    // coefficients satisfy the smoothness constraints
    Eigen::MatrixXd coef = load_csv_matrix(dir + "/coefficients.csv");
    if (coef.cols() != 3)
        throw validation_error(dir + "/coefficients.csv: expected ell,index,value rows");
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(space.n_coeff(), p1);
    for (Eigen::Index k = 0; k < coef.rows(); ++k)
        gamma(static_cast<Eigen::Index>(coef(k, 1)), static_cast<Eigen::Index>(coef(k, 0))) =
            coef(k, 2);
    double worst = 0.0;
    if (space.constraints().rows() > 0)
        worst = (space.constraints() * gamma).cwiseAbs().maxCoeff();
    std::printf("constraint residual: %s\n", csv_double(worst).c_str());
    if (worst > 1e-9)
        throw numerical_error("check: smoothness constraints violated");

    // surfaces re-evaluate from the coefficients
    auto pixels = load_pixels_csv(run.at("pixels").get<std::string>());
    auto em = build_eval_matrix(space, pixels);
    Eigen::MatrixXd surf = (em.B * gamma).transpose();
    for (int l = 0; l < p1; ++l) {
        Eigen::MatrixXd file = load_csv_matrix(dir + "/beta_surface_" + std::to_string(l) + ".csv");
        const double err = (file.col(2) - surf.row(l).transpose()).cwiseAbs().maxCoeff();
        if (err > 1e-9)
            throw numerical_error("check: beta_surface_" + std::to_string(l) +
                                  " does not match the coefficients (max err " +
                                  csv_double(err) + ")");
    }
    std::printf("surfaces: consistent\n");

    // bands, when present
    if (run.contains("alpha_hat")) {
        for (int l = 0; l < p1; ++l) {
            Eigen::MatrixXd lo = load_csv_matrix(dir + "/scc_lower_" + std::to_string(l) + ".csv");
            Eigen::MatrixXd hi = load_csv_matrix(dir + "/scc_upper_" + std::to_string(l) + ".csv");
            if ((hi.col(2) - lo.col(2)).minCoeff() < 0.0)
                throw numerical_error("check: band ordering violated for surface " +
                                      std::to_string(l));
            Eigen::MatrixXd sig =
                load_csv_matrix(dir + "/significance_" + std::to_string(l) + ".csv");
            for (Eigen::Index j = 0; j < sig.rows(); ++j) {
                int expect = 0;
                if (em.inside[static_cast<std::size_t>(j)]) {
                    if (lo(j, 2) > 0.0) expect = 1;
                    else if (hi(j, 2) < 0.0) expect = -1;
                }
                if (static_cast<int>(sig(j, 1)) != expect)
                    throw numerical_error("check: significance map mismatch at pixel " +
                                          std::to_string(j));
            }
        }
        std::printf("bands: ordered, significance consistent\n");
    }
    std::printf("check: ok\n");
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bivariate penalized splines over triangulations"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    FitIo fit_io;
    auto* fit_cmd = app.add_subcommand("fit", "estimate coefficient surfaces");
    add_fit_io(fit_cmd, fit_io);

    FitIo cv_io;
    auto* cv_cmd = app.add_subcommand("cv", "cross-validate the penalty grid");
    add_fit_io(cv_cmd, cv_io);

    FitIo scc_io;
    double alpha0 = 0.05;
    int n_boot = 100;
    auto* scc_cmd = app.add_subcommand("scc", "simultaneous confidence corridors");
    add_fit_io(scc_cmd, scc_io);
    scc_cmd->add_option("--alpha0", alpha0, "nominal simultaneous level");
    scc_cmd->add_option("-B,--bootstrap", n_boot, "bootstrap replicates");

    SimulateIo sim_io;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo experiments");
    sim_cmd->add_option("--design", sim_io.design,
                        "ex1-smooth | ex1-jump | ex2-slice5 | ex2-slice35 | flat");
    sim_cmd->add_option("--method", sim_io.method, "bpst or pcst")
        ->check(CLI::IsMember({"bpst", "pcst"}));
    sim_cmd->add_option("--n", sim_io.n, "subjects per replicate");
    sim_cmd->add_option("--sigma", sim_io.sigma, "noise standard deviation");
    sim_cmd->add_option("--lambda", sim_io.lambda, "process eigenvalues 'l1,l2'");
    sim_cmd->add_option("--reps", sim_io.reps, "Monte Carlo replicates");
    sim_cmd->add_option("--seed", sim_io.seed, "master seed");
    sim_cmd->add_option("-d,--degree", sim_io.d, "spline degree override");
    sim_cmd->add_option("-r,--smoothness", sim_io.r, "smoothness override");
    sim_cmd->add_option("--rho", sim_io.rho, "fixed penalty (omit to cross-validate)");
    sim_cmd->add_flag("--coverage", sim_io.coverage, "also run corridor coverage");
    sim_cmd->add_option("--alpha0", sim_io.alpha0, "nominal simultaneous level");
    sim_cmd->add_option("-B,--bootstrap", sim_io.n_boot, "bootstrap replicates");
    sim_cmd->add_option("--out", sim_io.out_dir, "output directory");
    sim_cmd->add_option("--data", sim_io.data_dir, "fixture directory override");
    sim_cmd->add_option("--export-data", sim_io.export_dir,
                        "write X/Y/pixels CSVs of the first replicate");
    sim_cmd->add_option("--threads", sim_io.threads, "worker threads (0: auto)");

    std::string mesh_path, suggest;
    auto* mesh_cmd = app.add_subcommand("mesh-info", "triangulation summary");
    mesh_cmd->add_option("--mesh", mesh_path, "triangulation JSON file")->required();
    mesh_cmd->add_option("--suggest", suggest, "triangle-count rule: 'n,N,d,method[,c]'");

    std::string check_dir;
    auto* check_cmd = app.add_subcommand("check", "re-verify emitted artifacts");
    check_cmd->add_option("--dir", check_dir, "artifact directory")->required();

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end()); // CLI11 consumes back to front
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_io);
        if (cv_cmd->parsed()) return cmd_cv(cv_io);
        if (scc_cmd->parsed()) return cmd_scc(scc_io, alpha0, n_boot);
        if (sim_cmd->parsed()) return cmd_simulate(sim_io);
        if (mesh_cmd->parsed()) return cmd_mesh_info(mesh_path, suggest);
        if (check_cmd->parsed()) return cmd_check(check_dir);
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numeric;
    }
    return exit_usage;
}
