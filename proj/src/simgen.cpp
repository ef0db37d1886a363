#include "trispline/simgen.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "trispline/errors.hpp"
#include "trispline/parallel.hpp"
#include "trispline/rng.hpp"
#include "trispline/variance.hpp"

namespace trispline {

namespace {

constexpr double hs_r = 0.5;  // centerline radius of the bend
constexpr double hs_w = 0.4;  // half-width of the strip
constexpr double hs_l = 3.0;  // arm length
const double hs_q = M_PI * hs_r / 2.0;

std::string domain_name(DomainKind kind) {
    switch (kind) {
        case DomainKind::horseshoe: return "horseshoe";
        case DomainKind::slice5: return "slice5";
        case DomainKind::slice35: return "slice35";
    }
    throw validation_error("unknown domain kind");
}

} // namespace

HorseshoeCoords horseshoe_coords(const Point2& z) {
    HorseshoeCoords c{};
    if (z.x >= 0.0) {
        if (z.y > 0.0) {
            c.a = hs_q + z.x;
            c.d = z.y - hs_r;
        } else {
            c.a = -hs_q - z.x;
            c.d = -hs_r - z.y;
        }
    } else {
        // bend: arc position measured from the +y axis, offset radially
        c.a = -std::atan(z.y / z.x) * hs_r;
        c.d = std::hypot(z.x, z.y) - hs_r;
    }
    return c;
}

std::string default_data_dir() {
    if (const char* env = std::getenv("TRISPLINE_DATA"))
        return env;
#ifdef TRISPLINE_SOURCE_DIR
    return std::string(TRISPLINE_SOURCE_DIR) + "/data";
#else
    return "data";
#endif
}

DomainFixture load_domain(DomainKind kind, const std::string& data_dir) {
    const std::string dir = data_dir.empty() ? default_data_dir() : data_dir;
    const std::string registry = dir + "/domains.json";
    std::ifstream in(registry);
    if (!in)
        throw io_error("cannot open domain registry " + registry);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw io_error(registry + ": " + e.what());
    }
    const std::string name = domain_name(kind);
    if (!j.contains(name))
        throw validation_error(registry + ": unknown domain fixture '" + name + "'");
    const auto& d = j[name];

    DomainFixture fx;
    fx.name = name;
    fx.nx = d.at("nx").get<int>();
    fx.ny = d.at("ny").get<int>();
    const auto& bb = d.at("bbox");
    fx.bbox = {bb.at(0).get<double>(), bb.at(1).get<double>(), bb.at(2).get<double>(),
               bb.at(3).get<double>()};
    fx.expected_inside = d.at("inside").get<int>();
    fx.mesh_coarse = std::make_shared<Triangulation>(
        load_mesh_json(dir + "/" + d.at("coarse").get<std::string>()));
    fx.mesh_fine = std::make_shared<Triangulation>(
        load_mesh_json(dir + "/" + d.at("fine").get<std::string>()));

    fx.pixels.reserve(static_cast<std::size_t>(fx.nx) * static_cast<std::size_t>(fx.ny));
    const double wx = (fx.bbox[1] - fx.bbox[0]) / fx.nx;
    const double wy = (fx.bbox[3] - fx.bbox[2]) / fx.ny;
    for (int iy = 0; iy < fx.ny; ++iy)
        for (int ix = 0; ix < fx.nx; ++ix)
            fx.pixels.push_back({fx.bbox[0] + (ix + 0.5) * wx, fx.bbox[2] + (iy + 0.5) * wy});
    return fx;
}

namespace {

double ramp(const Point2& z) {
    const auto c = horseshoe_coords(z);
    return c.a + c.d * c.d;
}

double horseshoe_smooth_beta(int ell, const Point2& z) {
    if (ell == 0)
        return ramp(z);
    return 2.0 * std::sin(0.5 * M_PI * z.x) + z.y * z.y;
}

double horseshoe_jump_beta(int ell, const Point2& z) {
    const double flip = horseshoe_coords(z).d >= 0.0 ? 1.0 : -1.0;
    return flip * horseshoe_smooth_beta(ell, z);
}

double example2_beta(int ell, const Point2& z) {
    switch (ell) {
        case 0: return 5.0 * ((z.x - 0.5) * (z.x - 0.5) + (z.y - 0.5) * (z.y - 0.5));
        case 1: return -1.5 * z.x * z.x * z.x + 1.5 * z.y * z.y * z.y;
        default: return 2.0 - 2.0 * std::exp(-8.0 * ((z.x - 0.5) * (z.x - 0.5) +
                                                     (z.y - 0.5) * (z.y - 0.5)));
    }
}

} // namespace

Generated generate(const SimDesign& design, const DomainFixture& fixture) {
    if (design.n < 2)
        throw validation_error("generate: need n >= 2");
    if (design.lambda1 < design.lambda2 || design.lambda2 < 0.0)
        throw validation_error("generate: need lambda1 >= lambda2 >= 0");
    if (design.sigma < 0.0)
        throw validation_error("generate: sigma must be nonnegative");
    const bool ex2 = design.coeff == CoeffKind::example2;
    if (ex2 && design.domain == DomainKind::horseshoe)
        throw validation_error("generate: the three-coefficient design runs on slice domains");
    if ((design.coeff == CoeffKind::jump || design.coeff == CoeffKind::smooth) &&
        design.domain != DomainKind::horseshoe)
        throw validation_error("generate: jump/smooth designs run on the horseshoe domain");

    const int n = design.n;
    const int p = ex2 ? 2 : 1;
    const int N = static_cast<int>(fixture.pixels.size());

    Generated g;
    g.lambda1 = design.lambda1;
    g.lambda2 = design.lambda2;
    if (ex2) {
        g.psi1 = [](const Point2& z) { return 1.488 * (std::sin(M_PI * z.x) - 1.5); };
        g.psi2 = [](const Point2& z) { return 1.939 * std::cos(2.0 * M_PI * z.y); };
    } else {
        g.psi1 = [](const Point2& z) { return 0.56 * std::sin(2.0 * M_PI * z.x); };
        g.psi2 = [](const Point2& z) { return 0.61 * std::cos(2.0 * M_PI * z.y); };
    }

    g.inside.assign(static_cast<std::size_t>(N), false);
    for (int j = 0; j < N; ++j)
        g.inside[static_cast<std::size_t>(j)] =
            fixture.mesh_coarse->locate(fixture.pixels[static_cast<std::size_t>(j)]).has_value();

    g.beta_true = Eigen::MatrixXd::Zero(p + 1, N);
    for (int j = 0; j < N; ++j) {
        if (!g.inside[static_cast<std::size_t>(j)]) continue;
        const Point2& z = fixture.pixels[static_cast<std::size_t>(j)];
        for (int l = 0; l <= p; ++l) {
            double v;
            switch (design.coeff) {
                case CoeffKind::example2: v = example2_beta(l, z); break;
                case CoeffKind::smooth: v = horseshoe_smooth_beta(l, z); break;
                case CoeffKind::jump: v = horseshoe_jump_beta(l, z); break;
                case CoeffKind::flat: v = l == 0 ? 1.0 : 0.5; break;
                default: throw validation_error("generate: unknown coefficient kind");
            }
            g.beta_true(l, j) = v;
        }
    }

    Rng rng(design.seed);
    Eigen::MatrixXd X(n, p + 1);
    X.col(0).setOnes();
    if (ex2) {
        // correlated pair, redrawn until both components land in [-3,3]
        const double c21 = 0.5, c22 = std::sqrt(1.0 - 0.25);
        for (int i = 0; i < n; ++i) {
            double x1, x2;
            do {
                const double z1 = rng.next_normal(), z2 = rng.next_normal();
                x1 = z1;
                x2 = c21 * z1 + c22 * z2;
            } while (std::fabs(x1) > 3.0 || std::fabs(x2) > 3.0);
            X(i, 1) = x1;
            X(i, 2) = x2;
        }
    } else {
        for (int i = 0; i < n; ++i)
            X(i, 1) = rng.next_truncated_normal(3.0);
    }

    Eigen::MatrixXd xi(n, 2);
    for (int i = 0; i < n; ++i) {
        xi(i, 0) = rng.next_normal();
        xi(i, 1) = rng.next_normal();
    }

    const double sl1 = std::sqrt(design.lambda1), sl2 = std::sqrt(design.lambda2);
    Eigen::MatrixXd Y(n, N);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < N; ++j) {
            const double eps = rng.next_normal();
            if (!g.inside[static_cast<std::size_t>(j)]) {
                Y(i, j) = design.sigma * eps; // pure noise off the domain
                continue;
            }
            const Point2& z = fixture.pixels[static_cast<std::size_t>(j)];
            double mean = 0.0;
            for (int l = 0; l <= p; ++l)
                mean += X(i, l) * g.beta_true(l, j);
            const double eta = sl1 * xi(i, 0) * g.psi1(z) + sl2 * xi(i, 1) * g.psi2(z);
            Y(i, j) = mean + eta + design.sigma * eps;
        }
    }

    g.data = Dataset{std::move(X), std::move(Y), fixture.pixels};
    return g;
}

Eigen::VectorXd mse(const FitResult& fit, const Eigen::MatrixXd& beta_true,
                    const std::vector<bool>& inside) {
    const int p1 = static_cast<int>(fit.beta_surfaces.rows());
    if (beta_true.rows() != p1 || beta_true.cols() != fit.beta_surfaces.cols())
        throw validation_error("mse: fit and truth shapes differ");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p1);
    int count = 0;
    for (Eigen::Index j = 0; j < beta_true.cols(); ++j) {
        if (!inside[static_cast<std::size_t>(j)]) continue;
        ++count;
        for (int l = 0; l < p1; ++l) {
            const double e = fit.beta_surfaces(l, j) - beta_true(l, j);
            out(l) += e * e;
        }
    }
    if (count == 0)
        throw validation_error("mse: no inside pixels");
    return out / count;
}

MonteCarloResult run_monte_carlo(const SimDesign& design, const DomainFixture& fixture,
                                 const MethodConfig& cfg, int reps, int threads) {
    if (reps < 1)
        throw validation_error("run_monte_carlo: need at least one replicate");
    const bool pcst = cfg.method == SmoothMethod::pcst;
    auto mesh = pcst ? fixture.mesh_fine : fixture.mesh_coarse;
    auto space = std::make_shared<SplineSpace>(mesh, pcst ? 0 : cfg.d, pcst ? 0 : cfg.r, 1e-10,
                                               cfg.allow_low_degree);
    auto ctx = std::make_shared<FitContext>(space, fixture.pixels);

    const int p1 = design.coeff == CoeffKind::example2 ? 3 : 2;
    MonteCarloResult res;
    res.mse_per_rep.resize(reps, p1);
    res.width_per_rep = Eigen::MatrixXd::Constant(reps, p1,
                                                  std::numeric_limits<double>::quiet_NaN());
    Eigen::MatrixXd rho_per_rep(reps, p1);
    Eigen::MatrixXd covered(reps, p1);
    covered.setZero();

    parallel_for(reps, threads, [&](int rep) {
        SimDesign d = design;
        d.seed = mix_keys(design.seed, static_cast<std::uint64_t>(rep));
        Generated gen = generate(d, fixture);

        FitResult fr;
        if (pcst) {
            fr = fit_pcst(gen.data, ctx);
        } else {
            std::vector<double> grid =
                cfg.rho_grid.empty() ? ctx->default_rho_grid() : cfg.rho_grid;
            Eigen::VectorXd rho;
            if (grid.size() == 1) {
                rho = Eigen::VectorXd::Constant(1, grid[0]);
            } else {
                auto cv = cross_validate(gen.data, ctx, grid, cfg.cv_folds,
                                         mix_keys(d.seed, 0x5eedfULL));
                rho = cv.best_rho;
            }
            fr = fit_bpst(gen.data, ctx, rho);
        }
        res.mse_per_rep.row(rep) = mse(fr, gen.beta_true, ctx->eval().inside).transpose();
        if (fr.rho.size() == p1)
            rho_per_rep.row(rep) = fr.rho.transpose();
        else
            rho_per_rep.row(rep).setConstant(fr.rho(0));

        if (cfg.with_scc) {
            auto cov = estimate_covariance(gen.data, fr, ctx);
            SccConfig sc;
            sc.alpha0 = cfg.alpha0;
            sc.n_boot = cfg.n_boot;
            sc.seed = mix_keys(d.seed, 0xb007ULL);
            sc.threads = 1; // replicates already run in parallel
            Band band = scc(gen.data, fr, cov, sc);
            const auto& inside = ctx->eval().inside;
            for (int l = 0; l < p1; ++l) {
                bool all_in = true;
                double wsum = 0.0;
                int wcount = 0;
                for (Eigen::Index j = 0; j < band.lower.cols(); ++j) {
                    if (!inside[static_cast<std::size_t>(j)]) continue;
                    wsum += band.upper(l, j) - band.lower(l, j);
                    ++wcount;
                    if (gen.beta_true(l, j) < band.lower(l, j) ||
                        gen.beta_true(l, j) > band.upper(l, j))
                        all_in = false;
                }
                covered(rep, l) = all_in ? 1.0 : 0.0;
                res.width_per_rep(rep, l) = wsum / wcount;
            }
        }
    });

    res.mse_mean = res.mse_per_rep.colwise().mean();
    res.rho_mean = rho_per_rep.colwise().mean();
    if (cfg.with_scc) {
        res.coverage = covered.colwise().mean();
        res.mean_width = res.width_per_rep.colwise().mean();
    } else {
        res.coverage = Eigen::VectorXd::Constant(p1, std::numeric_limits<double>::quiet_NaN());
        res.mean_width = Eigen::VectorXd::Constant(p1, std::numeric_limits<double>::quiet_NaN());
    }
    return res;
}

} // namespace trispline
