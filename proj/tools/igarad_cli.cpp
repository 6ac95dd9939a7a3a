// igarad: command-line front end for the semicircle radiation solver.
//
// exit codes: 0 ok, 1 usage, 2 config, 3 geometry/space, 4 assembly/system,
// 5 solve (incl. GMRES not converged), 6 output, 7 size guard (--full-scale).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <igarad/config.hpp>
#include <igarad/io.hpp>
#include <igarad/pipeline.hpp>
#include <igarad/studies.hpp>

using namespace igarad;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kGeometry = 3, kAssembly = 4, kSolve = 5, kOutput = 6, kGuard = 7 };

int exit_for(Stage s)
{
    switch (s) {
    case Stage::Config: return kConfig;
    case Stage::Geometry:
    case Stage::Space: return kGeometry;
    case Stage::Assembly:
    case Stage::System: return kAssembly;
    case Stage::Solve:
    case Stage::Postprocess: return kSolve;
    case Stage::Output: return kOutput;
    }
    return kUsage;
}

// Flags left unset keep the config-file (or default) value.
struct Overrides {
    std::string config;
    std::optional<double> frequency, sound_speed, aperture, radius_factor, amplitude, beta_factor, tol;
    std::optional<std::string> theta, solver, side, out_dir, vtk;
    std::optional<int> order_xi, order_eta, n, m, restart, max_outer, grid_xi, grid_eta, profile_samples;
    bool no_align = false, dump_matrices = false;

    void add_to(CLI::App* app)
    {
        app->add_option("-c,--config", config, "JSON run configuration")->check(CLI::ExistingFile);
        app->add_option("--frequency", frequency, "frequency f [Hz]");
        app->add_option("--sound-speed", sound_speed, "sound speed c [m/s]");
        app->add_option("--aperture", aperture, "half-aperture a [m]");
        app->add_option("--radius-factor", radius_factor, "r = factor * a^2/lambda");
        app->add_option("--theta", theta, "corner angle: radians or e.g. pi/4");
        app->add_option("--amplitude", amplitude, "Dirichlet value C");
        app->add_option("--order-xi", order_xi, "spline order (degree+1) in xi");
        app->add_option("--order-eta", order_eta, "spline order (degree+1) in eta");
        app->add_option("-n", n, "basis functions in xi");
        app->add_option("-m", m, "basis functions in eta");
        app->add_flag("--no-align", no_align, "do not insert the aperture ends as knots");
        app->add_option("--solver", solver, "gmres | direct")->check(CLI::IsMember({"gmres", "direct"}));
        app->add_option("--beta-factor", beta_factor, "CSLP shift beta = factor / k");
        app->add_option("--restart", restart, "GMRES restart length");
        app->add_option("--tol", tol, "GMRES relative tolerance");
        app->add_option("--max-outer", max_outer, "GMRES outer iteration limit");
        app->add_option("--side", side, "preconditioning side")->check(CLI::IsMember({"left", "right"}));
        app->add_option("--grid-xi", grid_xi, "field samples in xi");
        app->add_option("--grid-eta", grid_eta, "field samples in eta");
        app->add_option("--profile-samples", profile_samples, "samples per profile");
        app->add_option("-o,--out-dir", out_dir, "output directory");
        app->add_option("--vtk", vtk, "VTK file name inside the output directory");
        app->add_flag("--dump-matrices", dump_matrices, "write A, S, M, E, b as Matrix Market");
    }

    RunConfig resolve() const
    {
        RunConfig c = config.empty() ? RunConfig{} : parse_run_config(read_json(config));
        auto set = [](auto& dst, const auto& src) {
            if (src)
                dst = *src;
        };
        set(c.frequency, frequency);
        set(c.sound_speed, sound_speed);
        set(c.aperture, aperture);
        set(c.radius_factor, radius_factor);
        set(c.amplitude, amplitude);
        set(c.beta_factor, beta_factor);
        set(c.gmres.tol, tol);
        set(c.order_xi, order_xi);
        set(c.order_eta, order_eta);
        set(c.n, n);
        set(c.m, m);
        set(c.gmres.restart, restart);
        set(c.gmres.max_outer, max_outer);
        set(c.grid_xi, grid_xi);
        set(c.grid_eta, grid_eta);
        set(c.profile_samples, profile_samples);
        set(c.output.dir, out_dir);
        set(c.output.vtk, vtk);
        if (theta)
            c.theta = parse_angle(*theta);
        if (solver)
            c.solver = *solver == "gmres" ? SolverChoice::Gmres : SolverChoice::Direct;
        if (side)
            c.gmres.side = *side == "left" ? PreconditionSide::Left : PreconditionSide::Right;
        if (no_align)
            c.align_aperture = false;
        if (dump_matrices)
            c.output.matrices = true;
        return c;
    }
};

int cmd_run(const Overrides& ov, bool full_scale)
{
    RunConfig cfg;
    try {
        cfg = ov.resolve();
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "[config] " << e.what() << '\n';
        return kConfig;
    }
    std::cout << "k = " << cfg.wavenumber() << ", lambda = " << cfg.wavelength() << ", N_f = " << cfg.near_field()
              << ", r = " << cfg.radius() << ", n x m = " << cfg.dofs() << '\n';
    if (cfg.dofs() > kFullScaleThreshold && !full_scale) {
        print_memory_estimate(std::cerr, estimate_memory(cfg));
        std::cerr << "refusing to run " << cfg.dofs() << " dofs without --full-scale\n";
        return kGuard;
    }
    RunOptions opt;
    opt.full_scale = full_scale;
    opt.log = &std::cout;
    try {
        const RunResult res = run(cfg, opt);
        std::cout << "dirichlet defect " << res.dirichlet_defect << ", true residual " << res.solve.true_residual
                  << '\n';
        if (!res.solve.converged) {
            std::cerr << "[solve] GMRES did not reach tol " << cfg.gmres.tol << " (residual "
                      << res.solve.preconditioned_residual << ")\n";
            return kSolve;
        }
    } catch (const StageError& e) {
        std::cerr << e.what() << '\n';
        return exit_for(e.stage());
    }
    return kOk;
}

int cmd_quality(const Overrides& ov, int res, const std::string& out)
{
    try {
        const RunConfig cfg = ov.resolve();
        cfg.validate();
        const auto F = make_semicircle_map(cfg.domain());
        const auto q = quality_map(F, res);
        const auto s = summarize_quality(q);
        if (!out.empty()) {
            auto os = detail::open_out(out);
            os << "xi,eta,x,y,mean_ratio,det\n";
            for (const auto& p : q)
                os << p.xi << ',' << p.eta << ',' << p.x << ',' << p.y << ',' << p.mean_ratio << ',' << p.det << '\n';
        }
        const nlohmann::json j = {{"theta", cfg.theta}, {"radius", cfg.radius()},  {"grid", res},
                                  {"min", s.min},       {"max", s.max},            {"mean", s.mean},
                                  {"fraction_ge_0.8", s.fraction_good}, {"min_det", s.min_det}};
        std::cout << j.dump(2) << '\n';
    } catch (const IoError& e) {
        std::cerr << "[output] " << e.what() << '\n';
        return kOutput;
    } catch (const ConfigError& e) {
        std::cerr << "[config] " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "[geometry] " << e.what() << '\n';
        return kGeometry;
    }
    return kOk;
}

void print_mms_row(std::FILE* f, int order, double k, const MmsResult& r, double rate)
{
    std::fprintf(f, "%d,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g\n", order, k, r.elements, r.dofs, r.h, r.norms.error,
                 r.relative(), rate);
}

int cmd_mms(const MmsSetup& setup, const std::vector<int>& orders, int levels, int elements0, const std::string& out)
{
    std::FILE* f = out.empty() ? stdout : std::fopen(out.c_str(), "w");
    if (!f) {
        std::cerr << "[output] cannot open " << out << '\n';
        return kOutput;
    }
    std::fprintf(f, "order,k,elements,dofs,h,l2_error,relative_error,rate\n");
    int rc = kOk;
    for (int order : orders) {
        const auto t = convergence_study(setup, order, levels, elements0);
        for (const auto& row : t.rows)
            print_mms_row(f, order, setup.k, row.result, row.rate);
        std::fflush(f);
        std::cerr << "order " << order << ": observed rate " << t.observed_order()
                  << (t.monotone ? "" : " (errors not monotone)") << '\n';
        if (!t.monotone)
            rc = kSolve;
    }
    if (f != stdout)
        std::fclose(f);
    return rc;
}

int cmd_pollution(const MmsSetup& setup, const std::vector<int>& orders, const std::vector<double>& ks, double dpw,
                  const std::string& out)
{
    std::FILE* f = out.empty() ? stdout : std::fopen(out.c_str(), "w");
    if (!f) {
        std::cerr << "[output] cannot open " << out << '\n';
        return kOutput;
    }
    std::fprintf(f, "order,k,elements,dofs,h,l2_error,relative_error,growth\n");
    for (int order : orders) {
        const auto t = pollution_study(setup, order, ks, dpw);
        for (const auto& row : t.rows)
            print_mms_row(f, order, row.k, row.result, row.result.relative() / t.rows.front().result.relative());
        std::fflush(f);
        std::cerr << "order " << order << ": error growth over k in [" << ks.front() << ", " << ks.back()
                  << "] = " << t.growth() << '\n';
    }
    if (f != stdout)
        std::fclose(f);
    return kOk;
}

SparseReal real_part(const SparseComplex& A, const std::string& what)
{
    std::vector<Triplet<double>> t;
    for (int r = 0; r < A.rows(); ++r)
        for (auto p = A.row_offsets()[r]; p < A.row_offsets()[r + 1]; ++p) {
            if (A.values()[p].imag() != 0.0)
                throw IoError(what + " must be real");
            t.push_back({r, A.col_indices()[p], A.values()[p].real()});
        }
    return SparseReal::from_triplets(A.rows(), A.cols(), std::move(t));
}

struct SolveMmArgs {
    std::string matrix, rhs, mass, out, report, solver = "gmres", side = "left";
    double beta = 0.0;
    GmresConfig gmres;
};

int cmd_solve_mm(SolveMmArgs a)
{
    SparseComplex A;
    std::vector<cplx> b;
    std::optional<SparseReal> M;
    try {
        A = read_matrix_market(a.matrix);
        if (A.rows() != A.cols())
            throw IoError("matrix is not square");
        if (a.rhs.empty()) {
            // b = A * ones, so the exact solution is known
            b = A * std::vector<cplx>(static_cast<std::size_t>(A.cols()), cplx(1.0, 0.0));
        } else {
            b = read_matrix_market_vector(a.rhs);
        }
        if (static_cast<int>(b.size()) != A.rows())
            throw IoError("right-hand side length does not match the matrix");
        if (!a.mass.empty())
            M = real_part(read_matrix_market(a.mass), "mass matrix");
    } catch (const std::exception& e) {
        std::cerr << "[input] " << e.what() << '\n';
        return kConfig;
    }
    std::vector<cplx> x;
    SolveReport rep;
    try {
        if (a.solver == "direct") {
            x = direct_solve(A, b);
            rep.method = "direct";
            rep.converged = true;
        } else {
            a.gmres.side = a.side == "left" ? PreconditionSide::Left : PreconditionSide::Right;
            if (M) {
                const auto P = build_cslp(A, *M, a.beta);
                std::tie(x, rep) = gmres(A, b, P, a.gmres);
            } else {
                std::tie(x, rep) = gmres(A, b, IdentityPreconditioner{}, a.gmres);
            }
        }
        auto r = A * x;
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = b[i] - r[i];
        rep.true_residual = norm2(r) / norm2(b);
    } catch (const std::exception& e) {
        std::cerr << "[solve] " << e.what() << '\n';
        return kSolve;
    }
    try {
        if (!a.out.empty())
            write_matrix_market_vector(a.out, x);
        if (!a.report.empty())
            write_json(a.report, to_json(rep));
    } catch (const std::exception& e) {
        std::cerr << "[output] " << e.what() << '\n';
        return kOutput;
    }
    std::cout << to_json(rep).dump(2) << '\n';
    return rep.converged ? kOk : kSolve;
}

void add_mms_options(CLI::App* app, MmsSetup& s)
{
    app->add_option("--radius", s.r, "semicircle radius");
    app->add_option("--aperture", s.a, "half-aperture");
    app->add_option("--direction", s.direction, "plane-wave angle [rad]");
    app->add_option("--amplitude", s.amplitude, "plane-wave amplitude");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Isogeometric solver for 2D acoustic radiation from a baffled transducer"};
    app.require_subcommand(1);

    Overrides run_ov;
    bool full_scale = false;
    auto* run = app.add_subcommand("run", "full pipeline: geometry, assembly, solve, field/profile/report output");
    run_ov.add_to(run);
    run->add_flag("--full-scale", full_scale, "allow runs above " + std::to_string(kFullScaleThreshold) + " dofs");

    Overrides q_ov;
    int q_res = 200;
    std::string q_out;
    auto* quality = app.add_subcommand("quality-map", "mean-ratio Jacobian of the Coons map");
    q_ov.add_to(quality);
    quality->add_option("--res", q_res, "samples per direction");
    quality->add_option("--csv", q_out, "write every sample to this CSV");

    MmsSetup mms;
    std::vector<int> mms_orders{3, 4};
    int levels = 4, elements0 = 16;
    std::string mms_out;
    auto* conv = app.add_subcommand("mms-converge", "plane-wave manufactured-solution convergence table");
    add_mms_options(conv, mms);
    conv->add_option("-k,--wavenumber", mms.k, "wavenumber");
    conv->add_option("--orders", mms_orders, "spline orders")->delimiter(',');
    conv->add_option("--levels", levels, "refinement levels");
    conv->add_option("--elements0", elements0, "elements per direction on the coarsest level");
    conv->add_option("--csv", mms_out, "output CSV (default stdout)");

    MmsSetup pol;
    std::vector<int> pol_orders{3, 4};
    std::vector<double> ks{20, 40, 80, 160};
    double dpw = 8;
    std::string pol_out;
    auto* pollution = app.add_subcommand("pollution", "error growth in k at fixed dofs per wavelength");
    add_mms_options(pollution, pol);
    pollution->add_option("--orders", pol_orders, "spline orders")->delimiter(',');
    pollution->add_option("--ks", ks, "wavenumbers")->delimiter(',');
    pollution->add_option("--dpw", dpw, "dofs per wavelength across the diameter");
    pollution->add_option("--csv", pol_out, "output CSV (default stdout)");

    SolveMmArgs sm;
    auto* solve = app.add_subcommand("solve-mm", "solve a Matrix Market system");
    solve->add_option("matrix", sm.matrix, "A (coordinate format)")->required()->check(CLI::ExistingFile);
    solve->add_option("--rhs", sm.rhs, "b (default A * ones)")->check(CLI::ExistingFile);
    solve->add_option("--mass", sm.mass, "real M for the shifted preconditioner A - i beta M")
        ->check(CLI::ExistingFile);
    solve->add_option("--beta", sm.beta, "shift beta");
    solve->add_option("--solver", sm.solver, "gmres | direct")->check(CLI::IsMember({"gmres", "direct"}));
    solve->add_option("--side", sm.side, "preconditioning side")->check(CLI::IsMember({"left", "right"}));
    solve->add_option("--restart", sm.gmres.restart, "GMRES restart length");
    solve->add_option("--tol", sm.gmres.tol, "GMRES relative tolerance");
    solve->add_option("--max-outer", sm.gmres.max_outer, "GMRES outer iteration limit");
    solve->add_option("--out", sm.out, "write x as Matrix Market");
    solve->add_option("--report", sm.report, "write the solve report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    if (*run)
        return cmd_run(run_ov, full_scale);
    if (*quality)
        return cmd_quality(q_ov, q_res, q_out);
    if (*conv)
        return cmd_mms(mms, mms_orders, levels, elements0, mms_out);
    if (*pollution)
        return cmd_pollution(pol, pol_orders, ks, dpw, pol_out);
    if (*solve)
        return cmd_solve_mm(sm);
    return kUsage;
}
