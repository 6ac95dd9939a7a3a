// geometry -> spaces -> assembly -> solve -> postprocess, with
// stage-tagged failures and the output files of one run.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "assembly.hpp"
#include "config.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "solver.hpp"

namespace igarad {

enum class Stage { Config, Geometry, Space, Assembly, System, Solve, Postprocess, Output };

inline const char* stage_name(Stage s)
{
    switch (s) {
    case Stage::Config: return "config";
    case Stage::Geometry: return "geometry";
    case Stage::Space: return "space";
    case Stage::Assembly: return "assembly";
    case Stage::System: return "system";
    case Stage::Solve: return "solve";
    case Stage::Postprocess: return "postprocess";
    case Stage::Output: return "output";
    }
    return "?";
}

class StageError : public std::runtime_error {
public:
    StageError(Stage s, const std::string& what)
        : std::runtime_error(std::string("[") + stage_name(s) + "] " + what), stage_(s)
    {
    }
    [[nodiscard]] Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

/// Runs above this many dofs need an explicit opt-in.
inline constexpr long long kFullScaleThreshold = 60'000;

struct MemoryEstimate {
    long long dofs = 0;
    long long nnz_per_row = 0;
    double matrices_bytes = 0; ///< S, M, E (real) and A, A - i beta M (complex)
    double factor_bytes = 0;   ///< banded LU bound for the lexicographic ordering

    [[nodiscard]] double total_gib() const { return (matrices_bytes + factor_bytes) / (1024.0 * 1024.0 * 1024.0); }
};

// Rough, deliberately pessimistic. The factor bound takes the bandwidth
// order_xi * n of q = i + n j; fill-reducing orderings usually land well
// below it.
inline MemoryEstimate estimate_memory(const RunConfig& c)
{
    MemoryEstimate e;
    e.dofs = c.dofs();
    e.nnz_per_row = static_cast<long long>(2 * c.order_xi - 1) * (2 * c.order_eta - 1);
    const double nnz = static_cast<double>(e.dofs) * e.nnz_per_row;
    e.matrices_bytes = 3 * nnz * (8 + 4) + 2 * nnz * (16 + 4);
    const double bw = static_cast<double>(c.order_xi) * c.n;
    e.factor_bytes = 2.0 * static_cast<double>(e.dofs) * bw * 16;
    return e;
}

inline void print_memory_estimate(std::ostream& os, const MemoryEstimate& e)
{
    const double gib = 1024.0 * 1024.0 * 1024.0;
    os << "memory estimate: N = " << e.dofs << ", matrices " << e.matrices_bytes / gib << " GiB, LU factor <= "
       << e.factor_bytes / gib << " GiB (banded bound), total <= " << e.total_gib() << " GiB\n";
}

struct RunOptions {
    bool write_outputs = true;
    bool full_scale = false;
    std::ostream* log = nullptr;
};

struct RunResult {
    RunConfig config;
    DomainConfig domain;
    TensorProductSpace space;
    std::optional<CoonsSurface> geometry;
    DofPartition partition;
    GalerkinMatrices galerkin;
    SystemMatrices system;
    std::vector<cplx> alpha;
    std::optional<SolutionField> field;
    SolveReport solve;
    double dirichlet_defect = 0.0; ///< max |u^h - C| over 200 aperture samples
    std::vector<FieldSample> axis, bottom;
    nlohmann::json report;

    [[nodiscard]] double k() const { return domain.wavenumber(); }
};

/// max |u^h(F(xi,0)) - C| over `samples` uniform points of the aperture.
inline double dirichlet_defect(const SolutionField& sol, const DomainConfig& cfg, int samples = 200)
{
    const auto ap = aperture_params(cfg);
    double d = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double xi = ap.xi_minus + (ap.xi_plus - ap.xi_minus) * s / (samples - 1);
        d = std::max(d, std::abs(sol.value(xi, 0.0) - cfg.C));
    }
    return d;
}

/// Index of the largest magnitude in a profile.
inline std::size_t argmax_magnitude(const std::vector<FieldSample>& p)
{
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end(), [](const auto& a, const auto& b) {
                                        return a.magnitude() < b.magnitude();
                                    })
                                    - p.begin());
}

namespace detail {

template <typename F>
auto staged(Stage s, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(s, e.what());
    }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

inline void write_outputs(const RunResult& res, std::ostream* log);

inline RunResult run(const RunConfig& cfg, const RunOptions& opt = {})
{
    using detail::staged;
    RunResult res;
    nlohmann::json timing;
    auto t0 = std::chrono::steady_clock::now();
    auto lap = [&](const char* name) {
        timing[name] = detail::seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
    };
    auto say = [&](const std::string& s) {
        if (opt.log)
            *opt.log << s << '\n';
    };

    staged(Stage::Config, [&] {
        cfg.validate();
        if (cfg.dofs() > kFullScaleThreshold && !opt.full_scale)
            throw ConfigError("N = " + std::to_string(cfg.dofs()) + " exceeds " + std::to_string(kFullScaleThreshold)
                              + " dofs; pass --full-scale to run it");
        return 0;
    });
    res.config = cfg;
    res.domain = cfg.domain();
    const double k = res.domain.wavenumber();

    res.geometry = staged(Stage::Geometry, [&] { return make_semicircle_map(res.domain); });
    lap("geometry");

    staged(Stage::Space, [&] {
        res.space = make_solution_space(cfg.order_xi, cfg.order_eta, cfg.n, cfg.m, res.domain, *res.geometry,
                                        cfg.align_aperture);
        res.partition = classify_dofs(res.space, res.domain);
        return 0;
    });
    say("space: " + std::to_string(res.space.n()) + " x " + std::to_string(res.space.m()) + " = "
        + std::to_string(res.space.size()) + " dofs, " + std::to_string(res.partition.n_dirichlet()) + " Dirichlet");

    res.galerkin = staged(Stage::Assembly, [&] {
        const auto quad = QuadratureRule::for_order(std::max(cfg.order_xi, cfg.order_eta));
        return assemble(res.space, *res.geometry, quad);
    });
    for (const auto& w : res.galerkin.warnings)
        say("warning: " + w);
    lap("assembly");

    res.system = staged(Stage::System, [&] { return build_system(res.galerkin, res.partition, k, res.domain.C); });
    lap("system");

    if (opt.full_scale && opt.log)
        print_memory_estimate(*opt.log, estimate_memory(cfg));

    std::vector<cplx> x = staged(Stage::Solve, [&] {
        if (cfg.solver == SolverChoice::Direct) {
            const auto ts = std::chrono::steady_clock::now();
            auto sol = direct_solve(res.system.A, res.system.b);
            res.solve = {};
            res.solve.method = "direct";
            res.solve.converged = true;
            res.solve.seconds = detail::seconds_since(ts);
            std::vector<cplx> r = res.system.A * sol;
            for (std::size_t i = 0; i < r.size(); ++i)
                r[i] = res.system.b[i] - r[i];
            res.solve.true_residual = norm2(r) / norm2(res.system.b);
            return sol;
        }
        const auto P = build_cslp(res.system.A, res.system.M, cfg.beta());
        auto [sol, rep] = gmres(res.system.A, res.system.b, P, cfg.gmres);
        res.solve = std::move(rep);
        return sol;
    });
    lap("solve");
    say(std::string("solve: ") + res.solve.method + ", outer " + std::to_string(res.solve.outer_iterations)
        + ", inner " + std::to_string(res.solve.inner_iterations) + (res.solve.converged ? "" : " (NOT converged)"));

    staged(Stage::Postprocess, [&] {
        res.alpha = expand_solution(res.partition, x, res.system.dirichlet_values);
        res.field.emplace(res.space, *res.geometry, res.alpha, k);
        res.dirichlet_defect = dirichlet_defect(*res.field, res.domain);
        res.axis = axis_profile(*res.field, cfg.profile_samples);
        res.bottom = bottom_profile(*res.field, cfg.profile_samples);
        return 0;
    });
    lap("postprocess");

    const auto& peak = res.axis[argmax_magnitude(res.axis)];
    res.report = {{"config", to_json(cfg)},
                  {"derived",
                   {{"wavenumber", k},
                    {"wavelength", res.domain.wavelength()},
                    {"near_field", near_field_length(res.domain)},
                    {"radius", res.domain.r},
                    {"beta", cfg.beta()},
                    {"dofs", res.space.size()},
                    {"free_dofs", res.partition.n_free()},
                    {"dirichlet_dofs", res.partition.n_dirichlet()},
                    {"nnz", res.system.A.nnz()},
                    {"density", density(res.system.A)}}},
                  {"solve", to_json(res.solve)},
                  {"dirichlet_defect", res.dirichlet_defect},
                  {"axis_peak", {{"y", peak.y}, {"abs", peak.magnitude()}}},
                  {"warnings", res.galerkin.warnings},
                  {"timing", timing}};

    if (opt.write_outputs)
        staged(Stage::Output, [&] {
            write_outputs(res, opt.log);
            return 0;
        });
    return res;
}

inline void write_outputs(const RunResult& res, std::ostream* log)
{
    namespace fs = std::filesystem;
    const auto& o = res.config.output;
    const fs::path dir(o.dir);
    fs::create_directories(dir);
    auto path = [&](const std::string& name) { return (dir / name).string(); };
    const auto grid = sample_grid(*res.field, res.config.grid_xi, res.config.grid_eta);
    if (!o.field_csv.empty())
        write_samples_csv(path(o.field_csv), grid);
    if (!o.vtk.empty())
        write_vtk_structured(path(o.vtk), grid, res.config.grid_xi, res.config.grid_eta);
    if (!o.axis_csv.empty())
        write_samples_csv(path(o.axis_csv), res.axis);
    if (!o.bottom_csv.empty())
        write_samples_csv(path(o.bottom_csv), res.bottom);
    if (o.matrices) {
        write_matrix_market(path("A.mtx"), res.system.A);
        write_matrix_market(path("S.mtx"), res.system.S);
        write_matrix_market(path("M.mtx"), res.system.M);
        write_matrix_market(path("E.mtx"), res.system.E);
        write_matrix_market_vector(path("b.mtx"), res.system.b);
    }
    if (!o.report.empty())
        write_json(path(o.report), res.report);
    if (log)
        *log << "outputs written to " << dir.string() << '\n';
}

struct QualitySummary {
    double min = 0.0, max = 0.0, mean = 0.0;
    double fraction_good = 0.0; ///< share of samples with J_r >= 0.8
    double min_det = 0.0;
};

inline QualitySummary summarize_quality(const std::vector<QualitySample>& q, double good = 0.8)
{
    QualitySummary s;
    if (q.empty())
        return s;
    s.min = s.max = q.front().mean_ratio;
    s.min_det = q.front().det;
    long long n_good = 0;
    for (const auto& x : q) {
        s.min = std::min(s.min, x.mean_ratio);
        s.max = std::max(s.max, x.mean_ratio);
        s.min_det = std::min(s.min_det, x.det);
        s.mean += x.mean_ratio;
        n_good += x.mean_ratio >= good;
    }
    s.mean /= static_cast<double>(q.size());
    s.fraction_good = static_cast<double>(n_good) / static_cast<double>(q.size());
    return s;
}

} // namespace igarad
