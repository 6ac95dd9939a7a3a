// Manufactured-solution convergence and pollution sweeps.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "assembly.hpp"
#include "field.hpp"
#include "mms.hpp"
#include "solver.hpp"

namespace igarad {

/// Domain and exact solution of the manufactured problem.
struct MmsSetup {
    double r = 0.5;
    double a = 0.25;       ///< xi_{a-}, xi_{a+} = 1/4, 3/4: breakpoints of every dyadic mesh
    double theta = std::numbers::pi / 4;
    double k = 10.0;
    double direction = 0.6; ///< propagation angle of the plane wave [rad]
    double amplitude = 1.0;

    [[nodiscard]] DomainConfig domain() const
    {
        DomainConfig d;
        d.r = r;
        d.a = a;
        d.theta = theta;
        d.c_sound = 1.0;
        d.f = k / (2.0 * std::numbers::pi);
        return d;
    }
    [[nodiscard]] PlaneWave wave() const
    {
        return {cplx(amplitude, 0.0), k, {std::cos(direction), std::sin(direction)}};
    }
};

struct MmsResult {
    int elements = 0; ///< uniform elements per direction
    int dofs = 0;
    double h = 0.0;   ///< 1 / elements (parametric)
    ErrorNorms norms;

    [[nodiscard]] double relative() const { return norms.relative(); }
};

/// One manufactured solve with `elements` uniform spans in each direction.
inline MmsResult mms_solve(const MmsSetup& setup, int order, int elements)
{
    const DomainConfig dom = setup.domain();
    const auto F = make_semicircle_map(dom);
    const int nb = elements + order - 1;
    const auto space = make_solution_space(order, order, nb, nb, dom, F, true);
    const auto part = classify_dofs(space, dom);
    const auto G = assemble(space, F, QuadratureRule::for_order(order));
    const PlaneWave exact = setup.wave();
    const auto sys = mms_residual_source(space, F, G, part, dom, exact);
    const auto x = direct_solve(sys.A, sys.b);
    const SolutionField sol(space, F, expand_solution(part, x, sys.dirichlet_values), setup.k);
    MmsResult r;
    r.elements = elements;
    r.dofs = space.size();
    r.h = 1.0 / elements;
    r.norms = l2_error(sol, exact);
    return r;
}

struct ConvergenceRow {
    MmsResult result;
    double rate = 0.0; ///< log2(e_{l-1}/e_l); 0 on the first level
};

struct ConvergenceTable {
    int order = 0;
    std::vector<ConvergenceRow> rows;
    bool monotone = true; ///< errors strictly decrease level to level

    /// Rate between the two finest levels.
    [[nodiscard]] double observed_order() const { return rows.size() < 2 ? 0.0 : rows.back().rate; }
};

// Nested uniform refinements elements0 * 2^l, l = 0..levels-1. A zero
// amplitude gives zero error at every level and rate 0.
inline ConvergenceTable convergence_study(const MmsSetup& setup, int order, int levels, int elements0 = 16)
{
    ConvergenceTable t;
    t.order = order;
    for (int l = 0; l < levels; ++l) {
        ConvergenceRow row{mms_solve(setup, order, elements0 << l)};
        if (!t.rows.empty()) {
            const double prev = t.rows.back().result.norms.error, cur = row.result.norms.error;
            if (prev > 0.0 && cur > 0.0)
                row.rate = std::log2(prev / cur);
            if (!(cur < prev))
                t.monotone = false;
        }
        t.rows.push_back(row);
    }
    return t;
}

struct PollutionRow {
    double k = 0.0;
    MmsResult result;
};

struct PollutionTable {
    int order = 0;
    double dofs_per_wavelength = 0.0;
    std::vector<PollutionRow> rows;

    /// relative error at the largest k over that at the smallest
    [[nodiscard]] double growth() const
    {
        return rows.size() < 2 ? 1.0 : rows.back().result.relative() / rows.front().result.relative();
    }
};

/// Elements per direction giving `dpw` one-dimensional dofs per wavelength across the diameter.
inline int elements_for(double k, double r, double dpw, int order)
{
    const double waves = 2.0 * r * k / (2.0 * std::numbers::pi);
    return std::max(1, static_cast<int>(std::lround(dpw * waves)) - (order - 1));
}

/// Sweeps k at fixed dofs per wavelength.
inline PollutionTable pollution_study(MmsSetup setup, int order, const std::vector<double>& ks, double dpw)
{
    PollutionTable t;
    t.order = order;
    t.dofs_per_wavelength = dpw;
    for (double k : ks) {
        setup.k = k;
        t.rows.push_back({k, mms_solve(setup, order, elements_for(k, setup.r, dpw, order))});
    }
    return t;
}

} // namespace igarad
