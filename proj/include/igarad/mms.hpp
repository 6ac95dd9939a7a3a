// Manufactured plane-wave solutions for verifying the discretization.
//
// u*(x,y) = A exp(i k d.x) solves -Lap u - k^2 u = 0 exactly, so only the
// boundary data change: u* on the aperture, d_n u* on the baffle and
// d_n u* + i k u* on the arc.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "field.hpp"

namespace igarad {

struct PlaneWave {
    cplx amplitude{1.0, 0.0};
    double k = 10.0;
    Point2 direction{0.0, 1.0}; ///< unit vector

    [[nodiscard]] cplx value(Point2 p) const
    {
        return amplitude * std::exp(cplx(0.0, k * (direction.x * p.x + direction.y * p.y)));
    }
    [[nodiscard]] std::array<cplx, 2> gradient(Point2 p) const
    {
        const cplx u = value(p);
        return {cplx(0.0, k * direction.x) * u, cplx(0.0, k * direction.y) * u};
    }
    cplx operator()(Point2 p) const { return value(p); }
};

namespace detail {

/// Outward unit normal of a counterclockwise boundary with tangent `t`.
inline Point2 outward_normal(Point2 t)
{
    const double len = norm(t);
    return {t.y / len, -t.x / len};
}

} // namespace detail

// Coefficients of the L2 projection of u*(F(xi,0)) onto the xi basis of the
// bottom edge. Entry i belongs to the basis function B_i(xi) B_0(eta).
inline std::vector<cplx> bottom_trace_projection(const TensorProductSpace& space, const CoonsSurface& F,
                                                 const PlaneWave& exact, int points_per_span)
{
    const int n = space.n();
    const KnotVector& kx = space.xi;
    const QuadratureRule quad(points_per_span);
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    for (int s : kx.nonempty_spans()) {
        const GaussRule g = quad.on_interval(kx[s], kx[s + 1]);
        for (int q = 0; q < g.size(); ++q) {
            const BasisEval be = eval_basis(kx, g.points[q], 0);
            const cplx u = exact.value(eval_map(F, g.points[q], 0.0));
            for (int a = 0; a < kx.order(); ++a) {
                const int i = be.first_index() + a;
                rhs(i) += g.weights[q] * be.values()[a] * u;
                for (int b = 0; b < kx.order(); ++b)
                    mass(i, be.first_index() + b) += g.weights[q] * be.values()[a] * be.values()[b];
            }
        }
    }
    const Eigen::VectorXcd c = mass.cast<cplx>().ldlt().solve(rhs);
    return {c.data(), c.data() + n};
}

// Boundary load of the manufactured problem over all N dofs:
// int_{Gamma_N} d_n u* psi ds + int_{Gamma_R} (d_n u* + i k u*) psi ds.
inline std::vector<cplx> mms_boundary_load(const TensorProductSpace& space, const CoonsSurface& F,
                                           const DomainConfig& cfg, const PlaneWave& exact, int points_per_span)
{
    std::vector<cplx> load(static_cast<std::size_t>(space.size()));
    const QuadratureRule quad(points_per_span);
    const cplx ik{0.0, exact.k};

    // integrates along one edge; `param` maps the edge coordinate to (xi,eta)
    auto integrate = [&](const KnotVector& kv, double lo, double hi, auto&& param, auto&& dof_of, auto&& tangent_of,
                         bool robin) {
        if (!(hi > lo))
            return;
        const GaussRule g = quad.on_interval(lo, hi);
        for (int q = 0; q < g.size(); ++q) {
            const auto [xi, eta] = param(g.points[q]);
            const auto [p, jd] = F.eval_with_jacobian(xi, eta);
            const Point2 t = tangent_of(jd);
            const Point2 nrm = detail::outward_normal(t);
            const auto grad = exact.gradient(p);
            cplx data = grad[0] * nrm.x + grad[1] * nrm.y;
            if (robin)
                data += ik * exact.value(p);
            const double w = g.weights[q] * norm(t);
            const BasisEval be = eval_basis(kv, g.points[q], 0);
            for (int a = 0; a < kv.order(); ++a)
                load[dof_of(be.first_index() + a)] += w * be.values()[a] * data;
        }
    };

    const int n = space.n(), m = space.m();
    const auto ap = aperture_params(cfg);
    // counterclockwise: bottom (+F_xi), right (+F_eta), top (-F_xi), left (-F_eta)
    for (int s : space.xi.nonempty_spans()) {
        const double a = space.xi[s], b = space.xi[s + 1];
        auto bottom = [](double t) { return std::array<double, 2>{t, 0.0}; };
        auto top = [](double t) { return std::array<double, 2>{t, 1.0}; };
        auto bottom_dof = [&](int i) { return space.index(i, 0); };
        auto top_dof = [&](int i) { return space.index(i, m - 1); };
        auto fwd = [](const JacobianData& jd) { return jd.d_xi(); };
        auto bwd = [](const JacobianData& jd) { return -1.0 * jd.d_xi(); };
        integrate(space.xi, a, std::min(b, ap.xi_minus), bottom, bottom_dof, fwd, false);
        integrate(space.xi, std::max(a, ap.xi_plus), b, bottom, bottom_dof, fwd, false);
        integrate(space.xi, a, b, top, top_dof, bwd, true);
    }
    for (int s : space.eta.nonempty_spans()) {
        const double a = space.eta[s], b = space.eta[s + 1];
        auto left = [](double t) { return std::array<double, 2>{0.0, t}; };
        auto right = [](double t) { return std::array<double, 2>{1.0, t}; };
        auto left_dof = [&](int j) { return space.index(0, j); };
        auto right_dof = [&](int j) { return space.index(n - 1, j); };
        auto fwd = [](const JacobianData& jd) { return jd.d_eta(); };
        auto bwd = [](const JacobianData& jd) { return -1.0 * jd.d_eta(); };
        integrate(space.eta, a, b, right, right_dof, fwd, true);
        integrate(space.eta, a, b, left, left_dof, bwd, true);
    }
    return load;
}

// Reduced system whose exact solution is the plane wave: Dirichlet
// coefficients from the projected aperture trace, boundary loads added to
// the right-hand side.
inline SystemMatrices mms_residual_source(const TensorProductSpace& space, const CoonsSurface& F,
                                          const GalerkinMatrices& G, const DofPartition& part,
                                          const DomainConfig& cfg, const PlaneWave& exact, int points_per_span = 0)
{
    if (points_per_span <= 0)
        points_per_span = std::max(space.xi.order(), space.eta.order()) + 3;
    const auto trace = bottom_trace_projection(space, F, exact, points_per_span);
    std::vector<cplx> g;
    g.reserve(part.dirichlet.size());
    for (int q : part.dirichlet)
        g.push_back(trace[space.unflatten(q).first]);
    SystemMatrices sys = build_system(G, part, exact.k, g);
    const auto load = mms_boundary_load(space, F, cfg, exact, points_per_span);
    for (int p = 0; p < part.n_free(); ++p)
        sys.b[p] += load[part.free[p]];
    return sys;
}

} // namespace igarad
