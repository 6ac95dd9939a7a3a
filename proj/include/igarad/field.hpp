// Discrete solution u^h = sum_q alpha_q psi_q, evaluated through the
// parametric square, plus axis and diameter profiles.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "quadrature.hpp"
#include "sparse.hpp"
#include "spline.hpp"

namespace igarad {

class SolutionField {
public:
    SolutionField(TensorProductSpace space, CoonsSurface geometry, std::vector<cplx> coeffs, double k = 0.0)
        : space_(std::move(space)), geometry_(std::move(geometry)), coeffs_(std::move(coeffs)), k_(k)
    {
        if (static_cast<int>(coeffs_.size()) != space_.size())
            throw std::invalid_argument("SolutionField: one coefficient per basis function required");
    }

    [[nodiscard]] const TensorProductSpace& space() const noexcept { return space_; }
    [[nodiscard]] const CoonsSurface& geometry() const noexcept { return geometry_; }
    [[nodiscard]] const std::vector<cplx>& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] double wavenumber() const noexcept { return k_; }

    [[nodiscard]] cplx value(double xi, double eta) const
    {
        if (!(xi >= 0.0 && xi <= 1.0 && eta >= 0.0 && eta <= 1.0))
            throw std::domain_error("SolutionField: parameter outside [0,1]^2");
        const BasisEval bx = eval_basis(space_.xi, xi, 0);
        const BasisEval by = eval_basis(space_.eta, eta, 0);
        cplx u{};
        for (int b = 0; b < space_.eta.order(); ++b) {
            cplx row{};
            for (int a = 0; a < space_.xi.order(); ++a)
                row += bx.values()[a] * coeffs_[space_.index(bx.first_index() + a, by.first_index() + b)];
            u += by.values()[b] * row;
        }
        return u;
    }

    [[nodiscard]] Point2 point(double xi, double eta) const { return eval_map(geometry_, xi, eta); }

private:
    TensorProductSpace space_;
    CoonsSurface geometry_;
    std::vector<cplx> coeffs_;
    double k_;
};

inline std::vector<cplx> eval_field(const SolutionField& sol, std::span<const std::array<double, 2>> params)
{
    std::vector<cplx> out;
    out.reserve(params.size());
    for (const auto& p : params)
        out.push_back(sol.value(p[0], p[1]));
    return out;
}

struct FieldSample {
    double xi, eta, x, y;
    cplx u;

    /// ((Re u)^2 + (Im u)^2)^{1/2}
    [[nodiscard]] double magnitude() const { return std::hypot(u.real(), u.imag()); }
};

/// Uniform parametric grid, xi fastest; (x,y) are the mapped sample locations.
inline std::vector<FieldSample> sample_grid(const SolutionField& sol, int res_xi, int res_eta)
{
    if (res_xi < 2 || res_eta < 2)
        throw std::invalid_argument("sample_grid: resolution must be >= 2");
    std::vector<FieldSample> out;
    out.reserve(static_cast<std::size_t>(res_xi * res_eta));
    for (int j = 0; j < res_eta; ++j) {
        const double eta = static_cast<double>(j) / (res_eta - 1);
        for (int i = 0; i < res_xi; ++i) {
            const double xi = static_cast<double>(i) / (res_xi - 1);
            const Point2 p = sol.point(xi, eta);
            out.push_back({xi, eta, p.x, p.y, sol.value(xi, eta)});
        }
    }
    return out;
}

/// Largest |F(1/2, eta).x| over `samples` uniformly spaced eta.
inline double axis_symmetry_defect(const CoonsSurface& F, int samples = 21)
{
    double d = 0.0;
    for (int s = 0; s < samples; ++s)
        d = std::max(d, std::abs(eval_map(F, 0.5, static_cast<double>(s) / (samples - 1)).x));
    return d;
}

/// xi with F(xi, eta).x = 0, by bisection (x increases along each eta line).
inline double axis_preimage(const CoonsSurface& F, double eta)
{
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eval_map(F, mid, eta).x < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// u^h along the symmetry axis x = 0, from the transducer face (eta = 0) to
// the arc (eta = 1). Symmetric maps use xi = 1/2; otherwise the preimage of
// x = 0 is located per eta.
inline std::vector<FieldSample> axis_profile(const SolutionField& sol, int samples, double symmetry_tol = 1e-10,
                                             bool* used_root_finding = nullptr)
{
    if (samples < 2)
        throw std::invalid_argument("axis_profile: need at least 2 samples");
    const bool symmetric = axis_symmetry_defect(sol.geometry()) <= symmetry_tol;
    if (used_root_finding)
        *used_root_finding = !symmetric;
    std::vector<FieldSample> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        const double eta = static_cast<double>(s) / (samples - 1);
        const double xi = symmetric ? 0.5 : axis_preimage(sol.geometry(), eta);
        const Point2 p = sol.point(xi, eta);
        out.push_back({xi, eta, p.x, p.y, sol.value(xi, eta)});
    }
    return out;
}

/// u^h along the diameter y = 0, x from -r to r.
inline std::vector<FieldSample> bottom_profile(const SolutionField& sol, int samples)
{
    if (samples < 2)
        throw std::invalid_argument("bottom_profile: need at least 2 samples");
    std::vector<FieldSample> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        const double xi = static_cast<double>(s) / (samples - 1);
        const Point2 p = sol.point(xi, 0.0);
        out.push_back({xi, 0.0, p.x, p.y, sol.value(xi, 0.0)});
    }
    return out;
}

struct ErrorNorms {
    double error = 0.0;   ///< ||u^h - u||_{L2}
    double exact = 0.0;   ///< ||u||_{L2}
    [[nodiscard]] double relative() const { return exact > 0.0 ? error / exact : error; }
};

/// L2 distance to an exact solution u(x,y), integrated over the physical domain.
template <typename Exact>
ErrorNorms l2_error(const SolutionField& sol, const Exact& exact, int points_per_span = 0)
{
    const auto& sp = sol.space();
    if (points_per_span <= 0)
        points_per_span = std::max(sp.xi.order(), sp.eta.order()) + 3;
    const QuadratureRule quad(points_per_span);
    double err2 = 0.0, ex2 = 0.0;
    for (int sy : sp.eta.nonempty_spans()) {
        const GaussRule gy = quad.on_interval(sp.eta[sy], sp.eta[sy + 1]);
        for (int sx : sp.xi.nonempty_spans()) {
            const GaussRule gx = quad.on_interval(sp.xi[sx], sp.xi[sx + 1]);
            for (int qy = 0; qy < gy.size(); ++qy)
                for (int qx = 0; qx < gx.size(); ++qx) {
                    const auto [p, jd] = sol.geometry().eval_with_jacobian(gx.points[qx], gy.points[qy]);
                    const double w = gx.weights[qx] * gy.weights[qy] * std::abs(jd.det);
                    const cplx ue = exact(p);
                    err2 += w * std::norm(sol.value(gx.points[qx], gy.points[qy]) - ue);
                    ex2 += w * std::norm(ue);
                }
        }
    }
    return {std::sqrt(err2), std::sqrt(ex2)};
}

} // namespace igarad
