// Galerkin discretization of the radiation problem on the parametric
// square: stiffness S, mass M and Robin boundary mass E, the split of
// degrees of freedom into free and Dirichlet sets, and the reduced
// complex system A = S - k^2 M + i k E.
//
// Every integral is pulled back to [0,1]^2 through the Coons map F; the
// inverse map is never evaluated. Dof q of the tensor space is the basis
// function B_i(xi) B_j(eta) with q = i + n*j (0-based).
#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "quadrature.hpp"
#include "sparse.hpp"
#include "spline.hpp"

namespace igarad {

/// Error raised when the geometry map folds over at a quadrature point.
class JacobianError : public std::runtime_error {
public:
    JacobianError(double xi, double eta, double det)
        : std::runtime_error(describe(xi, eta, det)), xi_(xi), eta_(eta), det_(det)
    {
    }
    [[nodiscard]] double xi() const noexcept { return xi_; }
    [[nodiscard]] double eta() const noexcept { return eta_; }
    [[nodiscard]] double det() const noexcept { return det_; }

private:
    static std::string describe(double xi, double eta, double det)
    {
        std::ostringstream msg;
        msg << "nonpositive Jacobian determinant " << det << " at (xi, eta) = (" << xi << ", " << eta << ")";
        return msg.str();
    }
    double xi_, eta_, det_;
};

/// Parametric location of the aperture ends on the bottom edge.
struct ApertureParams {
    double xi_minus;
    double xi_plus;
};

/// F(xi,0) is the diameter traversed uniformly from -r to r.
inline ApertureParams aperture_params(const DomainConfig& cfg)
{
    if (!(cfg.a > 0.0 && cfg.a < cfg.r))
        throw std::invalid_argument("aperture_params: require 0 < a < r");
    return {(cfg.r - cfg.a) / (2.0 * cfg.r), (cfg.r + cfg.a) / (2.0 * cfg.r)};
}

// Discrete tensor-product space for the radiation problem. Interior
// breakpoints of the geometry are inserted (once) so that no element
// straddles a kink of F; with `align_aperture` the knots xi_{a-}, xi_{a+}
// are inserted as well so that the Dirichlet/Neumann transition falls on
// element boundaries. Either insertion raises n above the requested count.
inline TensorProductSpace make_solution_space(int order_xi, int order_eta, int n, int m, const DomainConfig& cfg,
                                              const CoonsSurface& geometry, bool align_aperture)
{
    auto interior = [](const KnotVector& kv) {
        auto b = kv.breakpoints();
        return std::vector<double>(b.begin() + 1, b.end() - 1);
    };
    std::vector<double> extra_xi = interior(geometry.kv_xi());
    if (align_aperture) {
        const auto ap = aperture_params(cfg);
        extra_xi.push_back(ap.xi_minus);
        extra_xi.push_back(ap.xi_plus);
    }
    std::sort(extra_xi.begin(), extra_xi.end());
    return {insert_knots(make_uniform_open_knots(order_xi, n), extra_xi),
            insert_knots(make_uniform_open_knots(order_eta, m), interior(geometry.kv_eta()))};
}

/// Split of the flattened indices into free (I0) and Dirichlet (Ig) sets.
struct DofPartition {
    std::vector<int> free;
    std::vector<int> dirichlet;
    std::vector<int> position;   ///< global index -> position within its own set
    std::vector<char> is_dirichlet;

    [[nodiscard]] int n_free() const noexcept { return static_cast<int>(free.size()); }
    [[nodiscard]] int n_dirichlet() const noexcept { return static_cast<int>(dirichlet.size()); }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(position.size()); }
};

inline DofPartition make_partition(int N, const std::vector<int>& dirichlet)
{
    DofPartition part;
    part.position.assign(static_cast<std::size_t>(N), -1);
    part.is_dirichlet.assign(static_cast<std::size_t>(N), 0);
    for (int q : dirichlet)
        part.is_dirichlet[q] = 1;
    for (int q = 0; q < N; ++q) {
        auto& set = part.is_dirichlet[q] ? part.dirichlet : part.free;
        part.position[q] = static_cast<int>(set.size());
        set.push_back(q);
    }
    return part;
}

// Dirichlet dofs are the functions B_i(xi) B_0(eta) that do not vanish
// identically on the aperture [xi_{a-}, xi_{a+}], i.e. whose support
// (t_i, t_{i+k}) meets it. When neither end is a knot this is exactly
// i1-k+1 <= i <= i2 with t_{i1} <= xi_{a-} < t_{i1+1} and
// t_{i2} <= xi_{a+} < t_{i2+1}. When xi_{a+} is itself a knot, B_{i2} starts
// there and vanishes on the aperture, so it stays free.
inline DofPartition classify_dofs(const TensorProductSpace& space, const DomainConfig& cfg)
{
    const auto ap = aperture_params(cfg);
    const KnotVector& kx = space.xi;
    const int k = kx.order();
    std::vector<int> dir;
    for (int i = 0; i < space.n(); ++i)
        if (kx[i] < ap.xi_plus && kx[i + k] > ap.xi_minus)
            dir.push_back(space.index(i, 0));
    return make_partition(space.size(), dir);
}

/// Range of xi (or eta) indices whose support overlaps that of basis i on a nonempty span.
inline std::pair<int, int> overlap_range(const KnotVector& kv, int i)
{
    const int k = kv.order();
    const int n = kv.num_basis();
    int lo = i, hi = i;
    while (lo > 0 && kv[lo - 1 + k] > kv[i])
        --lo;
    while (hi + 1 < n && kv[hi + 1] < kv[i + k])
        ++hi;
    return {lo, hi};
}

/// Zero-valued CSR matrix with the coupling pattern of the tensor space.
inline SparseReal tensor_pattern(const TensorProductSpace& space)
{
    const int n = space.n(), m = space.m(), N = space.size();
    std::vector<std::pair<int, int>> rx(static_cast<std::size_t>(n)), ry(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i)
        rx[i] = overlap_range(space.xi, i);
    for (int j = 0; j < m; ++j)
        ry[j] = overlap_range(space.eta, j);
    std::vector<std::int64_t> offsets(static_cast<std::size_t>(N) + 1, 0);
    for (int q = 0; q < N; ++q) {
        const auto [i, j] = space.unflatten(q);
        offsets[q + 1] = offsets[q] + static_cast<std::int64_t>(rx[i].second - rx[i].first + 1)
                                          * (ry[j].second - ry[j].first + 1);
    }
    std::vector<int> cols(static_cast<std::size_t>(offsets.back()));
    std::size_t pos = 0;
    for (int q = 0; q < N; ++q) {
        const auto [i, j] = space.unflatten(q);
        for (int jj = ry[j].first; jj <= ry[j].second; ++jj)
            for (int ii = rx[i].first; ii <= rx[i].second; ++ii)
                cols[pos++] = space.index(ii, jj);
    }
    std::vector<double> vals(cols.size(), 0.0);
    return SparseReal(N, N, std::move(offsets), std::move(cols), std::move(vals));
}

/// Full N x N matrices over all tensor-product dofs.
struct GalerkinMatrices {
    SparseReal S;
    SparseReal M;
    SparseReal E;
    std::vector<std::string> warnings;
};

namespace detail {

/// Basis evaluations at the Gauss points of every nonempty span of one direction.
struct SpanTable {
    std::vector<int> spans;
    std::vector<GaussRule> rules;
    std::vector<std::vector<BasisEval>> evals;
};

inline SpanTable tabulate(const KnotVector& kv, const QuadratureRule& quad)
{
    SpanTable tab;
    tab.spans = kv.nonempty_spans();
    for (int s : tab.spans) {
        GaussRule g = quad.on_interval(kv[s], kv[s + 1]);
        std::vector<BasisEval> ev;
        for (double t : g.points)
            ev.push_back(eval_basis(kv, t, 1));
        tab.rules.push_back(std::move(g));
        tab.evals.push_back(std::move(ev));
    }
    return tab;
}

/// Adds a dense local block into pattern positions of a CSR matrix.
inline void scatter(SparseReal& A, std::span<const int> dofs, std::span<const double> local)
{
    const auto nloc = dofs.size();
    auto vals = A.values();
    for (std::size_t a = 0; a < nloc; ++a)
        for (std::size_t b = 0; b < nloc; ++b) {
            const double v = local[a * nloc + b];
            if (v == 0.0)
                continue;
            const auto p = A.find(dofs[a], dofs[b]);
            if (p < 0)
                throw std::logic_error("assemble: entry outside tensor pattern");
            vals[p] += v;
        }
}

// Corner (0..3 = (a,a),(b,a),(a,b),(b,b)) of the cell [xa,xb]x[ya,yb] at
// which det JF vanishes, or -1. The Coons map of the semicircle has two
// such points where tangent arcs meet; |grad psi|^2 det J behaves like
// 1/rho there, which tensor Gauss rules integrate poorly.
inline int degenerate_corner(const CoonsSurface& F, double xa, double xb, double ya, double yb)
{
    const std::array<std::array<double, 2>, 4> c{{{xa, ya}, {xb, ya}, {xa, yb}, {xb, yb}}};
    for (int i = 0; i < 4; ++i) {
        const JacobianData jd = F.eval_with_jacobian(c[i][0], c[i][1]).second;
        const double scale = norm(jd.d_xi()) * norm(jd.d_eta());
        if (std::abs(jd.det) <= 1e-10 * scale)
            return i;
    }
    return -1;
}

// Duffy rule on a cell with a singular corner V: the two triangles V-A-B
// opposite V are collapsed from [0,1]^2 by P = V + u (A + v (B - A) - V),
// whose Jacobian factor u cancels a 1/rho singularity at V.
// Returns (xi, eta, weight) triples.
inline std::vector<std::array<double, 3>> duffy_points(const QuadratureRule& rule, double xa, double xb, double ya,
                                                       double yb, int corner)
{
    const std::array<std::array<double, 2>, 4> c{{{xa, ya}, {xb, ya}, {xa, yb}, {xb, yb}}};
    const auto V = c[corner];
    const auto O = c[3 - corner]; // diagonal opposite
    const std::array<double, 2> P1{O[0], V[1]}, P2{V[0], O[1]};
    std::vector<std::array<double, 3>> out;
    const GaussRule g = rule.on_interval(0.0, 1.0);
    for (const auto& [A, B] : {std::pair{P1, O}, std::pair{O, P2}}) {
        const double area2 = std::abs((A[0] - V[0]) * (B[1] - A[1]) - (A[1] - V[1]) * (B[0] - A[0]));
        for (int iu = 0; iu < g.size(); ++iu)
            for (int iv = 0; iv < g.size(); ++iv) {
                const double u = g.points[iu], v = g.points[iv];
                const double x = V[0] + u * (A[0] + v * (B[0] - A[0]) - V[0]);
                const double y = V[1] + u * (A[1] + v * (B[1] - A[1]) - V[1]);
                out.push_back({x, y, g.weights[iu] * g.weights[iv] * u * area2});
            }
    }
    return out;
}

} // namespace detail

// Element-wise assembly over nonempty knot spans with tensor Gauss-Legendre
// quadrature. The Robin term integrates over the three arcs xi=0, eta=1 and
// xi=1 with the arc-length factor of the corresponding boundary curve.
inline GalerkinMatrices assemble(const TensorProductSpace& space, const CoonsSurface& geometry,
                                 const QuadratureRule& quad)
{
    GalerkinMatrices out;
    const int kx = space.xi.order(), ky = space.eta.order();
    const int max_order = std::max(kx, ky);
    const int recommended = max_order; // ceil((2*order - 1) / 2)
    if (quad.points_per_span() < recommended) {
        std::ostringstream msg;
        msg << "quadrature with " << quad.points_per_span() << " points per span under-integrates order "
            << max_order << " (recommended >= " << recommended << ")";
        out.warnings.push_back(msg.str());
    }

    out.S = tensor_pattern(space);
    out.M = out.S;
    out.E = out.S;

    const auto tx = detail::tabulate(space.xi, quad);
    const auto ty = detail::tabulate(space.eta, quad);
    const QuadratureRule duffy(quad.points_per_span() + max_order);
    const int nloc = kx * ky;
    std::vector<int> dofs(static_cast<std::size_t>(nloc));
    std::vector<double> Sloc(static_cast<std::size_t>(nloc * nloc)), Mloc(Sloc.size());
    std::vector<double> gx(static_cast<std::size_t>(nloc)), gy(gx.size()), val(gx.size());

    for (std::size_t ey = 0; ey < ty.spans.size(); ++ey) {
        for (std::size_t ex = 0; ex < tx.spans.size(); ++ex) {
            const int i0 = tx.spans[ex] - kx + 1, j0 = ty.spans[ey] - ky + 1;
            for (int b = 0; b < ky; ++b)
                for (int a = 0; a < kx; ++a)
                    dofs[a + kx * b] = space.index(i0 + a, j0 + b);
            std::fill(Sloc.begin(), Sloc.end(), 0.0);
            std::fill(Mloc.begin(), Mloc.end(), 0.0);

            auto accumulate = [&](double xi, double eta, double wq, const BasisEval& bx, const BasisEval& by) {
                const JacobianData jd = geometry.eval_with_jacobian(xi, eta).second;
                if (!(jd.det > 0.0))
                    throw JacobianError(xi, eta, jd.det);
                const double w = wq * jd.det;
                const double inv = 1.0 / jd.det;
                const double x_xi = jd.J[0][0], x_eta = jd.J[0][1];
                const double y_xi = jd.J[1][0], y_eta = jd.J[1][1];
                for (int b = 0; b < ky; ++b)
                    for (int a = 0; a < kx; ++a) {
                        const double d_xi = bx.derivative(1)[a] * by.values()[b];
                        const double d_eta = bx.values()[a] * by.derivative(1)[b];
                        const int l = a + kx * b;
                        gx[l] = (y_eta * d_xi - y_xi * d_eta) * inv;
                        gy[l] = (-x_eta * d_xi + x_xi * d_eta) * inv;
                        val[l] = bx.values()[a] * by.values()[b];
                    }
                for (int l1 = 0; l1 < nloc; ++l1)
                    for (int l2 = 0; l2 < nloc; ++l2) {
                        Sloc[l1 * nloc + l2] += w * (gx[l1] * gx[l2] + gy[l1] * gy[l2]);
                        Mloc[l1 * nloc + l2] += w * val[l1] * val[l2];
                    }
            };

            const double xa = space.xi[tx.spans[ex]], xb = space.xi[tx.spans[ex] + 1];
            const double ya = space.eta[ty.spans[ey]], yb = space.eta[ty.spans[ey] + 1];
            const int corner = detail::degenerate_corner(geometry, xa, xb, ya, yb);
            if (corner < 0) {
                for (int qy = 0; qy < ty.rules[ey].size(); ++qy)
                    for (int qx = 0; qx < tx.rules[ex].size(); ++qx)
                        accumulate(tx.rules[ex].points[qx], ty.rules[ey].points[qy],
                                   tx.rules[ex].weights[qx] * ty.rules[ey].weights[qy], tx.evals[ex][qx],
                                   ty.evals[ey][qy]);
            } else {
                for (const auto& p : detail::duffy_points(duffy, xa, xb, ya, yb, corner))
                    accumulate(p[0], p[1], p[2], eval_basis(space.xi, p[0], 1), eval_basis(space.eta, p[1], 1));
            }
            detail::scatter(out.S, dofs, Sloc);
            detail::scatter(out.M, dofs, Mloc);
        }
    }

    // Robin edges: the only nonzero xi-function at xi=0 is B_0, at xi=1 it is B_{n-1}
    auto edge = [&](const detail::SpanTable& tab, int k, auto&& dof_of, auto&& speed_at) {
        std::vector<int> edofs(static_cast<std::size_t>(k));
        std::vector<double> Eloc(static_cast<std::size_t>(k * k));
        for (std::size_t e = 0; e < tab.spans.size(); ++e) {
            const int first = tab.spans[e] - k + 1;
            for (int a = 0; a < k; ++a)
                edofs[a] = dof_of(first + a);
            std::fill(Eloc.begin(), Eloc.end(), 0.0);
            for (int q = 0; q < tab.rules[e].size(); ++q) {
                const double w = tab.rules[e].weights[q] * speed_at(tab.rules[e].points[q]);
                const auto v = tab.evals[e][q].values();
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b)
                        Eloc[a * k + b] += w * v[a] * v[b];
            }
            detail::scatter(out.E, edofs, Eloc);
        }
    };
    const int n = space.n(), m = space.m();
    edge(ty, ky, [&](int j) { return space.index(0, j); },
         [&](double eta) { return norm(geometry.eval_with_jacobian(0.0, eta).second.d_eta()); });
    edge(ty, ky, [&](int j) { return space.index(n - 1, j); },
         [&](double eta) { return norm(geometry.eval_with_jacobian(1.0, eta).second.d_eta()); });
    edge(tx, kx, [&](int i) { return space.index(i, m - 1); },
         [&](double xi) { return norm(geometry.eval_with_jacobian(xi, 1.0).second.d_xi()); });
    return out;
}

/// Reduced linear system over the free dofs plus the Dirichlet coupling blocks.
struct SystemMatrices {
    SparseReal S, M, E;       ///< free x free
    SparseReal S_g, M_g, E_g; ///< free x Dirichlet
    SparseComplex A;          ///< S - k^2 M + i k E
    std::vector<cplx> b;
    std::vector<cplx> dirichlet_values; ///< coefficient of each Dirichlet dof
    double k = 0.0;
};

// Restricts the Galerkin matrices to the free dofs, fixes the Dirichlet
// coefficients and moves their coupling to the right-hand side:
//
//     sum_{q in I0} a_pq alpha_q = - sum_{q in Ig} a_pq alpha_q,   p in I0.
inline SystemMatrices build_system(const GalerkinMatrices& G, const DofPartition& part, double k,
                                   std::span<const cplx> dirichlet_values)
{
    if (part.n_dirichlet() == 0)
        throw std::invalid_argument("build_system: no Dirichlet dofs; the aperture source is missing");
    if (static_cast<int>(dirichlet_values.size()) != part.n_dirichlet())
        throw std::invalid_argument("build_system: one Dirichlet value per Dirichlet dof required");
    SystemMatrices sys;
    sys.k = k;
    sys.S = G.S.extract(part.free, part.free);
    sys.M = G.M.extract(part.free, part.free);
    sys.E = G.E.extract(part.free, part.free);
    sys.S_g = G.S.extract(part.free, part.dirichlet);
    sys.M_g = G.M.extract(part.free, part.dirichlet);
    sys.E_g = G.E.extract(part.free, part.dirichlet);
    const cplx ik{0.0, k};
    sys.A = linear_combination(1.0, sys.S, -k * k, sys.M, ik, sys.E);
    const SparseComplex A_g = linear_combination(1.0, sys.S_g, -k * k, sys.M_g, ik, sys.E_g);
    sys.dirichlet_values.assign(dirichlet_values.begin(), dirichlet_values.end());
    sys.b = A_g * sys.dirichlet_values;
    for (auto& v : sys.b)
        v = -v;
    return sys;
}

/// Constant Dirichlet amplitude C on every Dirichlet dof.
inline SystemMatrices build_system(const GalerkinMatrices& G, const DofPartition& part, double k, cplx C)
{
    const std::vector<cplx> g(static_cast<std::size_t>(part.n_dirichlet()), C);
    return build_system(G, part, k, g);
}

/// Full coefficient vector from the free solution and the fixed Dirichlet values.
inline std::vector<cplx> expand_solution(const DofPartition& part, std::span<const cplx> free_values,
                                         std::span<const cplx> dirichlet_values)
{
    if (static_cast<int>(free_values.size()) != part.n_free()
        || static_cast<int>(dirichlet_values.size()) != part.n_dirichlet())
        throw std::invalid_argument("expand_solution: size mismatch");
    std::vector<cplx> alpha(static_cast<std::size_t>(part.size()));
    for (int q = 0; q < part.size(); ++q)
        alpha[q] = part.is_dirichlet[q] ? dirichlet_values[part.position[q]] : free_values[part.position[q]];
    return alpha;
}

/// Fraction of nonzero entries, nnz / (rows * cols).
template <typename T>
double density(const CsrMatrix<T>& A)
{
    std::size_t nz = 0;
    for (const auto& v : A.values())
        nz += (v != T(0));
    return static_cast<double>(nz) / (static_cast<double>(A.rows()) * A.cols());
}

} // namespace igarad
