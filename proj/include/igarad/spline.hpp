// Univariate B-spline machinery: clamped knot vectors, Cox-de Boor
// evaluation with derivatives, degree elevation and knot insertion.
//
// Index convention: every basis function, control point and knot is indexed
// from 0. A clamped knot vector of order k (degree k-1) with n basis
// functions stores n + k knots, the first k equal to 0 and the last k equal
// to 1. Hence
//
//     num_basis() == knots().size() - order().
//
// Writing the same vector as (k-1) repeated end knots around the full list
// of breakpoints 0 = b_1 < ... < b_{n-k+2} = 1 gives (k-1) + (n-k+2) + (k-1)
// = n + k entries, so both descriptions agree.
//
// Spans are identified by the index s of their left knot, t_s <= t < t_{s+1},
// with k-1 <= s <= n-1. The nonzero basis functions on span s are
// s-k+1, ..., s. The parameter t = 1 belongs to the last nonempty span
// (closed on the right), so the last basis function equals 1 there.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace igarad {

/// Nondecreasing clamped knot vector on [0,1].
class KnotVector {
public:
    KnotVector() = default;

    KnotVector(int order, std::vector<double> knots) : order_(order), knots_(std::move(knots))
    {
        if (order_ < 2)
            throw std::invalid_argument("KnotVector: order must be >= 2");
        const auto len = static_cast<int>(knots_.size());
        if (len < 2 * order_)
            throw std::invalid_argument("KnotVector: need at least 2*order knots");
        for (int i = 1; i < len; ++i)
            if (knots_[i] < knots_[i - 1])
                throw std::invalid_argument("KnotVector: knots must be nondecreasing");
        for (int i = 0; i < order_; ++i)
            if (knots_[i] != 0.0 || knots_[len - 1 - i] != 1.0)
                throw std::invalid_argument("KnotVector: knots must be clamped on [0,1]");
        for (int i = order_; i < len - order_; ++i) {
            if (knots_[i] <= 0.0 || knots_[i] >= 1.0)
                throw std::invalid_argument("KnotVector: interior knots must lie in (0,1)");
            if (multiplicity(knots_[i]) > order_ - 1)
                throw std::invalid_argument("KnotVector: interior knot multiplicity exceeds degree");
        }
    }

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] int degree() const noexcept { return order_ - 1; }
    [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
    [[nodiscard]] double operator[](int i) const { return knots_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(knots_.size()); }
    [[nodiscard]] int num_basis() const noexcept { return size() - order_; }

    /// Distinct knot values, 0 and 1 included.
    [[nodiscard]] std::vector<double> breakpoints() const
    {
        std::vector<double> b;
        for (double t : knots_)
            if (b.empty() || t > b.back())
                b.push_back(t);
        return b;
    }

    [[nodiscard]] int num_elements() const { return static_cast<int>(breakpoints().size()) - 1; }

    [[nodiscard]] int multiplicity(double t) const
    {
        return static_cast<int>(std::count(knots_.begin(), knots_.end(), t));
    }

    /// Left-knot indices of the nonempty spans, in increasing order.
    [[nodiscard]] std::vector<int> nonempty_spans() const
    {
        std::vector<int> s;
        for (int i = order_ - 1; i < num_basis(); ++i)
            if (knots_[i] < knots_[i + 1])
                s.push_back(i);
        return s;
    }

    /// Greville abscissae, one per basis function.
    [[nodiscard]] std::vector<double> greville() const
    {
        std::vector<double> g(static_cast<std::size_t>(num_basis()));
        for (int i = 0; i < num_basis(); ++i) {
            double sum = 0.0;
            for (int j = 1; j < order_; ++j)
                sum += knots_[i + j];
            g[i] = sum / degree();
        }
        return g;
    }

    friend bool operator==(const KnotVector&, const KnotVector&) = default;

private:
    int order_ = 0;
    std::vector<double> knots_;
};

/// Clamped knot vector with uniformly spaced interior breakpoints.
inline KnotVector make_uniform_open_knots(int order, int num_basis)
{
    if (order < 2)
        throw std::invalid_argument("make_uniform_open_knots: order must be >= 2");
    if (num_basis < order)
        throw std::invalid_argument("make_uniform_open_knots: num_basis must be >= order");
    const int num_elements = num_basis - order + 1;
    std::vector<double> t(static_cast<std::size_t>(num_basis + order), 0.0);
    for (int i = 0; i < num_elements - 1; ++i)
        t[order + i] = static_cast<double>(i + 1) / num_elements;
    std::fill(t.end() - order, t.end(), 1.0);
    return KnotVector(order, std::move(t));
}

/// Index s of the span with t_s <= t < t_{s+1}; t = 1 maps to the last nonempty span.
inline int find_span(const KnotVector& kv, double t)
{
    if (!(t >= 0.0 && t <= 1.0)) {
        std::ostringstream msg;
        msg << "find_span: parameter " << t << " outside [0,1]";
        throw std::domain_error(msg.str());
    }
    const int n = kv.num_basis();
    if (t >= kv[n])
        return n - 1;
    const auto knots = kv.knots();
    // first knot strictly greater than t, searched over t_{k-1} .. t_n
    const auto first = knots.begin() + (kv.order() - 1);
    const auto last = knots.begin() + n + 1;
    const auto it = std::upper_bound(first, last, t);
    return static_cast<int>(it - knots.begin()) - 1;
}

/// Nonzero basis values and derivatives at one parameter.
struct BasisEval {
    int span = 0;
    int order = 0;
    int num_derivs = 0;
    std::vector<double> table; ///< (num_derivs+1) rows of `order` entries

    /// Global index of the first nonzero basis function.
    [[nodiscard]] int first_index() const noexcept { return span - order + 1; }

    [[nodiscard]] std::span<const double> derivative(int d) const
    {
        return {table.data() + static_cast<std::size_t>(d * order), static_cast<std::size_t>(order)};
    }
    [[nodiscard]] std::span<const double> values() const { return derivative(0); }
};

// Cox-de Boor evaluation of the `order` nonzero basis functions at t and
// their derivatives up to `num_derivs`. Derivatives of order >= `order`
// are identically zero for piecewise polynomials of this degree and are
// returned as zeros.
inline BasisEval eval_basis(const KnotVector& kv, double t, int num_derivs = 0)
{
    if (num_derivs < 0)
        throw std::invalid_argument("eval_basis: num_derivs must be >= 0");
    const int span = find_span(kv, t);
    const int p = kv.degree();
    const int k = kv.order();

    BasisEval out;
    out.span = span;
    out.order = k;
    out.num_derivs = num_derivs;
    out.table.assign(static_cast<std::size_t>((num_derivs + 1) * k), 0.0);

    // ndu holds basis values (upper triangle) and knot differences (lower)
    std::vector<double> ndu(static_cast<std::size_t>(k * k));
    auto at = [k](std::vector<double>& v, int r, int c) -> double& { return v[static_cast<std::size_t>(r * k + c)]; };
    std::vector<double> left(static_cast<std::size_t>(k)), right(static_cast<std::size_t>(k));
    at(ndu, 0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - kv[span + 1 - j];
        right[j] = kv[span + j] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            at(ndu, j, r) = right[r + 1] + left[j - r];
            const double tmp = at(ndu, r, j - 1) / at(ndu, j, r);
            at(ndu, r, j) = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        at(ndu, j, j) = saved;
    }
    for (int j = 0; j <= p; ++j)
        out.table[j] = at(ndu, j, p);

    const int nd = std::min(num_derivs, p);
    std::vector<double> a(static_cast<std::size_t>(2 * k));
    auto arow = [&](int s, int c) -> double& { return a[static_cast<std::size_t>(s * k + c)]; };
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        arow(0, 0) = 1.0;
        for (int d = 1; d <= nd; ++d) {
            double value = 0.0;
            const int rk = r - d, pk = p - d;
            if (r >= d) {
                arow(s2, 0) = arow(s1, 0) / at(ndu, pk + 1, rk);
                value = arow(s2, 0) * at(ndu, rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? d - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                arow(s2, j) = (arow(s1, j) - arow(s1, j - 1)) / at(ndu, pk + 1, rk + j);
                value += arow(s2, j) * at(ndu, rk + j, pk);
            }
            if (r <= pk) {
                arow(s2, d) = -arow(s1, d - 1) / at(ndu, pk + 1, r);
                value += arow(s2, d) * at(ndu, r, pk);
            }
            out.table[static_cast<std::size_t>(d * k + r)] = value;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int d = 1; d <= nd; ++d) {
        for (int j = 0; j <= p; ++j)
            out.table[static_cast<std::size_t>(d * k + j)] *= factor;
        factor *= (p - d);
    }
    return out;
}

template <std::size_t D>
using CtrlPoint = std::array<double, D>;

/// Point of a (polynomial) spline curve and its derivatives up to `num_derivs`.
template <std::size_t D>
std::vector<CtrlPoint<D>> eval_curve(std::span<const CtrlPoint<D>> ctrl, const KnotVector& kv, double t,
                                     int num_derivs = 0)
{
    if (static_cast<int>(ctrl.size()) != kv.num_basis())
        throw std::invalid_argument("eval_curve: control point count does not match knot vector");
    const BasisEval be = eval_basis(kv, t, num_derivs);
    std::vector<CtrlPoint<D>> out(static_cast<std::size_t>(num_derivs + 1), CtrlPoint<D>{});
    for (int d = 0; d <= num_derivs; ++d) {
        const auto row = be.derivative(d);
        for (int j = 0; j < kv.order(); ++j)
            for (std::size_t c = 0; c < D; ++c)
                out[d][c] += row[j] * ctrl[be.first_index() + j][c];
    }
    return out;
}

/// Spline curve with control points in R^D (homogeneous coordinates for rational curves).
template <std::size_t D>
struct SplineCurve {
    std::vector<CtrlPoint<D>> ctrl;
    KnotVector knots;
};

// Raises the order of a spline curve by one without changing its shape.
//
// Every distinct knot gains one multiplicity. The elevated curve lies in the
// enlarged space, so interpolating it at the Greville abscissae of the new
// space recovers its coefficients exactly (Schoenberg-Whitney holds there).
// Apply to homogeneous control points to elevate a rational curve.
template <std::size_t D>
SplineCurve<D> degree_elevate_curve(std::span<const CtrlPoint<D>> ctrl, const KnotVector& kv)
{
    if (static_cast<int>(ctrl.size()) != kv.num_basis())
        throw std::invalid_argument("degree_elevate_curve: control point count does not match knot vector");
    std::vector<double> t;
    for (double b : kv.breakpoints()) {
        const int mult = kv.multiplicity(b) + 1;
        t.insert(t.end(), static_cast<std::size_t>(mult), b);
    }
    KnotVector elevated(kv.order() + 1, std::move(t));
    const int n = elevated.num_basis();
    const auto g = elevated.greville();

    Eigen::MatrixXd colloc = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd rhs(n, static_cast<Eigen::Index>(D));
    for (int i = 0; i < n; ++i) {
        const BasisEval be = eval_basis(elevated, g[i], 0);
        for (int j = 0; j < elevated.order(); ++j)
            colloc(i, be.first_index() + j) = be.values()[j];
        const auto pt = eval_curve<D>(ctrl, kv, g[i], 0)[0];
        for (std::size_t c = 0; c < D; ++c)
            rhs(i, static_cast<Eigen::Index>(c)) = pt[c];
    }
    const Eigen::MatrixXd sol = colloc.partialPivLu().solve(rhs);
    SplineCurve<D> out{std::vector<CtrlPoint<D>>(static_cast<std::size_t>(n)), std::move(elevated)};
    for (int i = 0; i < n; ++i)
        for (std::size_t c = 0; c < D; ++c)
            out.ctrl[i][c] = sol(i, static_cast<Eigen::Index>(c));
    return out;
}

// Boehm knot insertion of every value in `new_knots` (repeats allowed).
// Interior multiplicities may not exceed the degree and the end knots 0 and
// 1 cannot be inserted.
template <std::size_t D>
SplineCurve<D> refine_knots_curve(std::span<const CtrlPoint<D>> ctrl, const KnotVector& kv,
                                  std::span<const double> new_knots)
{
    if (static_cast<int>(ctrl.size()) != kv.num_basis())
        throw std::invalid_argument("refine_knots_curve: control point count does not match knot vector");
    std::vector<CtrlPoint<D>> pts(ctrl.begin(), ctrl.end());
    std::vector<double> t(kv.knots().begin(), kv.knots().end());
    const int k = kv.order();
    const int p = k - 1;

    std::vector<double> sorted(new_knots.begin(), new_knots.end());
    std::sort(sorted.begin(), sorted.end());
    for (double u : sorted) {
        if (!(u > 0.0 && u < 1.0)) {
            std::ostringstream msg;
            msg << "refine_knots_curve: knot " << u << " is not interior to (0,1)";
            throw std::invalid_argument(msg.str());
        }
        if (std::count(t.begin(), t.end(), u) + 1 > p) {
            std::ostringstream msg;
            msg << "refine_knots_curve: inserting " << u << " exceeds multiplicity " << p;
            throw std::invalid_argument(msg.str());
        }
        // span s with t_s <= u < t_{s+1}
        const int s = static_cast<int>(std::upper_bound(t.begin(), t.end(), u) - t.begin()) - 1;
        std::vector<CtrlPoint<D>> q(pts.size() + 1);
        for (int i = 0; i <= s - p; ++i)
            q[i] = pts[i];
        for (int i = s - p + 1; i <= s; ++i) {
            const double alpha = (u - t[i]) / (t[i + p] - t[i]);
            for (std::size_t c = 0; c < D; ++c)
                q[i][c] = alpha * pts[i][c] + (1.0 - alpha) * pts[i - 1][c];
        }
        for (int i = s; i < static_cast<int>(pts.size()); ++i)
            q[i + 1] = pts[i];
        t.insert(t.begin() + s + 1, u);
        pts = std::move(q);
    }
    return SplineCurve<D>{std::move(pts), KnotVector(k, std::move(t))};
}

/// Clamped knot vector `kv` with the values in `extra` inserted once each,
/// skipping values already present as knots (within `tol`).
inline KnotVector insert_knots(const KnotVector& kv, std::span<const double> extra, double tol = 1e-12)
{
    std::vector<double> t(kv.knots().begin(), kv.knots().end());
    for (double u : extra) {
        const bool present = std::any_of(t.begin(), t.end(), [&](double v) { return std::abs(v - u) <= tol; });
        if (!present && u > 0.0 && u < 1.0)
            t.insert(std::upper_bound(t.begin(), t.end(), u), u);
    }
    return KnotVector(kv.order(), std::move(t));
}

/// Tensor product of two univariate spaces; flattened index q = i + n*j.
struct TensorProductSpace {
    KnotVector xi;
    KnotVector eta;

    [[nodiscard]] int n() const noexcept { return xi.num_basis(); }
    [[nodiscard]] int m() const noexcept { return eta.num_basis(); }
    [[nodiscard]] int size() const noexcept { return n() * m(); }
    [[nodiscard]] int index(int i, int j) const noexcept { return i + n() * j; }
    [[nodiscard]] std::pair<int, int> unflatten(int q) const noexcept { return {q % n(), q / n()}; }
};

} // namespace igarad
