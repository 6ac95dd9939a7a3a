// Exact rational boundary curves of the semicircular domain, the
// bilinearly blended Coons patch F(xi,eta) and its Jacobian quality.
//
// Orientation: F(0,0) = (-r,0), F(1,0) = (r,0). xi runs left to right along
// the diameter (bottom curve) and along the top arc; eta runs from the
// diameter up to the arc. The four boundary pieces are
//
//     F(xi,0) = c_b   diameter y = 0 (Dirichlet aperture + rigid baffle)
//     F(xi,1) = c_t   top arc, polar angles pi-theta .. theta
//     F(0,eta) = c_l  left arc, polar angles pi .. pi-theta
//     F(1,eta) = c_r  right arc, polar angles 0 .. theta
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "spline.hpp"

namespace igarad {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

/// Physical setup of the radiation problem (SI units).
struct DomainConfig {
    double a = 0.01;          ///< transducer half-aperture [m]
    double r = 0.133;         ///< semicircle radius [m]
    double theta = std::numbers::pi / 4; ///< polar angle subtended by c_l and c_r
    std::complex<double> C{1.0, 0.0}; ///< Dirichlet amplitude on the aperture
    double c_sound = 1500.0;  ///< [m/s]
    double f = 1.0e6;         ///< [Hz]

    [[nodiscard]] double wavelength() const { return c_sound / f; }
    [[nodiscard]] double wavenumber() const { return 2.0 * std::numbers::pi * f / c_sound; }

    void validate() const
    {
        if (!(a > 0.0 && a < r))
            throw std::invalid_argument("DomainConfig: require 0 < a < r");
        if (!(theta > 0.0 && theta < std::numbers::pi / 2))
            throw std::invalid_argument("DomainConfig: require 0 < theta < pi/2");
        if (!(c_sound > 0.0 && f > 0.0))
            throw std::invalid_argument("DomainConfig: sound speed and frequency must be positive");
    }
};

/// Natural focus a^2 / lambda.
inline double near_field_length(const DomainConfig& cfg) { return cfg.a * cfg.a / cfg.wavelength(); }

/// Quadratic (or higher) NURBS curve in the plane.
class RationalCurve {
public:
    RationalCurve() = default;
    RationalCurve(std::vector<Point2> ctrl, std::vector<double> weights, KnotVector kv)
        : ctrl_(std::move(ctrl)), weights_(std::move(weights)), kv_(std::move(kv))
    {
        if (ctrl_.size() != weights_.size() || static_cast<int>(ctrl_.size()) != kv_.num_basis())
            throw std::invalid_argument("RationalCurve: inconsistent sizes");
        for (double w : weights_)
            if (!(w > 0.0))
                throw std::invalid_argument("RationalCurve: weights must be positive");
    }

    static RationalCurve from_homogeneous(const SplineCurve<3>& h)
    {
        std::vector<Point2> p;
        std::vector<double> w;
        for (const auto& c : h.ctrl) {
            p.push_back({c[0] / c[2], c[1] / c[2]});
            w.push_back(c[2]);
        }
        return {std::move(p), std::move(w), h.knots};
    }

    [[nodiscard]] const std::vector<Point2>& ctrl() const noexcept { return ctrl_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] const KnotVector& knots() const noexcept { return kv_; }

    [[nodiscard]] std::vector<CtrlPoint<3>> homogeneous() const
    {
        std::vector<CtrlPoint<3>> h(ctrl_.size());
        for (std::size_t i = 0; i < ctrl_.size(); ++i)
            h[i] = {weights_[i] * ctrl_[i].x, weights_[i] * ctrl_[i].y, weights_[i]};
        return h;
    }

    [[nodiscard]] Point2 eval(double t) const { return eval_with_derivative(t)[0]; }
    [[nodiscard]] Point2 derivative(double t) const { return eval_with_derivative(t)[1]; }

    /// Point and first derivative via the quotient rule.
    [[nodiscard]] std::array<Point2, 2> eval_with_derivative(double t) const
    {
        const auto h = homogeneous();
        const auto d = eval_curve<3>(h, kv_, t, 1);
        const double w = d[0][2], dw = d[1][2];
        const Point2 pt{d[0][0] / w, d[0][1] / w};
        const Point2 dp{(d[1][0] - dw * pt.x) / w, (d[1][1] - dw * pt.y) / w};
        return {pt, dp};
    }

    /// Same point set traversed from t=1 to t=0.
    [[nodiscard]] RationalCurve reversed() const
    {
        std::vector<Point2> p(ctrl_.rbegin(), ctrl_.rend());
        std::vector<double> w(weights_.rbegin(), weights_.rend());
        std::vector<double> t;
        for (auto it = kv_.knots().rbegin(); it != kv_.knots().rend(); ++it)
            t.push_back(1.0 - *it);
        return {std::move(p), std::move(w), KnotVector(kv_.order(), std::move(t))};
    }

    [[nodiscard]] RationalCurve elevated() const
    {
        const auto h = homogeneous();
        return from_homogeneous(degree_elevate_curve<3>(h, kv_));
    }

    [[nodiscard]] RationalCurve refined(std::span<const double> new_knots) const
    {
        const auto h = homogeneous();
        return from_homogeneous(refine_knots_curve<3>(h, kv_, new_knots));
    }

private:
    std::vector<Point2> ctrl_;
    std::vector<double> weights_;
    KnotVector kv_;
};

/// Straight segment as a linear (order 2) curve with unit weights.
inline RationalCurve make_segment(Point2 from, Point2 to)
{
    return {{from, to}, {1.0, 1.0}, KnotVector(2, {0.0, 0.0, 1.0, 1.0})};
}

// Exact rational quadratic circular arc from angle_start to angle_end
// (counterclockwise). Sweeps above pi/2 are split into equal pieces joined at
// doubled interior knots; each piece uses the conic weight cos(half-sweep).
inline RationalCurve make_arc(Point2 center, double radius, double angle_start, double angle_end)
{
    const double sweep = angle_end - angle_start;
    if (!(sweep > 0.0 && sweep < 2.0 * std::numbers::pi))
        throw std::invalid_argument("make_arc: sweep must lie in (0, 2*pi)");
    if (!(radius > 0.0))
        throw std::invalid_argument("make_arc: radius must be positive");
    const int pieces = std::max(1, static_cast<int>(std::ceil(sweep / (std::numbers::pi / 2) - 1e-12)));
    const double dtheta = sweep / pieces;
    const double w_mid = std::cos(dtheta / 2);

    std::vector<Point2> ctrl;
    std::vector<double> w;
    std::vector<double> t{0.0, 0.0, 0.0};
    auto on_circle = [&](double ang) { return Point2{center.x + radius * std::cos(ang), center.y + radius * std::sin(ang)}; };
    ctrl.push_back(on_circle(angle_start));
    w.push_back(1.0);
    for (int s = 0; s < pieces; ++s) {
        const double a0 = angle_start + s * dtheta;
        const double am = a0 + dtheta / 2;
        // tangent intersection lies at distance radius / cos(dtheta/2) along the bisector
        const double dist = radius / w_mid;
        ctrl.push_back({center.x + dist * std::cos(am), center.y + dist * std::sin(am)});
        w.push_back(w_mid);
        ctrl.push_back(on_circle(a0 + dtheta));
        w.push_back(1.0);
        if (s + 1 < pieces) {
            const double u = static_cast<double>(s + 1) / pieces;
            t.push_back(u);
            t.push_back(u);
        }
    }
    t.insert(t.end(), {1.0, 1.0, 1.0});
    return {std::move(ctrl), std::move(w), KnotVector(3, std::move(t))};
}

struct CoonsBoundary {
    RationalCurve bottom; ///< c_b(xi)
    RationalCurve top;    ///< c_t(xi)
    RationalCurve left;   ///< c_l(eta)
    RationalCurve right;  ///< c_r(eta)
};

/// The four boundary curves of the semicircle, compatible for a Coons patch.
inline CoonsBoundary make_semicircle_boundary(const DomainConfig& cfg)
{
    if (!(cfg.theta > 0.0 && cfg.theta < std::numbers::pi / 2))
        throw std::invalid_argument("make_semicircle_boundary: theta must lie in (0, pi/2)");
    const double r = cfg.r;
    const double th = cfg.theta;
    const Point2 o{0.0, 0.0};

    CoonsBoundary b;
    b.right = make_arc(o, r, 0.0, th);
    b.left = make_arc(o, r, std::numbers::pi - th, std::numbers::pi).reversed();
    b.top = make_arc(o, r, th, std::numbers::pi - th).reversed();

    RationalCurve bottom = make_segment({-r, 0.0}, {r, 0.0}).elevated();
    std::vector<double> extra;
    const auto target = b.top.knots().knots();
    // insert what the top knot vector has beyond the elevated segment's
    std::vector<double> have(bottom.knots().knots().begin(), bottom.knots().knots().end());
    for (double u : target) {
        auto it = std::find(have.begin(), have.end(), u);
        if (it != have.end())
            have.erase(it);
        else
            extra.push_back(u);
    }
    if (!extra.empty())
        bottom = bottom.refined(extra);
    b.bottom = std::move(bottom);
    if (!(b.bottom.knots() == b.top.knots()) || !(b.left.knots() == b.right.knots()))
        throw std::logic_error("make_semicircle_boundary: incompatible knot vectors after refinement");
    return b;
}

/// Jacobian of F at one parameter; columns are F_xi and F_eta.
struct JacobianData {
    std::array<std::array<double, 2>, 2> J{}; ///< J[row][col]: rows (x,y), cols (xi,eta)
    double det = 0.0;
    double mean_ratio = 0.0;

    [[nodiscard]] Point2 d_xi() const { return {J[0][0], J[1][0]}; }
    [[nodiscard]] Point2 d_eta() const { return {J[0][1], J[1][1]}; }
};

inline JacobianData make_jacobian(Point2 d_xi, Point2 d_eta)
{
    JacobianData jd;
    jd.J = {{{d_xi.x, d_eta.x}, {d_xi.y, d_eta.y}}};
    jd.det = d_xi.x * d_eta.y - d_eta.x * d_xi.y;
    const double denom = d_xi.x * d_xi.x + d_xi.y * d_xi.y + d_eta.x * d_eta.x + d_eta.y * d_eta.y;
    jd.mean_ratio = denom > 0.0 ? 2.0 * jd.det / denom : 0.0;
    return jd;
}

/// Rational tensor-product surface on [0,1]^2; control net indexed i + n_F*j.
class CoonsSurface {
public:
    CoonsSurface() = default;
    CoonsSurface(KnotVector kv_xi, KnotVector kv_eta, std::vector<Point2> ctrl, std::vector<double> weights)
        : kv_xi_(std::move(kv_xi)), kv_eta_(std::move(kv_eta)), ctrl_(std::move(ctrl)), weights_(std::move(weights))
    {
        const auto count = static_cast<std::size_t>(kv_xi_.num_basis() * kv_eta_.num_basis());
        if (ctrl_.size() != count || weights_.size() != count)
            throw std::invalid_argument("CoonsSurface: control net size mismatch");
        for (double w : weights_)
            if (!(w > 0.0))
                throw std::invalid_argument("CoonsSurface: weights must be positive");
    }

    [[nodiscard]] const KnotVector& kv_xi() const noexcept { return kv_xi_; }
    [[nodiscard]] const KnotVector& kv_eta() const noexcept { return kv_eta_; }
    [[nodiscard]] int n_ctrl_xi() const { return kv_xi_.num_basis(); }
    [[nodiscard]] int n_ctrl_eta() const { return kv_eta_.num_basis(); }
    [[nodiscard]] const std::vector<Point2>& ctrl() const noexcept { return ctrl_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] Point2 ctrl(int i, int j) const { return ctrl_[static_cast<std::size_t>(i + n_ctrl_xi() * j)]; }
    [[nodiscard]] double weight(int i, int j) const { return weights_[static_cast<std::size_t>(i + n_ctrl_xi() * j)]; }

    /// Point and first partials in one pass.
    [[nodiscard]] std::pair<Point2, JacobianData> eval_with_jacobian(double xi, double eta) const
    {
        check_domain(xi, eta);
        const BasisEval bx = eval_basis(kv_xi_, xi, 1);
        const BasisEval by = eval_basis(kv_eta_, eta, 1);
        // homogeneous sums: value, d/dxi, d/deta for (wx, wy, w)
        std::array<double, 3> h{}, hx{}, hy{};
        for (int b = 0; b < kv_eta_.order(); ++b) {
            const int j = by.first_index() + b;
            for (int a = 0; a < kv_xi_.order(); ++a) {
                const int i = bx.first_index() + a;
                const double w = weight(i, j);
                const Point2 p = ctrl(i, j);
                const std::array<double, 3> hp{w * p.x, w * p.y, w};
                const double nn = bx.values()[a] * by.values()[b];
                const double dx = bx.derivative(1)[a] * by.values()[b];
                const double dy = bx.values()[a] * by.derivative(1)[b];
                for (int c = 0; c < 3; ++c) {
                    h[c] += nn * hp[c];
                    hx[c] += dx * hp[c];
                    hy[c] += dy * hp[c];
                }
            }
        }
        const Point2 pt{h[0] / h[2], h[1] / h[2]};
        const Point2 fxi{(hx[0] - hx[2] * pt.x) / h[2], (hx[1] - hx[2] * pt.y) / h[2]};
        const Point2 feta{(hy[0] - hy[2] * pt.x) / h[2], (hy[1] - hy[2] * pt.y) / h[2]};
        return {pt, make_jacobian(fxi, feta)};
    }

private:
    static void check_domain(double xi, double eta)
    {
        if (!(xi >= 0.0 && xi <= 1.0 && eta >= 0.0 && eta <= 1.0)) {
            std::ostringstream msg;
            msg << "CoonsSurface: parameter (" << xi << ", " << eta << ") outside [0,1]^2";
            throw std::domain_error(msg.str());
        }
    }

    KnotVector kv_xi_;
    KnotVector kv_eta_;
    std::vector<Point2> ctrl_;
    std::vector<double> weights_;
};

inline Point2 eval_map(const CoonsSurface& F, double xi, double eta) { return F.eval_with_jacobian(xi, eta).first; }

inline JacobianData eval_jacobian(const CoonsSurface& F, double xi, double eta)
{
    return F.eval_with_jacobian(xi, eta).second;
}

// Bilinearly blended Coons patch of four rational curves. The blend acts on
// homogeneous control points: ruled surface between bottom and top, plus
// ruled surface between left and right, minus the bilinear corner patch.
// The linear blending functions are expressed in each direction's spline
// basis through the Greville abscissae, which reproduce linear functions.
inline CoonsSurface coons_patch(const RationalCurve& bottom, const RationalCurve& top, const RationalCurve& left,
                                const RationalCurve& right, double corner_tol = 1e-10)
{
    if (!(bottom.knots() == top.knots()))
        throw std::invalid_argument("coons_patch: bottom and top curves need the same knot vector");
    if (!(left.knots() == right.knots()))
        throw std::invalid_argument("coons_patch: left and right curves need the same knot vector");

    auto mismatch = [&](Point2 p, Point2 q, const char* name) {
        if (norm(p - q) > corner_tol) {
            std::ostringstream msg;
            msg << "coons_patch: corner mismatch at " << name << " (" << norm(p - q) << ")";
            throw std::invalid_argument(msg.str());
        }
    };
    mismatch(bottom.ctrl().front(), left.ctrl().front(), "(0,0)");
    mismatch(bottom.ctrl().back(), right.ctrl().front(), "(1,0)");
    mismatch(top.ctrl().front(), left.ctrl().back(), "(0,1)");
    mismatch(top.ctrl().back(), right.ctrl().back(), "(1,1)");

    const auto hb = bottom.homogeneous();
    const auto ht = top.homogeneous();
    const auto hl = left.homogeneous();
    const auto hr = right.homogeneous();
    const auto gx = bottom.knots().greville();
    const auto gy = left.knots().greville();
    const int nf = bottom.knots().num_basis();
    const int mf = left.knots().num_basis();

    const std::array<CtrlPoint<3>, 4> corner{hb.front(), hb.back(), ht.front(), ht.back()};

    std::vector<Point2> ctrl(static_cast<std::size_t>(nf * mf));
    std::vector<double> w(ctrl.size());
    for (int j = 0; j < mf; ++j) {
        const double v = gy[j];
        for (int i = 0; i < nf; ++i) {
            const double u = gx[i];
            CtrlPoint<3> q{};
            for (int c = 0; c < 3; ++c) {
                const double ruled_eta = (1.0 - v) * hb[i][c] + v * ht[i][c];
                const double ruled_xi = (1.0 - u) * hl[j][c] + u * hr[j][c];
                const double bilinear = (1.0 - u) * (1.0 - v) * corner[0][c] + u * (1.0 - v) * corner[1][c]
                                      + (1.0 - u) * v * corner[2][c] + u * v * corner[3][c];
                q[c] = ruled_eta + ruled_xi - bilinear;
            }
            if (!(q[2] > 0.0))
                throw std::runtime_error("coons_patch: blended weight is not positive");
            const auto idx = static_cast<std::size_t>(i + nf * j);
            ctrl[idx] = {q[0] / q[2], q[1] / q[2]};
            w[idx] = q[2];
        }
    }
    return CoonsSurface(bottom.knots(), left.knots(), std::move(ctrl), std::move(w));
}

inline CoonsSurface coons_patch(const CoonsBoundary& b)
{
    return coons_patch(b.bottom, b.top, b.left, b.right);
}

/// Coons parametrization of the semicircle for a given configuration.
inline CoonsSurface make_semicircle_map(const DomainConfig& cfg)
{
    cfg.validate();
    return coons_patch(make_semicircle_boundary(cfg));
}

struct QualitySample {
    double xi, eta, x, y, mean_ratio, det;
};

/// Mean-ratio Jacobian sampled on a uniform (res x res) parametric grid, xi fastest.
inline std::vector<QualitySample> quality_map(const CoonsSurface& F, int grid_res)
{
    if (grid_res < 2)
        throw std::invalid_argument("quality_map: grid_res must be >= 2");
    std::vector<QualitySample> out;
    out.reserve(static_cast<std::size_t>(grid_res * grid_res));
    for (int j = 0; j < grid_res; ++j) {
        const double eta = static_cast<double>(j) / (grid_res - 1);
        for (int i = 0; i < grid_res; ++i) {
            const double xi = static_cast<double>(i) / (grid_res - 1);
            const auto [p, jd] = F.eval_with_jacobian(xi, eta);
            out.push_back({xi, eta, p.x, p.y, jd.mean_ratio, jd.det});
        }
    }
    return out;
}

} // namespace igarad
