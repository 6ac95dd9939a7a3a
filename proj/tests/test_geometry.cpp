#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <igarad/geometry.hpp>

using namespace igarad;
using std::numbers::pi;

namespace {

DomainConfig mhz_config(double theta = pi / 4)
{
    DomainConfig c;
    c.a = 0.01;
    c.c_sound = 1500;
    c.f = 1.0e6;
    c.r = 2 * near_field_length(c);
    c.theta = theta;
    return c;
}

// adaptive Simpson, used as an arc-length oracle independent of the spline code paths
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40)
{
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double a, double b, double fa, double fm, double fb, double whole, int d) {
            const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
            if (d <= 0 || std::abs(left + right - whole) <= 15 * tol)
                return left + right + (left + right - whole) / 15;
            return rec(a, m, fa, flm, fm, left, d - 1) + rec(m, b, fm, frm, fb, right, d - 1);
        };
    return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), depth);
}

double dist(Point2 a, Point2 b) { return norm(a - b); }

} // namespace

TEST(DomainConfig, MegahertzNearFieldRadiusAndWavenumber)
{
    const auto c = mhz_config();
    EXPECT_NEAR(c.wavelength(), 0.0015, 1e-15);
    EXPECT_NEAR(near_field_length(c), 0.0667, 5e-5);
    EXPECT_NEAR(c.r, 0.133, 5e-4);
    EXPECT_NEAR(c.wavenumber(), 4188.79, 5e-3);
}

TEST(DomainConfig, RejectsBadTheta)
{
    auto c = mhz_config(pi / 2);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(make_semicircle_boundary(c), std::invalid_argument);
    c.theta = 0.6 * pi;
    EXPECT_THROW(make_semicircle_boundary(c), std::invalid_argument);
}

TEST(MakeArc, QuarterCircleIsOneBezierPiece)
{
    const auto c = make_arc({0, 0}, 1.0, pi / 4, 3 * pi / 4);
    EXPECT_EQ(c.knots(), KnotVector(3, {0, 0, 0, 1, 1, 1}));
    ASSERT_EQ(c.ctrl().size(), 3u);
    EXPECT_NEAR(c.weights()[1], std::cos(pi / 4), 1e-15);
}

TEST(MakeArc, NineTenthsOfPiSplitsInTwo)
{
    const auto c = make_arc({0, 0}, 1.0, pi / 20, pi - pi / 20);
    EXPECT_EQ(c.knots(), KnotVector(3, {0, 0, 0, 0.5, 0.5, 1, 1, 1}));
    EXPECT_EQ(c.knots().num_basis(), 5);
}

TEST(MakeArc, SamplesLieOnCircle)
{
    const Point2 ctr{0.3, -0.2};
    for (auto [a0, a1] : {std::pair{0.0, 0.3}, std::pair{1.0, 2.5}, std::pair{-1.0, 4.0}, std::pair{0.0, 6.0}}) {
        const auto c = make_arc(ctr, 0.7, a0, a1);
        for (int s = 0; s < 200; ++s)
            EXPECT_LE(std::abs(dist(c.eval(s / 199.0), ctr) - 0.7), 1e-12);
        EXPECT_LE(dist(c.eval(0), ctr + Point2{0.7 * std::cos(a0), 0.7 * std::sin(a0)}), 1e-14);
    }
}

TEST(MakeArc, RejectsEmptySweep) { EXPECT_THROW(make_arc({0, 0}, 1, 1.0, 1.0), std::invalid_argument); }

TEST(RationalCurve, ElevationKeepsCircle)
{
    const auto c = make_arc({0, 0}, 2.0, 0.2, 1.4);
    const auto e = c.elevated();
    EXPECT_EQ(e.knots().order(), 4);
    for (int s = 0; s < 100; ++s) {
        const double t = s / 99.0;
        EXPECT_LE(std::abs(norm(e.eval(t)) - 2.0), 1e-12);
        EXPECT_LE(dist(e.eval(t), c.eval(t)), 1e-12);
    }
}

TEST(RationalCurve, DerivativeMatchesFiniteDifference)
{
    const auto c = make_arc({0, 0}, 1.0, 0.1, 2.9);
    const double h = 1e-6;
    for (double t : {0.1, 0.3, 0.61, 0.9}) {
        const Point2 fd = (1.0 / (2 * h)) * (c.eval(t + h) - c.eval(t - h));
        EXPECT_LE(dist(fd, c.derivative(t)), 1e-6 * norm(fd));
    }
}

TEST(SemicircleBoundary, PiOverFourAllBezierQuadratic)
{
    const auto b = make_semicircle_boundary(mhz_config());
    const KnotVector bez(3, {0, 0, 0, 1, 1, 1});
    EXPECT_EQ(b.bottom.knots(), bez);
    EXPECT_EQ(b.top.knots(), bez);
    EXPECT_EQ(b.left.knots(), bez);
    EXPECT_EQ(b.right.knots(), bez);
    const auto F = coons_patch(b);
    EXPECT_EQ(F.n_ctrl_xi() * F.n_ctrl_eta(), 9);
}

TEST(SemicircleBoundary, ElevatedDiameterHasOriginMidpoint)
{
    const auto b = make_semicircle_boundary(mhz_config());
    ASSERT_EQ(b.bottom.ctrl().size(), 3u);
    EXPECT_NEAR(b.bottom.ctrl()[1].x, 0.0, 1e-16);
    EXPECT_NEAR(b.bottom.ctrl()[1].y, 0.0, 1e-16);
    for (double w : b.bottom.weights())
        EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(SemicircleBoundary, CornersMatch)
{
    for (double th : {pi / 20, pi / 8, pi / 4, 3 * pi / 8}) {
        const auto cfg = mhz_config(th);
        const auto b = make_semicircle_boundary(cfg);
        const double r = cfg.r;
        EXPECT_LE(dist(b.bottom.eval(0), {-r, 0}), 1e-15);
        EXPECT_LE(dist(b.left.eval(0), {-r, 0}), 1e-15);
        EXPECT_LE(dist(b.bottom.eval(1), {r, 0}), 1e-15);
        EXPECT_LE(dist(b.right.eval(0), {r, 0}), 1e-15);
        EXPECT_LE(dist(b.left.eval(1), b.top.eval(0)), 1e-15);
        EXPECT_LE(dist(b.right.eval(1), b.top.eval(1)), 1e-15);
    }
}

TEST(SemicircleBoundary, SideArcLengthsEqualRTheta)
{
    for (double th : {pi / 20, pi / 4}) {
        const auto cfg = mhz_config(th);
        const auto b = make_semicircle_boundary(cfg);
        auto len = [](const RationalCurve& c) {
            return simpson([&](double t) { return norm(c.derivative(t)); }, 0.0, 1.0, 1e-15);
        };
        EXPECT_NEAR(len(b.left), cfg.r * th, 1e-11);
        EXPECT_NEAR(len(b.right), cfg.r * th, 1e-11);
        EXPECT_NEAR(len(b.top), cfg.r * (pi - 2 * th), 1e-11);
    }
}

TEST(CoonsPatch, UnitSquareIsIdentity)
{
    const auto F = coons_patch(make_segment({0, 0}, {1, 0}), make_segment({0, 1}, {1, 1}), make_segment({0, 0}, {0, 1}),
                               make_segment({1, 0}, {1, 1}));
    for (double xi : {0.0, 0.25, 0.7, 1.0})
        for (double eta : {0.0, 0.4, 1.0}) {
            const auto [p, jd] = F.eval_with_jacobian(xi, eta);
            EXPECT_NEAR(p.x, xi, 1e-15);
            EXPECT_NEAR(p.y, eta, 1e-15);
            EXPECT_NEAR(jd.det, 1.0, 1e-14);
            EXPECT_NEAR(jd.mean_ratio, 1.0, 1e-14);
        }
    const auto q = quality_map(F, 11);
    for (const auto& s : q)
        EXPECT_NEAR(s.mean_ratio, 1.0, 1e-14);
}

TEST(CoonsPatch, CornerMismatchThrows)
{
    EXPECT_THROW(coons_patch(make_segment({0, 0}, {1, 0}), make_segment({0, 1}, {1, 1}),
                             make_segment({0, 0}, {0, 1}), make_segment({1, 1e-6}, {1, 1})),
                 std::invalid_argument);
}

TEST(CoonsPatch, BoundaryReproduction)
{
    for (double th : {pi / 20, pi / 8, pi / 4, 3 * pi / 8}) {
        const auto cfg = mhz_config(th);
        const auto b = make_semicircle_boundary(cfg);
        const auto F = coons_patch(b);
        double dev = 0;
        for (int s = 0; s < 100; ++s) {
            const double t = s / 99.0;
            dev = std::max(dev, dist(eval_map(F, t, 0), b.bottom.eval(t)));
            dev = std::max(dev, dist(eval_map(F, t, 1), b.top.eval(t)));
            dev = std::max(dev, dist(eval_map(F, 0, t), b.left.eval(t)));
            dev = std::max(dev, dist(eval_map(F, 1, t), b.right.eval(t)));
        }
        EXPECT_LE(dev, 1e-12) << th;
    }
}

TEST(CoonsPatch, ExactCircleOnArcs)
{
    for (double th : {pi / 20, pi / 4}) {
        const auto cfg = mhz_config(th);
        const auto F = make_semicircle_map(cfg);
        for (int s = 0; s < 1000; ++s) {
            const double t = s / 999.0;
            EXPECT_LE(std::abs(norm(eval_map(F, t, 1)) - cfg.r), 1e-12);
            EXPECT_LE(std::abs(norm(eval_map(F, 0, t)) - cfg.r), 1e-12);
            EXPECT_LE(std::abs(norm(eval_map(F, 1, t)) - cfg.r), 1e-12);
        }
    }
}

TEST(CoonsPatch, CornerTopMidpointAndDiameter)
{
    const auto cfg = mhz_config();
    const auto F = make_semicircle_map(cfg);
    EXPECT_LE(dist(eval_map(F, 0, 0), {-cfg.r, 0}), 1e-15);
    const Point2 top = eval_map(F, 0.5, 1);
    EXPECT_NEAR(norm(top), cfg.r, 1e-15);
    EXPECT_NEAR(top.x, 0.0, 1e-15);
    for (int s = 0; s < 20; ++s)
        EXPECT_LE(std::abs(eval_map(F, s / 19.0, 0).y), 1e-15);
}

TEST(CoonsPatch, ApertureEndsMapToPlusMinusA)
{
    const auto cfg = mhz_config();
    const auto F = make_semicircle_map(cfg);
    const double xm = (cfg.r - cfg.a) / (2 * cfg.r), xp = (cfg.r + cfg.a) / (2 * cfg.r);
    EXPECT_NEAR(xm, 0.4625, 1e-4);
    EXPECT_NEAR(xp, 0.5375, 1e-4);
    EXPECT_LE(dist(eval_map(F, xm, 0), {-cfg.a, 0}), 1e-15);
    EXPECT_LE(dist(eval_map(F, xp, 0), {cfg.a, 0}), 1e-15);
}

TEST(CoonsPatch, JacobianMatchesFiniteDifferences)
{
    const auto F = make_semicircle_map(mhz_config(pi / 8));
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> U(0.01, 0.99);
    const double h = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        const double xi = U(rng), eta = U(rng);
        if (std::abs(xi - 0.5) < 2 * h)
            continue; // C^1 join of the split top arc
        const auto jd = eval_jacobian(F, xi, eta);
        const Point2 fx = (1 / (2 * h)) * (eval_map(F, xi + h, eta) - eval_map(F, xi - h, eta));
        const Point2 fe = (1 / (2 * h)) * (eval_map(F, xi, eta + h) - eval_map(F, xi, eta - h));
        EXPECT_LE(dist(fx, jd.d_xi()), 1e-6 * norm(fx));
        EXPECT_LE(dist(fe, jd.d_eta()), 1e-6 * norm(fe));
    }
}

// det vanishes exactly where two tangent arcs meet (the top corners), so
// positivity is asserted on cell centres of the 400 x 400 grid
TEST(CoonsPatch, PositiveDeterminantAndMeanRatioBound)
{
    for (double th : {pi / 20, pi / 8, pi / 4, 3 * pi / 8}) {
        const auto F = make_semicircle_map(mhz_config(th));
        const int res = 400;
        double min_det = 1e300;
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) {
                const auto jd = eval_jacobian(F, (i + 0.5) / res, (j + 0.5) / res);
                min_det = std::min(min_det, jd.det);
                if (jd.det > 0) {
                    EXPECT_GT(jd.mean_ratio, 0.0);
                    EXPECT_LE(jd.mean_ratio, 1.0 + 1e-14);
                }
            }
        EXPECT_GT(min_det, 0.0) << th;
    }
}

TEST(CoonsPatch, TopCornersAreDegenerate)
{
    const auto F = make_semicircle_map(mhz_config());
    EXPECT_NEAR(eval_jacobian(F, 0, 1).mean_ratio, 0.0, 1e-12);
    EXPECT_NEAR(eval_jacobian(F, 1, 1).mean_ratio, 0.0, 1e-12);
}

TEST(QualityMap, PiOverFourBeatsPiOverTwenty)
{
    auto mean = [](double th) {
        const auto q = quality_map(make_semicircle_map(mhz_config(th)), 200);
        double s = 0;
        for (const auto& x : q)
            s += x.mean_ratio;
        return s / q.size();
    };
    EXPECT_GT(mean(pi / 4), mean(pi / 20));
}

TEST(QualityMap, RejectsTinyGrid)
{
    EXPECT_THROW(quality_map(make_semicircle_map(mhz_config()), 1), std::invalid_argument);
}
