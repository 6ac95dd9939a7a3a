#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <igarad/studies.hpp>

using namespace igarad;

TEST(Mms, ZeroAmplitudeGivesZeroError)
{
    MmsSetup s;
    s.amplitude = 0.0;
    const auto t = convergence_study(s, 3, 2, 8);
    for (const auto& row : t.rows) {
        EXPECT_EQ(row.result.norms.error, 0.0);
        EXPECT_EQ(row.rate, 0.0);
    }
}

TEST(Mms, SetupIsConsistent)
{
    const MmsSetup s;
    const auto d = s.domain();
    EXPECT_NEAR(d.wavenumber(), s.k, 1e-14);
    const auto ap = aperture_params(d);
    EXPECT_DOUBLE_EQ(ap.xi_minus, 0.25);
    EXPECT_DOUBLE_EQ(ap.xi_plus, 0.75);
    const auto w = s.wave();
    EXPECT_NEAR(norm(w.direction), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(w({0.1, 0.2})), 1.0, 1e-15);
}

TEST(Mms, RefinementReducesError)
{
    const MmsSetup s;
    for (int order : {3, 4}) {
        const auto a = mms_solve(s, order, 8);
        const auto b = mms_solve(s, order, 16);
        EXPECT_EQ(a.dofs, (8 + order - 1) * (8 + order - 1));
        EXPECT_DOUBLE_EQ(b.h, 1.0 / 16);
        EXPECT_LT(b.relative(), a.relative() / 4);
        EXPECT_GT(a.norms.exact, 0.0);
    }
}

TEST(Mms, CubicBeatsQuadraticAtEqualMesh)
{
    const MmsSetup s;
    EXPECT_LT(mms_solve(s, 4, 16).relative(), mms_solve(s, 3, 16).relative());
}

TEST(Mms, ConvergenceTableRates)
{
    const MmsSetup s;
    const auto t = convergence_study(s, 3, 3, 8);
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_TRUE(t.monotone);
    EXPECT_EQ(t.rows[0].rate, 0.0);
    EXPECT_NEAR(t.rows[2].rate, std::log2(t.rows[1].result.norms.error / t.rows[2].result.norms.error), 1e-14);
    EXPECT_DOUBLE_EQ(t.observed_order(), t.rows[2].rate);
    EXPECT_GT(t.observed_order(), 2.0);
    EXPECT_EQ(t.rows[2].result.elements, 32);
}

TEST(Pollution, ElementsPerWavelength)
{
    // 2 r k / (2 pi) wavelengths across the diameter
    EXPECT_EQ(elements_for(2 * std::numbers::pi, 0.5, 8.0, 3), 6);
    EXPECT_EQ(elements_for(2 * std::numbers::pi * 10, 0.5, 8.0, 4), 77);
    EXPECT_EQ(elements_for(1e-3, 0.5, 8.0, 4), 1);
}

TEST(Pollution, SingleWavenumberMatchesDirectSolve)
{
    MmsSetup s;
    const double k = 20.0;
    const auto t = pollution_study(s, 3, {k}, 6.0);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_DOUBLE_EQ(t.growth(), 1.0);
    s.k = k;
    const auto r = mms_solve(s, 3, elements_for(k, s.r, 6.0, 3));
    EXPECT_EQ(t.rows[0].result.norms.error, r.norms.error);
    EXPECT_EQ(t.rows[0].result.dofs, r.dofs);
}

TEST(Pollution, GrowthIsRatioOfEnds)
{
    const auto t = pollution_study(MmsSetup{}, 3, {10.0, 20.0}, 6.0);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(t.growth(), t.rows[1].result.relative() / t.rows[0].result.relative());
    EXPECT_EQ(t.order, 3);
    EXPECT_DOUBLE_EQ(t.dofs_per_wavelength, 6.0);
}
