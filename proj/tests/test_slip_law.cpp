#include "slipflow/slip_law.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace slipflow;

namespace {

std::vector<SlipLaw> smooth_laws()
{
    return {navier(2.0),
            leroux_rajagopal(1.0, 0.1, 0.001, -0.75),
            tresca_regularized(1.0, 2e-4),
            stick_slip_regularized(2.0, 1.0, 2e-4),
            fang_regularized(1.6, 1.5, 10.0, 2e-4)};
}

Mat2 rotation(double phi)
{
    Mat2 r;
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return r;
}

} // namespace

TEST(SlipLaw, LeRouxRajagopalValue)
{
    // (1 (1 + 0.1)^(-3/4) + 0.001) * 1
    const SlipLaw law = leroux_rajagopal(1.0, 0.1, 0.001, -0.75);
    const Vec2 s = law.traction(Vec2(1, 0), {});
    EXPECT_NEAR(s.x(), 0.9320124446222228, 1e-14);
    EXPECT_NEAR(s.y(), 0.0, 0);
}

TEST(SlipLaw, TrescaValue)
{
    const SlipLaw law = tresca_regularized(1.0, 2e-4);
    EXPECT_NEAR(law.traction(Vec2(1, 0), {}).x(), 1 / std::sqrt(1 + 4e-8), 1e-15);
    // Saturates at mu_star for |v| >> epsilon.
    EXPECT_NEAR(law.traction(Vec2(0, 100), {}).norm(), 1.0, 1e-11);
}

TEST(SlipLaw, FangThresholdLimits)
{
    const SlipLaw law = fang_regularized(1.6, 1.5, 10.0, 2e-4);
    const auto& fang = std::get<FangLaw>(law.variant());
    EXPECT_NEAR(fang.threshold(0.0), 1.6, 1e-15);
    EXPECT_NEAR(fang.threshold(100.0), 1.5, 1e-15);
    // Far above epsilon the traction magnitude approaches the threshold.
    EXPECT_NEAR(law.traction(Vec2(0.1, 0), {}).x(), 0.1 * std::exp(-1.0) + 1.5, 1e-5);
}

TEST(SlipLaw, NavierIsLinear)
{
    const SlipLaw law = navier(3.0);
    EXPECT_LE((law.traction(Vec2(1, -2), {}) - Vec2(3, -6)).norm(), 0);
    EXPECT_DOUBLE_EQ(law.lambda(), 0);
    EXPECT_DOUBLE_EQ(navier(-0.5).lambda(), 0.5);
}

TEST(SlipLaw, JacobiansMatchCentralDifferences)
{
    std::mt19937_64 rng(17);
    for (const SlipLaw& law : smooth_laws()) {
        for (int k = 0; k < 40; ++k) {
            // Mix O(1) speeds with speeds near the regularization scale.
            const double scale = k % 2 == 0 ? 2.0 : 1e-3;
            const Vec2 v = scale * test_support::random_point(rng, -1, 1);
            const double h = 1e-7 * std::max(scale, v.norm());
            Mat2 fd;
            for (int d = 0; d < 2; ++d) {
                Vec2 dv = Vec2::Zero();
                dv(d) = h;
                fd.col(d) = (law.traction(v + dv, {}) - law.traction(v - dv, {})) / (2 * h);
            }
            const Mat2 j = law.jacobian(v, {});
            EXPECT_LE((j - fd).norm(), 1e-6 * std::max(1.0, j.norm())) << law.name() << " at " << v.transpose();
        }
    }
}

TEST(SlipLaw, DynamicJacobianMatchesDifferences)
{
    const SlipLaw law = dynamic_moving_wall(1.0, 2.0, 0.01);
    const SlipTime t{0.005, 0.005};
    const Vec2 v(0.3, -0.1);
    const double h = 1e-6;
    for (int d = 0; d < 2; ++d) {
        Vec2 dv = Vec2::Zero();
        dv(d) = h;
        const Vec2 fd = (law.traction(v + dv, t) - law.traction(v - dv, t)) / (2 * h);
        EXPECT_LE((fd - law.jacobian(v, t).col(d)).norm(), 1e-8);
    }
}

TEST(SlipLaw, RotationalEquivariance)
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
    for (const SlipLaw& law : smooth_laws()) {
        for (int k = 0; k < 20; ++k) {
            const Vec2 v = test_support::random_point(rng, -3, 3);
            const Mat2 r = rotation(angle(rng));
            const Vec2 lhs = law.traction(r * v, {});
            const Vec2 rhs = r * law.traction(v, {});
            EXPECT_LE((lhs - rhs).norm(), 1e-13 * std::max(1.0, rhs.norm())) << law.name();
        }
    }
}

TEST(SlipLaw, MovingWallRampsToUnitSpeed)
{
    const SlipLaw law = dynamic_moving_wall(1.0, 0.5, 0.01);
    EXPECT_NEAR(law.wall_velocity(0.005).x(), 0.5, 1e-15);
    EXPECT_NEAR(law.wall_velocity(0.5).x(), 1.0, 0);
    EXPECT_NEAR(law.wall_velocity(0.0).norm(), 0.0, 0);
    EXPECT_DOUBLE_EQ(law.beta_star(), 0.5);
    EXPECT_TRUE(law.has_wall_velocity());
    // At rest relative to the wall only the acceleration term remains.
    const Vec2 s = law.traction(Vec2(0.5, 0), {0.005, 0.005});
    EXPECT_NEAR(s.x(), -0.5 * 100.0, 1e-12);
}

TEST(SlipLaw, LeRouxRajagopalFittedDefect)
{
    // min over s of d/ds [s (a (1 + b s^2)^theta + c)], reached at b s^2 = 6 for these parameters.
    const SlipLaw law = leroux_rajagopal(1.0, 0.1, 0.001, -0.75);
    EXPECT_NEAR(law.lambda(), 0.06539088006929744, 1e-9);
}

TEST(SlipLaw, FangDeclaredDefectBoundsTheTrueOne)
{
    const SlipLaw law = fang_regularized(1.6, 1.5, 10.0, 2e-4);
    EXPECT_DOUBLE_EQ(law.lambda(), 1.0);
    const double fitted = fitted_monotonicity_defect(law);
    EXPECT_NEAR(fitted, 0.8500594472771184, 1e-5);
    EXPECT_LE(fitted, law.lambda());
}

TEST(SlipLaw, MonotoneLawsHaveNoDefect)
{
    EXPECT_EQ(fitted_monotonicity_defect(navier(1.0)), 0.0);
    EXPECT_EQ(fitted_monotonicity_defect(stick_slip_regularized(2.0, 1.0, 2e-4)), 0.0);
    EXPECT_TRUE(tresca_regularized(1.0, 2e-4).monotone());
}

TEST(Certificate, SmoothLawsPass)
{
    for (const SlipLaw& law : smooth_laws()) {
        const Certificate c = certify(law);
        EXPECT_TRUE(c.passed()) << law.name();
        ASSERT_NE(c.find("zero_at_origin"), nullptr);
        ASSERT_NE(c.find("lambda_monotone"), nullptr);
        ASSERT_NE(c.find("coercivity"), nullptr);
    }
    EXPECT_NE(certify(tresca_regularized(1.0, 2e-4)).find("bounded_traction"), nullptr);
}

TEST(Certificate, UnderstatedDefectFailsMonotonicity)
{
    const SlipLaw law = fang_regularized(1.6, 1.5, 10.0, 2e-4);
    const Certificate c = certify(law, {.lambda = 0.5});
    EXPECT_FALSE(c.passed());
    const CertificateClause* m = c.find("lambda_monotone");
    ASSERT_NE(m, nullptr);
    EXPECT_FALSE(m->passed);
    EXPECT_FALSE(m->detail.empty());
    EXPECT_LT(m->value, 0);
}

TEST(Certificate, NegativeNavierUsesGrowthClause)
{
    const Certificate c = certify(navier(-1.0));
    EXPECT_TRUE(c.passed());
    EXPECT_NE(c.find("growth"), nullptr);
    EXPECT_EQ(c.find("coercivity"), nullptr);
}

TEST(Certificate, RejectsMovingWall)
{
    EXPECT_THROW(certify(dynamic_moving_wall(1.0, 0.0, 0.01)), ConfigError);
}

TEST(Factory, BuildsLawsFromParameters)
{
    EXPECT_EQ(make_slip_law("navier", {{"gamma", 1.5}}).traction(Vec2(2, 0), {}).x(), 3.0);
    EXPECT_EQ(make_slip_law("fang", {}).name(), "fang");
    EXPECT_EQ(make_slip_law("stick_slip", {{"gamma_star", 0.0}}).name(), "tresca");
    EXPECT_EQ(make_slip_law("dynamic", {{"beta_star", 2.0}}).beta_star(), 2.0);
}

TEST(Factory, RejectsBadInput)
{
    EXPECT_THROW(make_slip_law("coulomb", {}), ConfigError);
    EXPECT_THROW(make_slip_law("navier", {}), ConfigError);
    EXPECT_THROW(make_slip_law("fang", {{"gamma", 1.0}}), ConfigError);
    EXPECT_THROW(make_slip_law("tresca", {{"epsilon", 0.0}}), ConfigError);
    EXPECT_THROW(make_slip_law("fang", {{"a", 1.0}, {"b", 1.5}}), ConfigError);
}
