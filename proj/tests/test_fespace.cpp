#include "slipflow/fespace.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace slipflow;
using test_support::random_point;
using test_support::top_slip_space;

namespace {

// Divergence-free quadratic field with zero normal component on y = 1.
Vec2 quadratic(const Vec2& x)
{
    return {x.x() * x.x() + x.y() * x.y(), -2 * x.x() * x.y() + 2 * x.x()};
}

Mat2 quadratic_gradient(const Vec2& x)
{
    Mat2 g;
    g << 2 * x.x(), 2 * x.y(), -2 * x.y() + 2, -2 * x.x();
    return g;
}

} // namespace

TEST(TaylorHood, DofCounts)
{
    const auto space = top_slip_space(5);
    const Mesh& m = space.mesh();
    EXPECT_EQ(space.num_nodes(), m.num_vertices() + m.num_edges());
    EXPECT_EQ(space.num_velocity_dofs(), 2 * space.num_nodes());
    EXPECT_EQ(space.num_pressure_dofs(), m.num_vertices());
    EXPECT_EQ(space.slip_facets().size(), 5u);
}

TEST(TaylorHood, DirichletNodesExcludeOnlySlipInteriorNodes)
{
    // 8n boundary P2 nodes; the 2n - 1 nodes strictly inside the top wall are slip.
    const int n = 6;
    const auto space = top_slip_space(n);
    EXPECT_EQ(space.dirichlet_nodes().size(), static_cast<std::size_t>(8 * n - (2 * n - 1)));
    for (int node : space.dirichlet_nodes()) {
        const Vec2& x = space.node_coordinate(node);
        const bool corner_or_wall = x.y() < 1 - 1e-12 || x.x() < 1e-12 || x.x() > 1 - 1e-12;
        EXPECT_TRUE(corner_or_wall);
    }
    EXPECT_TRUE(space.is_dirichlet_node(space.dirichlet_nodes().front()));
    const auto dofs = space.dirichlet_velocity_dofs();
    EXPECT_EQ(dofs.size(), 2 * space.dirichlet_nodes().size());
    EXPECT_TRUE(std::is_sorted(dofs.begin(), dofs.end()));
}

TEST(TaylorHood, InterpolantReproducesQuadratics)
{
    for (auto diag : {Diagonal::right, Diagonal::crossed}) {
        const auto space = top_slip_space(4, diag);
        const VectorX u = interpolate_velocity(space, [](const Vec2& x, double) { return quadratic(x); });
        std::mt19937_64 rng(5);
        for (int k = 0; k < 30; ++k) {
            const Vec2 x = random_point(rng);
            const auto [cell, xi] = *space.mesh().locate(x);
            const VelocityValue val = evaluate_velocity(space, u, cell, xi);
            EXPECT_LE((val.value - quadratic(x)).norm(), 1e-13);
            EXPECT_LE((val.gradient - quadratic_gradient(x)).norm(), 1e-12);
            EXPECT_LE((val.D - 0.5 * (val.gradient + val.gradient.transpose())).norm(), 1e-15);
            EXPECT_LE((evaluate_velocity_at(space, u, x) - quadratic(x)).norm(), 1e-13);
        }
    }
}

TEST(TaylorHood, PressureInterpolantReproducesLinears)
{
    const auto space = top_slip_space(3, Diagonal::crossed);
    const auto p = [](const Vec2& x, double) { return 2 * x.x() - 3 * x.y() + 0.5; };
    const VectorX ph = interpolate_pressure(space, p);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 20; ++k) {
        const Vec2 x = random_point(rng);
        const auto [cell, xi] = *space.mesh().locate(x);
        EXPECT_NEAR(evaluate_pressure(space, ph, cell, xi), p(x, 0), 1e-14);
    }
    // int (2x - 3y + 1/2) over the unit square = 1 - 3/2 + 1/2 = 0.
    EXPECT_NEAR(integrate_pressure(space, ph), 0.0, 1e-14);
    EXPECT_NEAR(pressure_basis_integrals(space).sum(), 1.0, 1e-14);
}

TEST(TaylorHood, ErrorNormsVanishOnReproducedFields)
{
    const auto space = top_slip_space(4);
    const ExactFields exact{[](const Vec2& x, double) { return quadratic(x); },
                            [](const Vec2& x, double) { return quadratic_gradient(x); },
                            [](const Vec2& x, double) { return x.x() - 0.5; }};
    const SystemState s{interpolate_velocity(space, exact.velocity), interpolate_pressure(space, exact.pressure), 0};
    const ErrorNorms e = error_norms(space, s, exact, 0);
    EXPECT_LE(e.l2_velocity, 1e-13);
    EXPECT_LE(e.h1_velocity, 1e-12);
    EXPECT_LE(e.l2_pressure, 1e-13);
    EXPECT_LE(e.l2_tangential, 1e-13);
    EXPECT_LE(e.l2_normal, 1e-13);
}

TEST(TaylorHood, ErrorNormsOfAConstantOffset)
{
    // u_h = u + (1, 0): L2 error 1 over the unit square, tangential trace error 1 on the top wall.
    const auto space = top_slip_space(3);
    const ExactFields exact{[](const Vec2& x, double) { return quadratic(x); },
                            [](const Vec2& x, double) { return quadratic_gradient(x); },
                            [](const Vec2&, double) { return 0.0; }};
    const SystemState s{interpolate_velocity(space, [](const Vec2& x, double) { return Vec2(quadratic(x) + Vec2(1, 0)); }),
                        VectorX::Zero(space.num_pressure_dofs()), 0};
    const ErrorNorms e = error_norms(space, s, exact, 0);
    EXPECT_NEAR(e.l2_velocity, 1.0, 1e-13);
    EXPECT_LE(e.h1_velocity, 1e-12);
    EXPECT_NEAR(e.l2_tangential, 1.0, 1e-13);
    EXPECT_LE(e.l2_normal, 1e-13);
}

TEST(TaylorHood, TraceSplitOnTopWall)
{
    const auto space = top_slip_space(4);
    const VectorX u = interpolate_velocity(space, [](const Vec2& x, double) { return Vec2(x.x(), 3.0); });
    for (int f : space.slip_facets()) {
        for (double s : {0.0, 0.3, 1.0}) {
            const TraceSplit t = trace_split(space, u, f, s);
            EXPECT_NEAR(t.normal, 3.0, 1e-13);
            EXPECT_NEAR(t.tangential.y(), 0.0, 1e-13);
        }
    }
    const TraceSplit t = trace_split(Vec2(1, 2), Vec2(0, -1));
    EXPECT_NEAR(t.normal, -2, 0);
    EXPECT_LE((t.tangential - Vec2(1, 0)).norm(), 0);
}

TEST(TaylorHood, PointEvaluationOutsideThrows)
{
    const auto space = top_slip_space(2);
    EXPECT_THROW(evaluate_velocity_at(space, VectorX::Zero(space.num_velocity_dofs()), Vec2(2, 2)),
                 std::invalid_argument);
}

TEST(TaylorHood, ZeroState)
{
    const auto space = top_slip_space(2);
    const SystemState s = SystemState::zero(space);
    EXPECT_EQ(s.u.size(), space.num_velocity_dofs());
    EXPECT_EQ(s.p.size(), space.num_pressure_dofs());
    EXPECT_EQ(s.u.norm() + s.p.norm() + std::abs(s.m), 0);
}
