#include "slipflow/stability.hpp"

#include "slipflow/reference_element.hpp"
#include "test_support.hpp"

#include <Eigen/SparseCholesky>
#include <gtest/gtest.h>

#include <cmath>

using namespace slipflow;
using test_support::top_slip_space;

namespace {

// Largest h_F |v|^2_F / |v|^2_K over P2 on one triangle, computed from a
// Gauss rule of its own: the pencil (h_F M_F, M_K) with a fine cell rule.
double element_trace_constant(const std::array<Vec2, 3>& tri, int edge)
{
    Mat2 j;
    j.col(0) = tri[1] - tri[0];
    j.col(1) = tri[2] - tri[0];
    const double det = std::abs(j.determinant());
    Eigen::Matrix<double, 6, 6> mk = Eigen::Matrix<double, 6, 6>::Zero(), mf = mk;
    const auto cell = collapsed_gauss_triangle(8);
    for (std::size_t q = 0; q < cell.size(); ++q) {
        const auto phi = p2_values<double>(cell.points[q]);
        mk += cell.weights[q] * det * phi * phi.transpose();
    }
    const auto& a = tri[kEdgeVertices[edge][0]];
    const auto& b = tri[kEdgeVertices[edge][1]];
    const double len = (b - a).norm();
    const auto line = gauss_legendre(8);
    for (std::size_t q = 0; q < line.size(); ++q) {
        const auto phi = p2_values<double>(edge_point(edge, line.points[q](0)));
        mf += line.weights[q] * len * phi * phi.transpose();
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(len * mf, mk);
    return std::sqrt(es.eigenvalues().maxCoeff());
}

} // namespace

TEST(InverseTrace, MatchesElementPencilAndIsMeshIndependent)
{
    // On the right-diagonal mesh every boundary facet is a leg of a right isosceles triangle.
    const std::array<Vec2, 3> right{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    const double leg = element_trace_constant(right, 2);
    const double c8 = inverse_trace_constant(top_slip_space(8));
    const double c16 = inverse_trace_constant(top_slip_space(16));
    EXPECT_NEAR(c8, leg, 1e-10);
    EXPECT_NEAR(c16, c8, 1e-12);
    EXPECT_NEAR(c8, std::sqrt(12.0), 1e-10);
}

TEST(InverseTrace, CrossedMeshUsesSmallerCells)
{
    // Crossed cells have the facet as hypotenuse of a right isosceles triangle of half the area.
    const std::array<Vec2, 3> quarter{Vec2(0, 0), Vec2(1, 0), Vec2(0.5, 0.5)};
    const double c = inverse_trace_constant(top_slip_space(8, Diagonal::crossed));
    EXPECT_NEAR(c, element_trace_constant(quarter, 2), 1e-10);
    EXPECT_NEAR(c, std::sqrt(24.0), 1e-10);
}

TEST(InverseTrace, ScaleInvariant)
{
    const Mesh m = build_unit_square(6).tag_boundary(top_wall_predicate());
    const double c = inverse_trace_constant(TaylorHoodSpace(m));
    EXPECT_NEAR(inverse_trace_constant(TaylorHoodSpace(m.scaled(7.5))), c, 1e-10);
}

TEST(Korn, TopOnlySlipAdmitsRigidMotionOnlyWithoutDirichletWalls)
{
    // Korn pencil on the unconstrained space: top-only normal control leaves the
    // horizontal translation, all-wall control removes every rigid motion.
    const auto top = korn_normal_trace_min_eig(top_slip_space(8));
    EXPECT_LE(std::abs(top.min_eig), 1e-10);
    // The witness is a horizontal translation.
    const auto space = top_slip_space(8);
    const VectorX& w = top.witness;
    for (int node = 0; node < space.num_nodes(); ++node) {
        EXPECT_NEAR(w(2 * node + 1), 0.0, 1e-8);
        EXPECT_NEAR(w(2 * node), w(0), 1e-8);
    }

    const TaylorHoodSpace all(build_unit_square(8).tag_boundary(all_slip_predicate()));
    EXPECT_GT(korn_normal_trace_min_eig(all).min_eig, 0.05);
    const TaylorHoodSpace two(build_unit_square(8).tag_boundary(slip_walls_predicate({Wall::top, Wall::left})));
    const double m2 = korn_normal_trace_min_eig(two).min_eig;
    EXPECT_GT(m2, 0.01);
    EXPECT_LT(m2, korn_normal_trace_min_eig(all).min_eig);
}

TEST(InfSup, PositiveAndStableUnderRefinement)
{
    const double b8 = infsup_constant(top_slip_space(8));
    const double b16 = infsup_constant(top_slip_space(16));
    EXPECT_GT(b8, 0.3);
    EXPECT_LT(b8, 1.0);
    EXPECT_NEAR(b16 / b8, 1.0, 0.2);
    const double c8 = infsup_constant(top_slip_space(8, Diagonal::crossed));
    EXPECT_GT(c8, 0.3);
}

TEST(TraceKorn, PositiveAndStableUnderRefinement)
{
    const double k8 = trace_korn_constant(top_slip_space(8));
    const double k16 = trace_korn_constant(top_slip_space(16));
    EXPECT_GT(k8, 0.1);
    EXPECT_LT(k8, 10);
    EXPECT_NEAR(k16 / k8, 1.0, 0.1);
}

TEST(ResolveAlpha, FollowsTheStabilityRule)
{
    NitscheConfig cfg;
    cfg.alpha.reset();
    cfg.nu = 1;
    const double c_tr = std::sqrt(12.0), c_trk = 0.7;
    EXPECT_NEAR(resolve_alpha(cfg, navier(1.0), c_tr, c_trk), 1.1 * 2 * 2 * 12, 1e-12);

    const SlipLaw fang = fang_regularized(1.6, 1.5, 10.0, 2e-4); // lambda = 1
    const double cl = 2 / (c_trk * c_trk);
    EXPECT_NEAR(resolve_alpha(cfg, fang, c_tr, c_trk), 1.1 * 2 * (cl * 2 * 12 + 1) / (cl - 1), 1e-12);

    EXPECT_THROW(resolve_alpha(cfg, fang.with_lambda(cl), c_tr, c_trk), StabilityError);
    cfg.alpha = 42;
    EXPECT_EQ(resolve_alpha(cfg, fang, c_tr, c_trk), 42);
}

TEST(Eigen, DenseGeneralizedPairs)
{
    MatrixX a = MatrixX::Zero(3, 3), m = MatrixX::Identity(3, 3);
    a.diagonal() << 3, 1, 2;
    m(0, 0) = 3;
    const auto pairs = dense_smallest_eigenpairs(a, m, 2);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_NEAR(pairs[0].value, 1, 1e-14);
    EXPECT_NEAR(pairs[1].value, 1, 1e-14);
    for (const auto& p : pairs)
        EXPECT_NEAR(p.vector.dot(m * p.vector), 1, 1e-14);
}

TEST(Eigen, SubspaceIterationMatchesLaplacianSpectrum)
{
    // 1D Dirichlet Laplacian: eigenvalues 2 - 2 cos(k pi / (n + 1)).
    const int n = 60;
    SparseMatrix a(n, n), m(n, n);
    for (int i = 0; i < n; ++i) {
        a.insert(i, i) = 2;
        if (i > 0)
            a.insert(i, i - 1) = -1;
        if (i + 1 < n)
            a.insert(i, i + 1) = -1;
        m.insert(i, i) = 1;
    }
    a.makeCompressed();
    m.makeCompressed();
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
    const auto solve = [&](const MatrixX& x) -> MatrixX { return ldlt.solve(x); };
    const auto apply = [&](const MatrixX& x) -> MatrixX { return a * x; };
    const auto low = subspace_eigenpairs(solve, apply, m, 3, false);
    for (int k = 1; k <= 3; ++k)
        EXPECT_NEAR(low[k - 1].value, 2 - 2 * std::cos(k * M_PI / (n + 1)), 1e-10);
    const auto high = subspace_eigenpairs(apply, apply, m, 1, true);
    EXPECT_NEAR(high.back().value, 2 - 2 * std::cos(n * M_PI / (n + 1)), 1e-8);
}

TEST(Constants, ReportCombinesTheIndividualConstants)
{
    const auto space = top_slip_space(8);
    NitscheConfig cfg;
    cfg.alpha.reset();
    const SlipLaw law = leroux_rajagopal(1.0, 0.1, 0.001, -0.75);
    const ConstantsReport r = compute_constants(space, cfg, law);
    EXPECT_NEAR(r.c_tr, inverse_trace_constant(space), 1e-14);
    EXPECT_NEAR(r.c_trk, trace_korn_constant(space), 1e-10);
    EXPECT_NEAR(r.infsup, infsup_constant(space), 1e-10);
    EXPECT_NEAR(r.alpha_auto, resolve_alpha(cfg, law, r.c_tr, r.c_trk), 1e-8);
}
