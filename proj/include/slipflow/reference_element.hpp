#pragma once

#include "slipflow/types.hpp"

#include <array>

namespace slipflow {

// Reference triangle with vertices (0,0), (1,0), (0,1). Local edge e is the
// edge opposite local vertex e, i.e. edge 0 = (v1, v2), edge 1 = (v2, v0),
// edge 2 = (v0, v1).

inline constexpr std::array<std::array<int, 2>, 3> kEdgeVertices{{{1, 2}, {2, 0}, {0, 1}}};

/// Barycentric coordinates of a reference point.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> barycentric(const Vector2<Scalar>& xi)
{
    return {1 - xi(0) - xi(1), xi(0), xi(1)};
}

/// Reference gradients of the barycentric coordinates (rows).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 2> barycentric_gradients()
{
    Eigen::Matrix<Scalar, 3, 2> g;
    g << -1, -1, 1, 0, 0, 1;
    return g;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> p1_values(const Vector2<Scalar>& xi)
{
    return barycentric(xi);
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 2> p1_gradients(const Vector2<Scalar>&)
{
    return barycentric_gradients<Scalar>();
}

/// P2 Lagrange basis: nodes 0-2 at the vertices, node 3+e at the midpoint of edge e.
template <typename Scalar>
Eigen::Matrix<Scalar, 6, 1> p2_values(const Vector2<Scalar>& xi)
{
    const auto l = barycentric(xi);
    Eigen::Matrix<Scalar, 6, 1> v;
    for (int i = 0; i < 3; ++i)
        v(i) = l(i) * (2 * l(i) - 1);
    for (int e = 0; e < 3; ++e)
        v(3 + e) = 4 * l(kEdgeVertices[e][0]) * l(kEdgeVertices[e][1]);
    return v;
}

/// Reference gradients of the P2 basis, one row per basis function.
template <typename Scalar>
Eigen::Matrix<Scalar, 6, 2> p2_gradients(const Vector2<Scalar>& xi)
{
    const auto l = barycentric(xi);
    const auto dl = barycentric_gradients<Scalar>();
    Eigen::Matrix<Scalar, 6, 2> g;
    for (int i = 0; i < 3; ++i)
        g.row(i) = (4 * l(i) - 1) * dl.row(i);
    for (int e = 0; e < 3; ++e) {
        const int a = kEdgeVertices[e][0], b = kEdgeVertices[e][1];
        g.row(3 + e) = 4 * (l(a) * dl.row(b) + l(b) * dl.row(a));
    }
    return g;
}

/// Reference coordinates of the six P2 nodes.
template <typename Scalar>
std::array<Vector2<Scalar>, 6> p2_nodes()
{
    return {Vector2<Scalar>(0, 0), Vector2<Scalar>(1, 0), Vector2<Scalar>(0, 1),
            Vector2<Scalar>(0.5, 0.5), Vector2<Scalar>(0, 0.5), Vector2<Scalar>(0.5, 0)};
}

/// Point on local edge `e` at parameter s in [0, 1], measured from the edge's
/// first vertex to its second.
template <typename Scalar>
Vector2<Scalar> edge_point(int e, Scalar s)
{
    const auto nodes = p2_nodes<Scalar>();
    const auto& a = nodes[kEdgeVertices[e][0]];
    const auto& b = nodes[kEdgeVertices[e][1]];
    return (1 - s) * a + s * b;
}

} // namespace slipflow
