#pragma once

#include "slipflow/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace slipflow {

/// Points and weights of a quadrature rule in `Dim` reference coordinates.
template <typename Scalar, int Dim>
struct QuadratureRule {
    std::vector<Eigen::Matrix<Scalar, Dim, 1>> points;
    std::vector<Scalar> weights;

    std::size_t size() const { return weights.size(); }
};

template <typename Scalar>
using LineRule = QuadratureRule<Scalar, 1>;
template <typename Scalar>
using TriangleRule = QuadratureRule<Scalar, 2>;

/// Gauss-Legendre rule with `n` points on the unit interval [0, 1].
/// Exact for polynomials of degree 2n - 1.
template <typename Scalar = double>
LineRule<Scalar> gauss_legendre(int n)
{
    // Returns (P_n(x), P_n'(x)) by the three-term recurrence.
    const auto legendre = [n](Scalar x) {
        Scalar p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const Scalar dp = n * (x * p1 - p0) / (x * x - 1);
        return std::pair{p1, dp};
    };

    LineRule<Scalar> rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        Scalar x = std::cos(std::numbers::pi_v<Scalar> * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(x);
            const Scalar dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 4 * std::numeric_limits<Scalar>::epsilon())
                break;
        }
        const Scalar dp = legendre(x).second;
        // Nodes come out in decreasing order; store them increasing.
        rule.points[n - 1 - i](0) = (x + 1) / 2;
        rule.weights[n - 1 - i] = 1 / ((1 - x * x) * dp * dp);
    }
    return rule;
}

/// Collapsed (Duffy) Gauss rule on the reference triangle {(x, y): x, y >= 0, x + y <= 1}.
/// `n` points per direction; exact for total degree 2n - 2 (the collapsed
/// direction carries the extra Jacobian factor).
template <typename Scalar = double>
TriangleRule<Scalar> collapsed_gauss_triangle(int n)
{
    const auto line = gauss_legendre<Scalar>(n);
    TriangleRule<Scalar> rule;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Scalar s = line.points[i](0);
            const Scalar t = line.points[j](0);
            // (s, t) in [0,1]^2 -> (x, y) = (s (1 - t), t), Jacobian (1 - t).
            rule.points.push_back({s * (1 - t), t});
            rule.weights.push_back(line.weights[i] * line.weights[j] * (1 - t));
        }
    }
    return rule;
}

/// Cell rule used throughout the solver: 16 points, exact through total degree 6.
template <typename Scalar = double>
TriangleRule<Scalar> cell_rule()
{
    return collapsed_gauss_triangle<Scalar>(4);
}

/// Facet rule used throughout the solver: exact through degree 7.
template <typename Scalar = double>
LineRule<Scalar> facet_rule()
{
    return gauss_legendre<Scalar>(4);
}

} // namespace slipflow
