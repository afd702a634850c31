#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <stdexcept>
#include <string>

namespace slipflow {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2 = Vector2<double>;
using Mat2 = Matrix2<double>;
using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Vector-valued function of position and time.
using VectorField = std::function<Vec2(const Vec2& x, double t)>;
/// Scalar-valued function of position and time.
using ScalarField = std::function<double(const Vec2& x, double t)>;
/// Boundary traction depending on position, outward unit normal and time.
using TractionField = std::function<Vec2(const Vec2& x, const Vec2& n, double t)>;

/// Invalid or inconsistent user configuration (unknown names, bad parameters,
/// untagged facets, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violation of a discrete stability hypothesis (e.g. the monotonicity defect
/// of a slip law exceeds what the penalty can absorb).
class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Symmetric part of a 2x2 matrix.
template <typename Derived>
auto sym(const Eigen::MatrixBase<Derived>& a)
{
    return (0.5 * (a + a.transpose())).eval();
}

/// Tangential projection I - n n^T.
template <typename Scalar>
Matrix2<Scalar> tangential_projector(const Vector2<Scalar>& n)
{
    return Matrix2<Scalar>::Identity() - n * n.transpose();
}

} // namespace slipflow
