#pragma once

#include "slipflow/fespace.hpp"
#include "slipflow/forms.hpp"
#include "slipflow/mesh.hpp"
#include "slipflow/slip_law.hpp"
#include "slipflow/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace slipflow {

enum class TimeScaling {
    none,  ///< u(x, t) = u_hat(x)
    linear ///< u(x, t) = t u_hat(x), p(x, t) = t p_hat(x)
};

/// Analytic velocity/pressure pair with the derivatives needed for forcing
/// synthesis and error measurement.
struct ManufacturedSolution {
    std::string name;
    double amplitude = 1;
    TimeScaling scaling = TimeScaling::none;

    VectorField velocity;
    MatrixField gradient; ///< gradient(i, j) = d u_i / d x_j
    VectorField laplacian;
    ScalarField pressure;
    VectorField pressure_gradient;
    VectorField time_derivative;

    ExactFields exact() const { return {velocity, gradient, pressure}; }
    /// Same solution multiplied by t (pressure included).
    ManufacturedSolution time_scaled() const;
};

/// Lambda [sin(pi x) cos(pi y), -cos(pi x) sin(pi y)], p = Lambda/4 (cos 2 pi x + sin 2 pi y).
ManufacturedSolution taylor_green(double amplitude);

/// Lambda [20 x^2 (x-1)^2 y (y-1)(2y-1), -20 x (x-1)(2x-1) y^2 (y-1)^2],
/// p = 20 Lambda (2x - 1)(2y - 1); vanishes on the boundary of the unit square.
ManufacturedSolution polynomial_vortex(double amplitude);

/// f = d_t u - nu lap u + (u . grad) u + grad p (the last convective term only
/// when `include_convection`).
VectorField forcing(const ManufacturedSolution& sol, double nu, bool include_convection);

/// Wall traction -2 nu (Du n)_tau of the exact solution.
TractionField exact_traction(const ManufacturedSolution& sol, double nu);

/// Additive tangential traction g = -2 nu (Du n)_tau - sigma_law(u_tau) that
/// makes the exact solution satisfy the slip law on the slip boundary.
TractionField boundary_correction(const ManufacturedSolution& sol, const SlipLaw& law, double nu);

struct ConvergenceSpec {
    ManufacturedSolution solution = taylor_green(1.0);
    SlipLaw law = navier(1.0);
    NitscheConfig config;
    Diagonal diagonal = Diagonal::right;
    bool boundary_correction = true;
    NewtonConfig newton;
};

struct ConvergenceLevel {
    int n = 0;
    double h = 0;
    ErrorNorms errors;
    int dofs = 0;
};

struct ConvergenceTable {
    std::vector<ConvergenceLevel> levels;

    /// Observed order of each error between consecutive levels; entry 0 is NaN.
    std::vector<double> rates(double ErrorNorms::*member) const;
    /// Columns n,h,err_L2_u,err_H1_u,err_L2_p,err_L2_un,rate_L2_u,rate_H1_u,rate_L2_p,rate_L2_un.
    void write_csv(std::ostream& os) const;
};

/// Steady solves on the unit square with top-wall slip and Dirichlet data from
/// the exact solution, one per level. Levels must be increasing and nested
/// (each n divides the next) with at least three entries.
ConvergenceTable convergence_study(const std::vector<int>& levels, const ConvergenceSpec& spec);

/// Builds the steady problem used by convergence_study on a given space.
FlowProblem manufactured_problem(const ConvergenceSpec& spec);

/// Difference of the domain means of the exact and discrete pressures.
double pressure_mean_offset(const TaylorHoodSpace& space, const VectorX& p, const ScalarField& exact, double t);

} // namespace slipflow
