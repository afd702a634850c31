#include "slipflow/verify.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace slipflow {

using std::numbers::pi;

ManufacturedSolution ManufacturedSolution::time_scaled() const
{
    if (scaling != TimeScaling::none)
        throw ConfigError("solution is already time scaled");
    ManufacturedSolution base = *this;
    ManufacturedSolution s = *this;
    s.scaling = TimeScaling::linear;
    s.velocity = [base](const Vec2& x, double t) -> Vec2 { return t * base.velocity(x, t); };
    s.gradient = [base](const Vec2& x, double t) -> Mat2 { return t * base.gradient(x, t); };
    s.laplacian = [base](const Vec2& x, double t) -> Vec2 { return t * base.laplacian(x, t); };
    s.pressure = [base](const Vec2& x, double t) { return t * base.pressure(x, t); };
    s.pressure_gradient = [base](const Vec2& x, double t) -> Vec2 { return t * base.pressure_gradient(x, t); };
    s.time_derivative = [base](const Vec2& x, double t) -> Vec2 { return base.velocity(x, t); };
    return s;
}

ManufacturedSolution taylor_green(double a)
{
    if (!(a > 0))
        throw ConfigError("amplitude must be positive");
    ManufacturedSolution s;
    s.name = "taylor_green";
    s.amplitude = a;
    s.velocity = [a](const Vec2& x, double) -> Vec2 {
        return a * Vec2(std::sin(pi * x.x()) * std::cos(pi * x.y()), -std::cos(pi * x.x()) * std::sin(pi * x.y()));
    };
    s.gradient = [a](const Vec2& x, double) -> Mat2 {
        const double sx = std::sin(pi * x.x()), cx = std::cos(pi * x.x());
        const double sy = std::sin(pi * x.y()), cy = std::cos(pi * x.y());
        Mat2 g;
        g << pi * cx * cy, -pi * sx * sy, pi * sx * sy, -pi * cx * cy;
        return a * g;
    };
    s.laplacian = [s](const Vec2& x, double t) -> Vec2 { return -2 * pi * pi * s.velocity(x, t); };
    s.pressure = [a](const Vec2& x, double) { return a / 4 * (std::cos(2 * pi * x.x()) + std::sin(2 * pi * x.y())); };
    s.pressure_gradient = [a](const Vec2& x, double) -> Vec2 {
        return a * pi / 2 * Vec2(-std::sin(2 * pi * x.x()), std::cos(2 * pi * x.y()));
    };
    s.time_derivative = [](const Vec2&, double) -> Vec2 { return Vec2::Zero(); };
    return s;
}

ManufacturedSolution polynomial_vortex(double a)
{
    if (!(a > 0))
        throw ConfigError("amplitude must be positive");
    // u = 20 a [F(x) G'(y), -F'(x) G(y)] with F(s) = s^2 (s-1)^2, G(s) = F(s), written
    // out through f(s) = s^2 (s-1)^2 and g(s) = s (s-1)(2s-1) = f'(s) / 2.
    const auto f = [](double s) { return s * s * (s - 1) * (s - 1); };
    const auto g = [](double s) { return s * (s - 1) * (2 * s - 1); };
    const auto dg = [](double s) { return 6 * s * s - 6 * s + 1; };
    const auto d2g = [](double s) { return 12 * s - 6; };
    // f' = 2 g
    ManufacturedSolution s;
    s.name = "polynomial";
    s.amplitude = a;
    s.velocity = [=](const Vec2& x, double) -> Vec2 {
        return 20 * a * Vec2(f(x.x()) * g(x.y()), -g(x.x()) * f(x.y()));
    };
    s.gradient = [=](const Vec2& x, double) -> Mat2 {
        Mat2 m;
        m << 2 * g(x.x()) * g(x.y()), f(x.x()) * dg(x.y()), -dg(x.x()) * f(x.y()), -2 * g(x.x()) * g(x.y());
        return 20 * a * m;
    };
    s.laplacian = [=](const Vec2& x, double) -> Vec2 {
        // f'' = 2 g'
        const double lx = 2 * dg(x.x()) * g(x.y()) + f(x.x()) * d2g(x.y());
        const double ly = -(d2g(x.x()) * f(x.y()) + g(x.x()) * 2 * dg(x.y()));
        return 20 * a * Vec2(lx, ly);
    };
    s.pressure = [a](const Vec2& x, double) { return 20 * a * (2 * x.x() - 1) * (2 * x.y() - 1); };
    s.pressure_gradient = [a](const Vec2& x, double) -> Vec2 {
        return 40 * a * Vec2(2 * x.y() - 1, 2 * x.x() - 1);
    };
    s.time_derivative = [](const Vec2&, double) -> Vec2 { return Vec2::Zero(); };
    return s;
}

VectorField forcing(const ManufacturedSolution& sol, double nu, bool include_convection)
{
    return [sol, nu, include_convection](const Vec2& x, double t) -> Vec2 {
        Vec2 f = sol.time_derivative(x, t) - nu * sol.laplacian(x, t) + sol.pressure_gradient(x, t);
        if (include_convection)
            f += sol.gradient(x, t) * sol.velocity(x, t);
        return f;
    };
}

TractionField exact_traction(const ManufacturedSolution& sol, double nu)
{
    return [sol, nu](const Vec2& x, const Vec2& n, double t) -> Vec2 {
        const Mat2 d = sym(sol.gradient(x, t));
        return -2 * nu * tangential_projector(n) * (d * n);
    };
}

TractionField boundary_correction(const ManufacturedSolution& sol, const SlipLaw& law, double nu)
{
    const TractionField exact = exact_traction(sol, nu);
    return [sol, law, exact](const Vec2& x, const Vec2& n, double t) -> Vec2 {
        const Mat2 proj = tangential_projector(n);
        const Vec2 u_tau = proj * sol.velocity(x, t);
        return exact(x, n, t) - proj * law.traction(u_tau, {t, 0.0});
    };
}

double pressure_mean_offset(const TaylorHoodSpace& space, const VectorX& p, const ScalarField& exact, double t)
{
    const auto& rule = space.cell_quadrature();
    double exact_integral = 0, area = 0;
    for (int c = 0; c < space.mesh().num_cells(); ++c) {
        const CellMap& map = space.cell_map(c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            exact_integral += rule.weights[q] * map.det * exact(map.origin + map.jacobian * rule.points[q], t);
            area += rule.weights[q] * map.det;
        }
    }
    return (exact_integral - integrate_pressure(space, p)) / area;
}

FlowProblem manufactured_problem(const ConvergenceSpec& spec)
{
    FlowProblem pb;
    pb.config = spec.config;
    pb.law = spec.law;
    pb.forcing = forcing(spec.solution, spec.config.nu, spec.config.include_convection);
    pb.dirichlet = spec.solution.velocity;
    if (spec.boundary_correction)
        pb.slip_correction = boundary_correction(spec.solution, spec.law, spec.config.nu);
    return pb;
}

std::vector<double> ConvergenceTable::rates(double ErrorNorms::*member) const
{
    std::vector<double> out(levels.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 1; k < levels.size(); ++k)
        out[k] = std::log(levels[k - 1].errors.*member / levels[k].errors.*member)
            / std::log(levels[k - 1].h / levels[k].h);
    return out;
}

void ConvergenceTable::write_csv(std::ostream& os) const
{
    const auto l2u = rates(&ErrorNorms::l2_velocity);
    const auto h1u = rates(&ErrorNorms::h1_velocity);
    const auto l2p = rates(&ErrorNorms::l2_pressure);
    const auto un = rates(&ErrorNorms::l2_normal);
    os << "n,h,err_L2_u,err_H1_u,err_L2_p,err_L2_un,rate_L2_u,rate_H1_u,rate_L2_p,rate_L2_un\n";
    const auto prec = os.precision(10);
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto& l = levels[k];
        os << l.n << ',' << l.h << ',' << l.errors.l2_velocity << ',' << l.errors.h1_velocity << ','
           << l.errors.l2_pressure << ',' << l.errors.l2_normal;
        for (const auto* r : {&l2u, &h1u, &l2p, &un}) {
            os << ',';
            if (k > 0)
                os << (*r)[k];
        }
        os << '\n';
    }
    os.precision(prec);
}

ConvergenceTable convergence_study(const std::vector<int>& levels, const ConvergenceSpec& spec)
{
    if (levels.size() < 3)
        throw ConfigError("a convergence study needs at least three levels");
    for (std::size_t k = 1; k < levels.size(); ++k)
        if (levels[k] <= levels[k - 1] || levels[k] % levels[k - 1] != 0)
            throw ConfigError("convergence levels must be increasing and nested");
    if (!spec.config.alpha)
        throw ConfigError("convergence study needs a resolved penalty");

    ConvergenceTable table;
    const FlowProblem problem = manufactured_problem(spec);
    for (int n : levels) {
        const TaylorHoodSpace space(build_unit_square(n, spec.diagonal).tag_boundary(top_wall_predicate()));
        const NitscheOperator op(space, problem);
        auto res = newton_solve(op, StepContext::steady(), VectorX::Zero(op.size()), spec.newton);
        SystemState state = op.unpack(res.x);
        state.p.array() += pressure_mean_offset(space, state.p, spec.solution.pressure, 0.0);
        table.levels.push_back({n, 1.0 / n, error_norms(space, state, spec.solution.exact(), 0.0), op.size()});
    }
    return table;
}

} // namespace slipflow
