#include "slipflow/solver.hpp"

#include <Eigen/OrderingMethods>

#include <cmath>
#include <ostream>
#include <sstream>

namespace slipflow {

void NewtonConfig::validate() const
{
    if (!(abs_tol > 0) || !(rel_tol > 0))
        throw ConfigError("Newton tolerances must be positive");
    if (!(backtrack > 0 && backtrack < 1))
        throw ConfigError("line-search factor must lie in (0, 1)");
    if (max_iter < 1 || max_halvings < 0)
        throw ConfigError("Newton iteration limits must be positive");
    if (!(reuse_contraction > 0 && reuse_contraction < 1))
        throw ConfigError("Jacobian reuse contraction must lie in (0, 1)");
}

struct DirectSolver::Impl {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    Eigen::Index rows = -1;
    Eigen::Index nonzeros = -1;
    bool valid = false;
    int count = 0;
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::factorize(const SparseMatrix& a)
{
    if (a.rows() != impl_->rows || a.nonZeros() != impl_->nonzeros) {
        impl_->lu.analyzePattern(a);
        impl_->rows = a.rows();
        impl_->nonzeros = a.nonZeros();
    }
    impl_->valid = false;
    impl_->lu.factorize(a);
    if (impl_->lu.info() != Eigen::Success)
        throw SingularMatrixError("sparse LU factorization failed: " + impl_->lu.lastErrorMessage());
    impl_->valid = true;
    ++impl_->count;
}

bool DirectSolver::factorized() const { return impl_->valid; }
Eigen::Index DirectSolver::size() const { return impl_->rows; }
void DirectSolver::invalidate() { impl_->valid = false; }
int DirectSolver::factorizations() const { return impl_->count; }

VectorX DirectSolver::solve(const VectorX& b) const
{
    VectorX x = impl_->lu.solve(b);
    if (impl_->lu.info() != Eigen::Success)
        throw SingularMatrixError("sparse LU solve failed");
    return x;
}

NewtonResult newton_solve(const NitscheOperator& op, const StepContext& step, VectorX x0, const NewtonConfig& config,
                          int step_index, DirectSolver* solver)
{
    config.validate();
    DirectSolver local;
    DirectSolver& lu = solver ? *solver : local;

    NewtonResult out{std::move(x0), {}};
    VectorX& x = out.x;
    ConvergenceReport& rep = out.report;
    op.apply_dirichlet(x, step.time);

    VectorX r;
    SparseMatrix j;
    op.assemble(x, step, &r, nullptr);
    double norm = r.norm();
    rep.initial_residual = norm;
    const double target = std::max(config.abs_tol, config.rel_tol * norm);
    if (config.log)
        *config.log << "step " << step_index << " iter 0 resid " << norm << " ls 0\n";

    if (!config.reuse_jacobian || lu.size() != op.size())
        lu.invalidate();
    while (norm > target && rep.iterations < config.max_iter) {
        const bool fresh = !lu.factorized();
        if (fresh) {
            op.assemble(x, step, nullptr, &j);
            lu.factorize(j);
            ++rep.factorizations;
        }
        const VectorX dx = lu.solve(r);
        if (!dx.allFinite())
            throw SingularMatrixError("Newton update is not finite");

        double s = 1;
        int halvings = 0;
        VectorX trial = x - dx;
        VectorX rt = op.residual(trial, step);
        while (!(rt.norm() < norm) && halvings < config.max_halvings) {
            s *= config.backtrack;
            ++halvings;
            trial = x - s * dx;
            rt = op.residual(trial, step);
        }
        if (!fresh && !(rt.norm() < norm)) {
            // A stale Jacobian gave no descent: retry with a fresh one.
            lu.invalidate();
            continue;
        }
        const double previous = norm;
        x = std::move(trial);
        r = std::move(rt);
        norm = r.norm();
        ++rep.iterations;
        rep.halvings += halvings;
        if (!config.reuse_jacobian || norm > config.reuse_contraction * previous)
            lu.invalidate();
        if (config.log)
            *config.log << "step " << step_index << " iter " << rep.iterations << " resid " << norm << " ls "
                        << halvings << '\n';
        if (!std::isfinite(norm))
            break;
    }
    rep.final_residual = norm;
    rep.converged = norm <= target;
    if (!rep.converged) {
        std::ostringstream msg;
        msg << "Newton did not converge in " << rep.iterations << " iterations (residual " << norm << ", target "
            << target << ")";
        throw DivergenceError(msg.str(), x, rep);
    }
    return out;
}

SteadyResult steady_solve(const TaylorHoodSpace& space, const std::function<FlowProblem(double)>& family,
                          const std::vector<double>& schedule, const NewtonConfig& config, const VectorX* initial)
{
    if (schedule.empty())
        throw ConfigError("continuation schedule is empty");
    SteadyResult out;
    VectorX x;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const double load = schedule[k];
        const NitscheOperator op(space, family(load));
        if (k == 0)
            x = initial ? *initial : VectorX::Zero(op.size());
        try {
            auto res = newton_solve(op, StepContext::steady(), std::move(x), config, static_cast<int>(k));
            x = std::move(res.x);
            out.stages.push_back(res.report);
        } catch (const DivergenceError& e) {
            std::ostringstream msg;
            msg << "continuation failed at load " << load << ": " << e.what();
            throw ContinuationError(msg.str(), load);
        }
        if (k + 1 == schedule.size())
            out.state = op.unpack(x);
    }
    return out;
}

int step_count(double final_time, double dt)
{
    if (!(dt > 0) || !(final_time > 0))
        throw ConfigError("final time and time step must be positive");
    const double ratio = final_time / dt;
    const double steps = std::round(ratio);
    if (steps < 1 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError("final time must be a multiple of the time step");
    return static_cast<int>(steps);
}

Trajectory time_march(const NitscheOperator& op, const SystemState& initial, const MarchOptions& options,
                      const NewtonConfig& config)
{
    const int steps = step_count(options.final_time, options.dt);
    const TaylorHoodSpace& space = op.space();
    const SlipLaw& law = op.problem().law;

    Trajectory traj;
    const auto record = [&](double t, const SystemState& s, double dt) {
        traj.times.push_back(t);
        if (options.record_wall)
            traj.wall.push_back(boundary_functionals(space, law, s.u, {t, dt}));
        std::vector<Vec2> values;
        for (const auto& p : options.probes)
            values.push_back(evaluate_velocity_at(space, s.u, p));
        traj.probe_values.push_back(std::move(values));
    };

    SystemState state = initial;
    record(0.0, state, 0.0);
    DirectSolver lu;
    VectorX x = op.pack(state);
    for (int j = 1; j <= steps; ++j) {
        const double t = j * options.dt;
        StepContext step{t, options.dt, state.u};
        try {
            auto res = newton_solve(op, step, x, config, j, &lu);
            x = std::move(res.x);
            traj.reports.push_back(res.report);
        } catch (const std::runtime_error& e) {
            throw TimeStepError("time step " + std::to_string(j) + " failed: " + e.what(), j);
        }
        state = op.unpack(x);
        record(t, state, options.dt);
        if (options.record_energy) {
            traj.energy_residual.push_back(energy_balance(op, state, step).relative_residual());
            traj.penalty_form.push_back(penalty_quadratic_form(space, state.u, op.alpha()));
        }
    }
    traj.final_state = std::move(state);
    return traj;
}

} // namespace slipflow
