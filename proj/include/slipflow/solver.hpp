#pragma once

#include "slipflow/forms.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <vector>

namespace slipflow {

struct NewtonConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_iter = 30;
    double backtrack = 0.5; ///< step reduction factor of the line search
    int max_halvings = 8;
    /// Keep the factorized Jacobian across iterations (and across calls that
    /// share a DirectSolver) while each step cuts the residual by at least
    /// `reuse_contraction`; convergence is always measured on the exact residual.
    bool reuse_jacobian = false;
    double reuse_contraction = 0.25;
    std::ostream* log = nullptr; ///< receives `step j iter k resid r ls m` lines

    void validate() const;
};

struct ConvergenceReport {
    int iterations = 0;
    int halvings = 0; ///< line-search reductions summed over all iterations
    int factorizations = 0;
    double initial_residual = 0;
    double final_residual = 0;
    bool converged = false;
};

/// Newton did not reach the tolerance; carries the last iterate so a caller
/// can retry, e.g. with a finer continuation schedule.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, VectorX last_iterate, ConvergenceReport report)
        : std::runtime_error(what), last_iterate(std::move(last_iterate)), report(report)
    {
    }
    VectorX last_iterate;
    ConvergenceReport report;
};

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sparse LU factorization that keeps the symbolic analysis while the
/// sparsity pattern is unchanged.
class DirectSolver {
public:
    DirectSolver();
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    void factorize(const SparseMatrix& a);
    VectorX solve(const VectorX& b) const;
    bool factorized() const;
    Eigen::Index size() const;
    void invalidate();
    int factorizations() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct NewtonResult {
    VectorX x;
    ConvergenceReport report;
};

/// Solves R(x) = 0 from `x0` after overwriting its Dirichlet dofs with the
/// boundary data at step.time. `step_index` only labels log lines; `solver`
/// may be shared across calls to reuse the symbolic factorization.
NewtonResult newton_solve(const NitscheOperator& op, const StepContext& step, VectorX x0, const NewtonConfig& config,
                          int step_index = 0, DirectSolver* solver = nullptr);

/// Steady solution reached by ramping the load parameter through `schedule`;
/// `family(load)` returns the problem at that load. Each stage starts from
/// the previous stage's solution.
class ContinuationError : public std::runtime_error {
public:
    ContinuationError(const std::string& what, double load) : std::runtime_error(what), load(load) {}
    double load;
};

struct SteadyResult {
    SystemState state;
    std::vector<ConvergenceReport> stages;
};

SteadyResult steady_solve(const TaylorHoodSpace& space, const std::function<FlowProblem(double)>& family,
                          const std::vector<double>& schedule, const NewtonConfig& config,
                          const VectorX* initial = nullptr);

struct MarchOptions {
    double final_time = 1;
    double dt = 0.005;
    std::vector<Vec2> probes;
    bool record_wall = true;
    bool record_energy = true;
};

/// Backward Euler trajectory on the uniform grid t_j = j dt, j = 0..m.
/// Index 0 of every series holds the initial state; energy terms start at j = 1.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<WallSample>> wall;
    std::vector<std::vector<Vec2>> probe_values; ///< [step][probe]
    std::vector<double> energy_residual;         ///< relative residual of the energy balance
    std::vector<double> penalty_form;            ///< penalty_quadratic_form of each step's velocity
    std::vector<ConvergenceReport> reports;
    SystemState final_state;
};

class TimeStepError : public std::runtime_error {
public:
    TimeStepError(const std::string& what, int step) : std::runtime_error(what), step(step) {}
    int step;
};

/// Number of steps of a march; throws ConfigError unless final_time is a
/// positive multiple of dt (relative tolerance 1e-9).
int step_count(double final_time, double dt);

Trajectory time_march(const NitscheOperator& op, const SystemState& initial, const MarchOptions& options,
                      const NewtonConfig& config);

} // namespace slipflow
