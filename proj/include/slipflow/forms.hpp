#pragma once

#include "slipflow/fespace.hpp"
#include "slipflow/slip_law.hpp"
#include "slipflow/types.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace slipflow {

enum class NitscheVariant { symmetric, antisymmetric };
enum class MeanPressureMode { multiplier, pinned };

struct NitscheConfig {
    double nu = 1.0;
    /// Nitsche penalty; std::nullopt selects the automatic rule (see
    /// resolve_alpha), which must be applied before assembly.
    std::optional<double> alpha = 10.0;
    NitscheVariant variant = NitscheVariant::symmetric;
    /// Boundary-mass coefficient of the time derivative on slip facets. A
    /// dynamic slip law supplies its own beta_star, which takes precedence.
    double beta = 0.0;
    bool include_convection = true;
    MeanPressureMode mean_pressure = MeanPressureMode::multiplier;
};

/// Everything that defines the discrete equations apart from the mesh.
/// Empty fields are treated as zero.
struct FlowProblem {
    NitscheConfig config;
    SlipLaw law = navier(0.0);
    VectorField forcing;
    VectorField dirichlet;
    /// Additive tangential traction <g, v_tau> on slip facets, used for
    /// manufactured-solution verification.
    TractionField slip_correction;
};

/// Per-step data. `dt` empty selects the steady equations.
struct StepContext {
    double time = 0;
    std::optional<double> dt;
    VectorX u_old;

    static StepContext steady(double time = 0) { return {time, std::nullopt, {}}; }
};

/// Residual and Jacobian of the fully discrete Nitsche system.
///
/// Unknown layout: [velocity (interleaved) | pressure | multiplier]. The
/// multiplier is present only in MeanPressureMode::multiplier; in pinned mode
/// the continuity row of pressure dof 0 is replaced by p_0 = 0.
class NitscheOperator {
public:
    NitscheOperator(const TaylorHoodSpace& space, FlowProblem problem);

    const TaylorHoodSpace& space() const { return *space_; }
    const FlowProblem& problem() const { return problem_; }
    double alpha() const { return alpha_; }
    /// Boundary-mass coefficient actually used in the time term.
    double beta_effective() const;

    int size() const { return size_; }
    int pressure_offset() const { return space_->num_velocity_dofs(); }
    int multiplier_index() const { return has_multiplier_ ? size_ - 1 : -1; }

    VectorX pack(const SystemState& state) const;
    SystemState unpack(const VectorX& x) const;

    /// Overwrites Dirichlet velocity dofs with the boundary data at time t.
    void apply_dirichlet(VectorX& x, double t) const;
    const std::vector<bool>& dirichlet_rows() const { return dirichlet_row_; }

    VectorX residual(const VectorX& x, const StepContext& step) const;
    SparseMatrix jacobian(const VectorX& x, const StepContext& step) const;
    void assemble(const VectorX& x, const StepContext& step, VectorX* residual, SparseMatrix* jacobian) const;

    /// Symbolic Jacobian pattern from cell connectivity (all values zero).
    const SparseMatrix& pattern() const { return pattern_; }

private:
    void check_step(const StepContext& step) const;

    const TaylorHoodSpace* space_;
    FlowProblem problem_;
    double alpha_ = 0;
    int size_ = 0;
    bool has_multiplier_ = true;
    std::vector<bool> dirichlet_row_;
    VectorX pressure_integrals_;
    SparseMatrix pattern_;
    // Per cell, 15 x 15 positions into pattern_.valuePtr() (-1 for skipped rows).
    std::vector<std::array<int, 225>> cell_positions_;
    std::vector<int> dirichlet_diag_positions_;
    std::vector<int> multiplier_row_positions_; // (m, p_k)
    std::vector<int> multiplier_col_positions_; // (p_k, m)
    int pinned_position_ = -1;
};

/// Skew-symmetrized convective trilinear form
/// 1/2 ( (u . grad v) . w - (u . grad w) . v ) integrated over the domain.
double trilinear_skew(const TaylorHoodSpace& space, const VectorX& u, const VectorX& v, const VectorX& w);

/// Unsymmetrized convective form (u . grad v) . w plus nothing on the boundary.
double trilinear_convective(const TaylorHoodSpace& space, const VectorX& u, const VectorX& v, const VectorX& w);

/// One sample of the computed wall state at a slip-facet quadrature point.
struct WallSample {
    Vec2 x;
    double u_tau = 0; ///< |u_tau|
    double sigma = 0; ///< |sigma(u_tau)|
    double un = 0;    ///< u . n
};

/// Wall samples at every slip-facet quadrature point, ordered by x then y.
std::vector<WallSample> boundary_functionals(const TaylorHoodSpace& space, const SlipLaw& law, const VectorX& u,
                                             SlipTime time);

/// Terms of the discrete energy balance obtained by testing with the
/// solution itself:
/// (d_t u, u)_B + 2 nu |Du|^2 + nitsche_cross + <sigma, u_tau> + nu alpha |h^-1/2 u.n|^2 - (f, u) = 0.
struct EnergyBalance {
    double time_term = 0;
    double viscous = 0;
    double nitsche_cross = 0; ///< -4 nu <(Du n).n, u.n> (symmetric) or 0 (antisymmetric)
    double slip_work = 0;
    double penalty = 0;
    double forcing_work = 0;
    double correction_work = 0;

    double residual() const
    {
        return time_term + viscous + nitsche_cross + slip_work + penalty - forcing_work + correction_work;
    }
    /// |residual| relative to the largest term.
    double relative_residual() const;
};

EnergyBalance energy_balance(const NitscheOperator& op, const SystemState& state, const StepContext& step);

/// 2 |Du|^2 - 4 <(Du n).n, u.n> + alpha |h^-1/2 u.n|^2 over slip facets.
double penalty_quadratic_form(const TaylorHoodSpace& space, const VectorX& u, double alpha);

// Bilinear-form matrices over the full (unconstrained) velocity space.
SparseMatrix velocity_mass_matrix(const TaylorHoodSpace& space);
SparseMatrix velocity_gradient_matrix(const TaylorHoodSpace& space);           ///< (grad u, grad v)
SparseMatrix symmetric_gradient_matrix(const TaylorHoodSpace& space);          ///< (Du, Dv)
SparseMatrix slip_trace_mass_matrix(const TaylorHoodSpace& space);             ///< <u, v> on slip facets
SparseMatrix slip_normal_mass_matrix(const TaylorHoodSpace& space, bool inverse_h_weight); ///< <u.n, v.n>
SparseMatrix divergence_matrix(const TaylorHoodSpace& space);                  ///< rows q: (div v, q)
SparseMatrix pressure_mass_matrix(const TaylorHoodSpace& space);

/// Coordinate text export, one `row col value` line per stored entry.
void write_coo(std::ostream& os, const SparseMatrix& m);

} // namespace slipflow
