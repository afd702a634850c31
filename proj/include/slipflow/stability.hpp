#pragma once

#include "slipflow/fespace.hpp"
#include "slipflow/forms.hpp"
#include "slipflow/slip_law.hpp"

#include <functional>
#include <vector>

namespace slipflow {

struct EigenPair {
    double value = 0;
    VectorX vector;
};

/// The `count` smallest eigenpairs of A x = lambda M x with A symmetric and M
/// symmetric positive definite, by dense factorization. Vectors are M-normalized.
std::vector<EigenPair> dense_smallest_eigenpairs(const MatrixX& a, const MatrixX& m, int count);

struct SubspaceOptions {
    int block = 8;
    int max_iter = 500;
    double tol = 1e-12;
    unsigned seed = 2024;
};

/// Subspace iteration for a symmetric pencil A x = lambda M x. `solve` applies
/// the iteration operator (e.g. (A + s M)^{-1} for the low end of the
/// spectrum, or M^{-1} A for the high end); Rayleigh-Ritz on the iterated
/// block uses `apply_a` and `m`. Returns the `count` smallest Ritz pairs when
/// `largest` is false, else the largest, sorted ascending.
std::vector<EigenPair> subspace_eigenpairs(const std::function<MatrixX(const MatrixX&)>& solve,
                                           const std::function<MatrixX(const MatrixX&)>& apply_a,
                                           const SparseMatrix& m, int count, bool largest,
                                           const SubspaceOptions& options = {});

/// Largest c with h_F^{1/2} |v|_{L2(F)} <= c |v|_{L2(K)} for scalar P2
/// functions, over all boundary facets F and their cells K.
double inverse_trace_constant(const TaylorHoodSpace& space);

struct KornResult {
    double min_eig = 0;
    VectorX witness; ///< eigenvector of min_eig, H1-normalized
};

/// Smallest eigenvalue of (Du, Dv) + <u.n, v.n>_slip against the full H1
/// inner product on the unconstrained velocity space. Zero means a rigid
/// motion with vanishing normal trace on the slip boundary survives.
KornResult korn_normal_trace_min_eig(const TaylorHoodSpace& space);

/// Discrete inf-sup constant of the velocity/pressure pair with homogeneous
/// Dirichlet velocity on the whole boundary, sqrt of the smallest eigenvalue of
/// B K^{-1} B^T q = lambda M_p q on mean-zero pressures.
double infsup_constant(const TaylorHoodSpace& space);

/// Best constant of |v|_{L2(slip)} <= c |v|_{X_h} on velocities vanishing on
/// the Dirichlet boundary, |v|_{X_h}^2 = |Dv|^2 + |h^{-1/2} v.n|^2_{slip}.
double trace_korn_constant(const TaylorHoodSpace& space);

/// Penalty from the stability rule with safety factor 1.1 and d = 2:
/// alpha = 1.1 * 2 (c_l d c_tr^2 + lambda) / (c_l - lambda), c_l = 2 nu / c_trK^2.
/// A configured alpha is returned unchanged. Throws StabilityError when the
/// law's lambda is not below c_l.
double resolve_alpha(const NitscheConfig& config, const SlipLaw& law, double c_tr, double c_trk);

struct ConstantsReport {
    double c_tr = 0;
    double c_trk = 0;
    double korn_min_eig = 0;
    double infsup = 0;
    double alpha_auto = 0;
};

ConstantsReport compute_constants(const TaylorHoodSpace& space, const NitscheConfig& config, const SlipLaw& law);

} // namespace slipflow
