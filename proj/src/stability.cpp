#include "slipflow/stability.hpp"

#include "slipflow/reference_element.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace slipflow {

namespace {

// Dense solves up to this size, subspace iteration beyond.
constexpr int kDenseLimit = 1500;

std::vector<EigenPair> ritz_pairs(const MatrixX& a, const MatrixX& m, const MatrixX& basis, int count, bool largest)
{
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX> es(a, m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("generalized eigensolver failed");
    const int n = static_cast<int>(a.rows());
    const int first = largest ? n - count : 0;
    std::vector<EigenPair> out;
    for (int i = first; i < first + count; ++i)
        out.push_back({es.eigenvalues()(i), basis * es.eigenvectors().col(i)});
    return out;
}

/// Restriction of a sparse matrix to a set of rows/columns.
SparseMatrix restrict_to(const SparseMatrix& a, const std::vector<int>& keep)
{
    std::vector<int> map(a.rows(), -1);
    for (int i = 0; i < static_cast<int>(keep.size()); ++i)
        map[keep[i]] = i;
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < a.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(a, c); it; ++it)
            if (map[it.row()] >= 0 && map[it.col()] >= 0)
                trip.emplace_back(map[it.row()], map[it.col()], it.value());
    SparseMatrix r(keep.size(), keep.size());
    r.setFromTriplets(trip.begin(), trip.end());
    return r;
}

std::vector<int> free_velocity_dofs(const TaylorHoodSpace& space, const std::vector<bool>& constrained_node)
{
    std::vector<int> keep;
    for (int node = 0; node < space.num_nodes(); ++node)
        if (!constrained_node[node]) {
            keep.push_back(2 * node);
            keep.push_back(2 * node + 1);
        }
    return keep;
}

} // namespace

std::vector<EigenPair> dense_smallest_eigenpairs(const MatrixX& a, const MatrixX& m, int count)
{
    return ritz_pairs(a, m, MatrixX::Identity(a.rows(), a.rows()), count, false);
}

std::vector<EigenPair> subspace_eigenpairs(const std::function<MatrixX(const MatrixX&)>& solve,
                                           const std::function<MatrixX(const MatrixX&)>& apply_a,
                                           const SparseMatrix& m, int count, bool largest,
                                           const SubspaceOptions& options)
{
    const int n = static_cast<int>(m.rows());
    const int block = std::min(n, std::max(options.block, count + 2));
    std::mt19937 rng(options.seed);
    std::uniform_real_distribution<double> dist(-1, 1);
    MatrixX x(n, block);
    for (int j = 0; j < block; ++j)
        for (int i = 0; i < n; ++i)
            x(i, j) = dist(rng);

    std::vector<EigenPair> pairs;
    VectorX previous = VectorX::Constant(count, std::numeric_limits<double>::infinity());
    for (int it = 0; it < options.max_iter; ++it) {
        MatrixX y = solve(x);
        // Orthonormalize for conditioning of the projected pencil.
        Eigen::HouseholderQR<MatrixX> qr(y);
        y = qr.householderQ() * MatrixX::Identity(n, block);
        const MatrixX ay = apply_a(y);
        const MatrixX my = m * y;
        MatrixX ar = y.transpose() * ay;
        MatrixX mr = y.transpose() * my;
        ar = 0.5 * (ar + ar.transpose()).eval();
        mr = 0.5 * (mr + mr.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX> es(ar, mr);
        x = y * es.eigenvectors();
        VectorX current(count);
        pairs.clear();
        for (int k = 0; k < count; ++k) {
            const int i = largest ? block - count + k : k;
            current(k) = es.eigenvalues()(i);
            pairs.push_back({current(k), x.col(i)});
        }
        const double scale = std::max(current.cwiseAbs().maxCoeff(), 1e-300);
        if ((current - previous).cwiseAbs().maxCoeff() <= options.tol * scale)
            break;
        previous = current;
    }
    return pairs;
}

double inverse_trace_constant(const TaylorHoodSpace& space)
{
    const Mesh& mesh = space.mesh();
    const auto& rule = space.cell_quadrature();
    const auto& frule = space.facet_quadrature();
    double worst = 0;
    for (const Facet& f : mesh.facets()) {
        const double det = std::abs(mesh.jacobian(f.cell).determinant());
        if (!(det > 0))
            throw ConfigError("degenerate cell " + std::to_string(f.cell));
        Eigen::Matrix<double, 6, 6> mk = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 6> mf = Eigen::Matrix<double, 6, 6>::Zero();
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto phi = p2_values(rule.points[q]);
            mk += rule.weights[q] * det * phi * phi.transpose();
        }
        for (std::size_t q = 0; q < frule.size(); ++q) {
            const auto phi = p2_values(edge_point(f.local_edge, frule.points[q](0)));
            mf += frule.weights[q] * f.h * f.h * phi * phi.transpose();
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(mf, mk);
        worst = std::max(worst, es.eigenvalues().maxCoeff());
    }
    return std::sqrt(worst);
}

KornResult korn_normal_trace_min_eig(const TaylorHoodSpace& space)
{
    const SparseMatrix a = SparseMatrix(symmetric_gradient_matrix(space) + slip_normal_mass_matrix(space, false));
    const SparseMatrix m = SparseMatrix(velocity_mass_matrix(space) + velocity_gradient_matrix(space));
    EigenPair pair;
    if (a.rows() <= kDenseLimit) {
        pair = dense_smallest_eigenpairs(MatrixX(a), MatrixX(m), 1).front();
    } else {
        const double shift = 1e-3;
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(SparseMatrix(a + shift * m));
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("Korn pencil factorization failed");
        pair = subspace_eigenpairs([&](const MatrixX& x) { return MatrixX(ldlt.solve(m * x)); },
                                   [&](const MatrixX& x) { return MatrixX(a * x); }, m, 1, false)
                   .front();
    }
    KornResult out;
    out.min_eig = pair.value;
    out.witness = pair.vector / std::sqrt(pair.vector.dot(m * pair.vector));
    return out;
}

double infsup_constant(const TaylorHoodSpace& space)
{
    const Mesh& mesh = space.mesh();
    std::vector<bool> boundary(space.num_nodes(), false);
    for (const Facet& f : mesh.facets()) {
        boundary[f.vertices[0]] = true;
        boundary[f.vertices[1]] = true;
        boundary[mesh.num_vertices() + f.edge] = true;
    }
    const std::vector<int> keep = free_velocity_dofs(space, boundary);
    if (keep.empty())
        throw ConfigError("inf-sup constant needs interior velocity nodes");
    const SparseMatrix k = restrict_to(velocity_gradient_matrix(space), keep);
    const SparseMatrix bfull = divergence_matrix(space);
    const SparseMatrix mp = pressure_mass_matrix(space);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < static_cast<int>(keep.size()); ++i)
        for (SparseMatrix::InnerIterator it(bfull, keep[i]); it; ++it)
            trip.emplace_back(it.row(), i, it.value());
    SparseMatrix b(bfull.rows(), keep.size());
    b.setFromTriplets(trip.begin(), trip.end());

    Eigen::SimplicialLLT<SparseMatrix> llt(k);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("velocity stiffness is singular");

    // Deflate constants: they map to c |Omega| M 1 with c |Omega| = 10, far above
    // any inf-sup eigenvalue (those are bounded by 2).
    const VectorX w = mp * VectorX::Ones(mp.rows());
    const double area = w.sum();
    const double c = 10.0 / area;
    const int np = static_cast<int>(mp.rows());

    if (np <= kDenseLimit) {
        const MatrixX bt = MatrixX(SparseMatrix(b.transpose()));
        const MatrixX kinv_bt = llt.solve(bt);
        MatrixX s = MatrixX(b * kinv_bt);
        s = 0.5 * (s + s.transpose()).eval();
        s += c * w * w.transpose();
        const auto pairs = dense_smallest_eigenpairs(s, MatrixX(mp), 1);
        return std::sqrt(std::max(pairs.front().value, 0.0));
    }

    // Inverse of the deflated Schur complement through the Stokes system
    // [K B^T 0; B 0 w; 0 w^T 0].
    const int nu = static_cast<int>(keep.size());
    std::vector<Eigen::Triplet<double>> st;
    for (int col = 0; col < k.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(k, col); it; ++it)
            st.emplace_back(it.row(), it.col(), it.value());
    for (int col = 0; col < b.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(b, col); it; ++it) {
            st.emplace_back(nu + it.row(), it.col(), it.value());
            st.emplace_back(it.col(), nu + it.row(), it.value());
        }
    for (int i = 0; i < np; ++i) {
        st.emplace_back(nu + i, nu + np, w(i));
        st.emplace_back(nu + np, nu + i, w(i));
    }
    SparseMatrix stokes(nu + np + 1, nu + np + 1);
    stokes.setFromTriplets(st.begin(), st.end());
    Eigen::SparseLU<SparseMatrix> lu(stokes);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("Stokes factorization failed");

    const auto apply_s = [&](const MatrixX& x) {
        MatrixX out = b * MatrixX(llt.solve(MatrixX(b.transpose() * x)));
        out += c * w * (w.transpose() * x);
        return out;
    };
    const auto inverse_s = [&](const MatrixX& y) {
        MatrixX out(np, y.cols());
        for (int j = 0; j < y.cols(); ++j) {
            const double s = y.col(j).sum() / area;
            const VectorX y0 = y.col(j) - s * w;
            VectorX rhs = VectorX::Zero(nu + np + 1);
            rhs.segment(nu, np) = -y0;
            const VectorX sol = lu.solve(rhs);
            out.col(j) = sol.segment(nu, np) + s / (c * area) * VectorX::Ones(np);
        }
        return out;
    };
    const auto pairs = subspace_eigenpairs([&](const MatrixX& x) { return inverse_s(mp * x); }, apply_s, mp, 1, false);
    return std::sqrt(std::max(pairs.front().value, 0.0));
}

double trace_korn_constant(const TaylorHoodSpace& space)
{
    std::vector<bool> constrained(space.num_nodes(), false);
    for (int node : space.dirichlet_nodes())
        constrained[node] = true;
    const std::vector<int> keep = free_velocity_dofs(space, constrained);
    const SparseMatrix a = restrict_to(slip_trace_mass_matrix(space), keep);
    const SparseMatrix m =
        restrict_to(SparseMatrix(symmetric_gradient_matrix(space) + slip_normal_mass_matrix(space, true)), keep);
    if (a.nonZeros() == 0)
        return 0;
    double top = 0;
    if (a.rows() <= kDenseLimit) {
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX> es{MatrixX(a), MatrixX(m)};
        top = es.eigenvalues().maxCoeff();
    } else {
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(m);
        if (ldlt.info() != Eigen::Success)
            throw StabilityError("X_h norm is not definite on the free velocity space");
        // Rayleigh-Ritz on the pencil (M, A) so that the top of A against M is the
        // bottom of the flipped pencil; iterate with M^{-1} A.
        top = subspace_eigenpairs([&](const MatrixX& x) { return MatrixX(ldlt.solve(a * x)); },
                                  [&](const MatrixX& x) { return MatrixX(a * x); }, m, 1, true)
                  .front()
                  .value;
    }
    return std::sqrt(top);
}

double resolve_alpha(const NitscheConfig& config, const SlipLaw& law, double c_tr, double c_trk)
{
    if (config.alpha)
        return *config.alpha;
    constexpr double d = 2;
    const double lambda = law.lambda();
    if (lambda == 0)
        return 1.1 * 2 * d * c_tr * c_tr;
    if (!(c_trk > 0))
        throw StabilityError("trace constant must be positive");
    const double c_l = 2 * config.nu / (c_trk * c_trk);
    if (lambda >= c_l) {
        std::ostringstream msg;
        msg << "monotonicity defect lambda = " << lambda << " is not below 2 nu / c_trK^2 = " << c_l;
        throw StabilityError(msg.str());
    }
    return 1.1 * 2 * (c_l * d * c_tr * c_tr + lambda) / (c_l - lambda);
}

ConstantsReport compute_constants(const TaylorHoodSpace& space, const NitscheConfig& config, const SlipLaw& law)
{
    ConstantsReport r;
    r.c_tr = inverse_trace_constant(space);
    r.c_trk = trace_korn_constant(space);
    r.korn_min_eig = korn_normal_trace_min_eig(space).min_eig;
    r.infsup = infsup_constant(space);
    NitscheConfig automatic = config;
    automatic.alpha.reset();
    r.alpha_auto = resolve_alpha(automatic, law, r.c_tr, r.c_trk);
    return r;
}

} // namespace slipflow
