#include "slipflow/forms.hpp"

#include "slipflow/reference_element.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace slipflow {

namespace {

using Phi2 = Eigen::Matrix<double, 6, 1>;
using Grad2 = Eigen::Matrix<double, 6, 2>;
using Phi1 = Eigen::Matrix<double, 3, 1>;
using LocalVector = Eigen::Matrix<double, 15, 1>;
using LocalMatrix = Eigen::Matrix<double, 15, 15>;

/// Reference basis tables at a set of reference points.
struct BasisTable {
    std::vector<Phi2> p2;
    std::vector<Grad2> p2_grad;
    std::vector<Phi1> p1;

    explicit BasisTable(const std::vector<Vec2>& points)
    {
        for (const auto& xi : points) {
            p2.push_back(p2_values(xi));
            p2_grad.push_back(p2_gradients(xi));
            p1.push_back(p1_values(xi));
        }
    }
};

const BasisTable& cell_table(const TaylorHoodSpace& space)
{
    // The cell rule is fixed, so one table serves every space.
    static const BasisTable table(space.cell_quadrature().points);
    return table;
}

/// Tables at the facet quadrature points of each local edge.
const std::array<BasisTable, 3>& facet_tables(const TaylorHoodSpace& space)
{
    static const std::array<BasisTable, 3> tables = [&] {
        std::array<std::vector<Vec2>, 3> pts;
        for (int e = 0; e < 3; ++e)
            for (const auto& s : space.facet_quadrature().points)
                pts[e].push_back(edge_point(e, s(0)));
        return std::array<BasisTable, 3>{BasisTable(pts[0]), BasisTable(pts[1]), BasisTable(pts[2])};
    }();
    return tables;
}

/// Node-wise velocity coefficients of a cell as a 6 x 2 matrix.
Eigen::Matrix<double, 6, 2> cell_coefficients(const TaylorHoodSpace& space, const VectorX& u, int cell)
{
    const auto nodes = space.cell_nodes(cell);
    Eigen::Matrix<double, 6, 2> c;
    for (int a = 0; a < 6; ++a)
        c.row(a) = u.segment<2>(2 * nodes[a]).transpose();
    return c;
}

template <typename Fn>
void for_each_cell_point(const TaylorHoodSpace& space, Fn&& fn)
{
    const auto& rule = space.cell_quadrature();
    const auto& tab = cell_table(space);
    for (int c = 0; c < space.mesh().num_cells(); ++c) {
        const CellMap& map = space.cell_map(c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Grad2 g = tab.p2_grad[q] * map.inverse;
            fn(c, map.origin + map.jacobian * rule.points[q], rule.weights[q] * map.det, tab.p2[q], g, tab.p1[q]);
        }
    }
}

template <typename Fn>
void for_each_slip_point(const TaylorHoodSpace& space, Fn&& fn)
{
    const auto& rule = space.facet_quadrature();
    const auto& tabs = facet_tables(space);
    for (int fi : space.slip_facets()) {
        const Facet& f = space.mesh().facets()[fi];
        const CellMap& map = space.cell_map(f.cell);
        const BasisTable& tab = tabs[f.local_edge];
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Grad2 g = tab.p2_grad[q] * map.inverse;
            const Vec2 xi = edge_point(f.local_edge, rule.points[q](0));
            fn(f, map.origin + map.jacobian * xi, rule.weights[q] * f.h, tab.p2[q], g, tab.p1[q]);
        }
    }
}

/// Assembles a velocity-velocity bilinear form given a 12 x 12 local kernel.
template <typename Kernel>
SparseMatrix assemble_velocity_cells(const TaylorHoodSpace& space, Kernel&& kernel)
{
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::Matrix<double, 12, 12> local;
    int current = -1;
    const auto flush = [&] {
        if (current < 0)
            return;
        const auto dofs = space.cell_velocity_dofs(current);
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                trip.emplace_back(dofs[i], dofs[j], local(i, j));
    };
    for_each_cell_point(space, [&](int c, const Vec2&, double w, const Phi2& phi, const Grad2& g, const Phi1&) {
        if (c != current) {
            flush();
            current = c;
            local.setZero();
        }
        kernel(local, w, phi, g);
    });
    flush();
    SparseMatrix m(space.num_velocity_dofs(), space.num_velocity_dofs());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

template <typename Kernel>
SparseMatrix assemble_velocity_slip(const TaylorHoodSpace& space, Kernel&& kernel)
{
    std::vector<Eigen::Triplet<double>> trip;
    for_each_slip_point(space, [&](const Facet& f, const Vec2&, double w, const Phi2& phi, const Grad2&, const Phi1&) {
        Eigen::Matrix<double, 12, 12> local = Eigen::Matrix<double, 12, 12>::Zero();
        kernel(local, w, phi, f);
        const auto dofs = space.cell_velocity_dofs(f.cell);
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                if (local(i, j) != 0)
                    trip.emplace_back(dofs[i], dofs[j], local(i, j));
    });
    SparseMatrix m(space.num_velocity_dofs(), space.num_velocity_dofs());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// NitscheOperator

NitscheOperator::NitscheOperator(const TaylorHoodSpace& space, FlowProblem problem)
    : space_(&space), problem_(std::move(problem))
{
    const NitscheConfig& cfg = problem_.config;
    if (!(cfg.nu > 0))
        throw ConfigError("viscosity must be positive");
    if (!cfg.alpha)
        throw ConfigError("automatic penalty must be resolved before assembly");
    if (!(*cfg.alpha > 0))
        throw ConfigError("penalty alpha must be positive");
    if (cfg.beta < 0)
        throw ConfigError("boundary-mass coefficient beta must be nonnegative");
    if (!problem_.dirichlet)
        problem_.dirichlet = [](const Vec2&, double) -> Vec2 { return Vec2::Zero(); };
    for (const auto& f : space.mesh().facets())
        if (f.tag == BoundaryTag::untagged)
            throw ConfigError("untagged facet " + std::to_string(f.edge));
    alpha_ = *cfg.alpha;
    has_multiplier_ = cfg.mean_pressure == MeanPressureMode::multiplier;

    const int nu_dofs = space.num_velocity_dofs();
    const int np = space.num_pressure_dofs();
    size_ = nu_dofs + np + (has_multiplier_ ? 1 : 0);
    dirichlet_row_.assign(size_, false);
    for (int d : space.dirichlet_velocity_dofs())
        dirichlet_row_[d] = true;
    pressure_integrals_ = pressure_basis_integrals(space);

    const int pinned_row = has_multiplier_ ? -1 : nu_dofs;
    const auto skip_row = [&](int r) { return dirichlet_row_[r] || r == pinned_row; };

    std::vector<Eigen::Triplet<double>> trip;
    const auto cell_dofs = [&](int c) {
        std::array<int, 15> dofs;
        const auto v = space.cell_velocity_dofs(c);
        std::copy(v.begin(), v.end(), dofs.begin());
        const auto& p = space.cell_pressure_dofs(c);
        for (int k = 0; k < 3; ++k)
            dofs[12 + k] = nu_dofs + p[k];
        return dofs;
    };
    for (int c = 0; c < space.mesh().num_cells(); ++c) {
        const auto dofs = cell_dofs(c);
        for (int i : dofs)
            if (!skip_row(i))
                for (int j : dofs)
                    trip.emplace_back(i, j, 0.0);
    }
    for (int r = 0; r < size_; ++r)
        if (skip_row(r))
            trip.emplace_back(r, r, 0.0);
    if (has_multiplier_) {
        const int m = size_ - 1;
        for (int k = 0; k < np; ++k) {
            trip.emplace_back(nu_dofs + k, m, 0.0);
            trip.emplace_back(m, nu_dofs + k, 0.0);
        }
    }
    pattern_.resize(size_, size_);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();

    const auto position = [&](int r, int c) {
        const int* begin = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[c];
        const int* end = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[c + 1];
        const int* it = std::lower_bound(begin, end, r);
        return static_cast<int>(it - pattern_.innerIndexPtr());
    };
    cell_positions_.resize(space.mesh().num_cells());
    for (int c = 0; c < space.mesh().num_cells(); ++c) {
        const auto dofs = cell_dofs(c);
        for (int i = 0; i < 15; ++i)
            for (int j = 0; j < 15; ++j)
                cell_positions_[c][15 * i + j] = skip_row(dofs[i]) ? -1 : position(dofs[i], dofs[j]);
    }
    for (int r = 0; r < size_; ++r) {
        if (dirichlet_row_[r])
            dirichlet_diag_positions_.push_back(position(r, r));
    }
    if (pinned_row >= 0)
        pinned_position_ = position(pinned_row, pinned_row);
    if (has_multiplier_) {
        const int m = size_ - 1;
        for (int k = 0; k < np; ++k) {
            multiplier_row_positions_.push_back(position(m, nu_dofs + k));
            multiplier_col_positions_.push_back(position(nu_dofs + k, m));
        }
    }
}

double NitscheOperator::beta_effective() const
{
    return problem_.law.beta_star() > 0 ? problem_.law.beta_star() : problem_.config.beta;
}

VectorX NitscheOperator::pack(const SystemState& state) const
{
    VectorX x(size_);
    x.head(space_->num_velocity_dofs()) = state.u;
    x.segment(pressure_offset(), space_->num_pressure_dofs()) = state.p;
    if (has_multiplier_)
        x(size_ - 1) = state.m;
    return x;
}

SystemState NitscheOperator::unpack(const VectorX& x) const
{
    SystemState s;
    s.u = x.head(space_->num_velocity_dofs());
    s.p = x.segment(pressure_offset(), space_->num_pressure_dofs());
    s.m = has_multiplier_ ? x(size_ - 1) : 0.0;
    return s;
}

void NitscheOperator::apply_dirichlet(VectorX& x, double t) const
{
    for (int node : space_->dirichlet_nodes())
        x.segment<2>(2 * node) = problem_.dirichlet(space_->node_coordinate(node), t);
}

void NitscheOperator::check_step(const StepContext& step) const
{
    if (step.dt) {
        if (!(*step.dt > 0))
            throw ConfigError("time step must be positive");
        if (step.u_old.size() != space_->num_velocity_dofs())
            throw ConfigError("previous velocity has wrong size");
    }
}

VectorX NitscheOperator::residual(const VectorX& x, const StepContext& step) const
{
    VectorX r;
    assemble(x, step, &r, nullptr);
    return r;
}

SparseMatrix NitscheOperator::jacobian(const VectorX& x, const StepContext& step) const
{
    SparseMatrix j;
    assemble(x, step, nullptr, &j);
    return j;
}

void NitscheOperator::assemble(const VectorX& x, const StepContext& step, VectorX* residual,
                               SparseMatrix* jacobian) const
{
    check_step(step);
    if (x.size() != size_)
        throw ConfigError("state vector has wrong size");

    const TaylorHoodSpace& space = *space_;
    const Mesh& mesh = space.mesh();
    const NitscheConfig& cfg = problem_.config;
    const double nu = cfg.nu;
    const bool unsteady = step.dt.has_value();
    const double inv_dt = unsteady ? 1.0 / *step.dt : 0.0;
    const double beta = beta_effective();
    const double consistency_sign = cfg.variant == NitscheVariant::symmetric ? -1.0 : 1.0;
    const SlipTime law_time{step.time, unsteady ? *step.dt : 0.0};
    const int nu_dofs = space.num_velocity_dofs();
    const int pinned_row = has_multiplier_ ? -1 : nu_dofs;

    if (residual)
        residual->setZero(size_);
    if (jacobian) {
        *jacobian = pattern_;
        std::fill_n(jacobian->valuePtr(), jacobian->nonZeros(), 0.0);
    }

    const VectorX u = x.head(nu_dofs);
    const VectorX p = x.segment(nu_dofs, space.num_pressure_dofs());

    const auto& rule = space.cell_quadrature();
    const auto& tab = cell_table(space);
    const auto& frule = space.facet_quadrature();
    const auto& ftabs = facet_tables(space);

    // Slip facets grouped by cell so they share the cell's local system.
    std::vector<std::vector<int>> cell_slip(mesh.num_cells());
    for (int fi : space.slip_facets())
        cell_slip[mesh.facets()[fi].cell].push_back(fi);

    LocalVector rl;
    LocalMatrix jl;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        rl.setZero();
        jl.setZero();
        const CellMap& map = space.cell_map(c);
        const auto U = cell_coefficients(space, u, c);
        const Eigen::Matrix<double, 6, 2> Uold = unsteady ? cell_coefficients(space, step.u_old, c)
                                                          : Eigen::Matrix<double, 6, 2>::Zero();
        const auto& pd = space.cell_pressure_dofs(c);
        const Eigen::Vector3d P(p(pd[0]), p(pd[1]), p(pd[2]));

        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = rule.weights[q] * map.det;
            const Phi2& phi = tab.p2[q];
            const Grad2 G = tab.p2_grad[q] * map.inverse;
            const Phi1& psi = tab.p1[q];
            const Vec2 uq = U.transpose() * phi;
            const Mat2 grad = U.transpose() * G;
            const Mat2 D = sym(grad);
            const double pq = P.dot(psi);
            const double div = grad.trace();
            Vec2 source = Vec2::Zero();
            if (problem_.forcing)
                source = problem_.forcing(map.origin + map.jacobian * rule.points[q], step.time);
            if (unsteady)
                source += inv_dt * (Uold.transpose() * phi);
            const Vec2 conv = grad * uq; // (u . grad) u

            for (int a = 0; a < 6; ++a) {
                const Vec2 ga = G.row(a).transpose();
                const double ga_u = ga.dot(uq);
                Vec2 ra = 2 * nu * D * ga - pq * ga + (inv_dt * uq - source) * phi(a);
                if (cfg.include_convection)
                    ra += 0.5 * (conv * phi(a) - ga_u * uq);
                rl.segment<2>(2 * a) += w * ra;
            }
            for (int k = 0; k < 3; ++k)
                rl(12 + k) += w * psi(k) * div;

            if (!jacobian)
                continue;
            for (int a = 0; a < 6; ++a) {
                const Vec2 ga = G.row(a).transpose();
                const double ga_u = ga.dot(uq);
                for (int b = 0; b < 6; ++b) {
                    const Vec2 gb = G.row(b).transpose();
                    Mat2 blk = nu * (ga.dot(gb) * Mat2::Identity() + gb * ga.transpose());
                    blk.diagonal().array() += inv_dt * phi(a) * phi(b);
                    if (cfg.include_convection) {
                        const double gb_u = gb.dot(uq);
                        blk += 0.5 * (phi(a) * (gb_u * Mat2::Identity() + grad * phi(b))
                                      - phi(b) * uq * ga.transpose() - ga_u * phi(b) * Mat2::Identity());
                    }
                    jl.block<2, 2>(2 * a, 2 * b) += w * blk;
                }
                for (int k = 0; k < 3; ++k) {
                    jl.block<2, 1>(2 * a, 12 + k) -= w * psi(k) * ga;
                    jl.block<1, 2>(12 + k, 2 * a) += w * psi(k) * ga.transpose();
                }
            }
        }

        for (int fi : cell_slip[c]) {
            const Facet& f = mesh.facets()[fi];
            const Vec2& n = f.normal;
            const Mat2 proj = tangential_projector(n);
            const double penalty = nu * alpha_ / f.h;
            const BasisTable& ft = ftabs[f.local_edge];
            for (std::size_t q = 0; q < frule.size(); ++q) {
                const double w = frule.weights[q] * f.h;
                const Phi2& phi = ft.p2[q];
                const Grad2 G = ft.p2_grad[q] * map.inverse;
                const Phi1& psi = ft.p1[q];
                const Vec2 uq = U.transpose() * phi;
                const Mat2 D = sym(Mat2(U.transpose() * G));
                const double pq = P.dot(psi);
                const double un = uq.dot(n);
                const double dnn = n.dot(D * n);
                const Vec2 utau = proj * uq;
                Vec2 sigma = problem_.law.traction(utau, law_time);
                if (problem_.slip_correction) {
                    const Vec2 xq = map.origin + map.jacobian * edge_point(f.local_edge, frule.points[q](0));
                    sigma += problem_.slip_correction(xq, n, step.time);
                }
                const Vec2 traction = proj * sigma;
                Vec2 mass_term = Vec2::Zero();
                if (unsteady && beta > 0)
                    mass_term = beta * inv_dt * (uq - Uold.transpose() * phi);

                for (int a = 0; a < 6; ++a) {
                    const double gn = G.row(a).dot(n);
                    const Vec2 ra = phi(a) * (mass_term + traction + (pq + penalty * un - 2 * nu * dnn) * n)
                        + consistency_sign * 2 * nu * gn * un * n;
                    rl.segment<2>(2 * a) += w * ra;
                }
                for (int k = 0; k < 3; ++k)
                    rl(12 + k) -= w * psi(k) * un;

                if (!jacobian)
                    continue;
                const Mat2 jsig = proj * problem_.law.jacobian(utau, law_time) * proj;
                const Mat2 nn = n * n.transpose();
                for (int a = 0; a < 6; ++a) {
                    const double gna = G.row(a).dot(n);
                    for (int b = 0; b < 6; ++b) {
                        const double gnb = G.row(b).dot(n);
                        Mat2 blk = phi(a) * phi(b) * (jsig + penalty * nn) - 2 * nu * phi(a) * gnb * nn
                            + consistency_sign * 2 * nu * gna * phi(b) * nn;
                        if (unsteady && beta > 0)
                            blk.diagonal().array() += beta * inv_dt * phi(a) * phi(b);
                        jl.block<2, 2>(2 * a, 2 * b) += w * blk;
                    }
                    for (int k = 0; k < 3; ++k) {
                        jl.block<2, 1>(2 * a, 12 + k) += w * psi(k) * phi(a) * n;
                        jl.block<1, 2>(12 + k, 2 * a) -= w * psi(k) * phi(a) * n.transpose();
                    }
                }
            }
        }

        // Scatter.
        const auto vdofs = space.cell_velocity_dofs(c);
        std::array<int, 15> dofs;
        std::copy(vdofs.begin(), vdofs.end(), dofs.begin());
        for (int k = 0; k < 3; ++k)
            dofs[12 + k] = nu_dofs + pd[k];
        if (residual) {
            for (int i = 0; i < 15; ++i)
                if (!dirichlet_row_[dofs[i]] && dofs[i] != pinned_row)
                    (*residual)(dofs[i]) += rl(i);
        }
        if (jacobian) {
            double* values = jacobian->valuePtr();
            const auto& pos = cell_positions_[c];
            for (int j = 0; j < 15; ++j)
                for (int i = 0; i < 15; ++i)
                    if (pos[15 * i + j] >= 0)
                        values[pos[15 * i + j]] += jl(i, j);
        }
    }

    // Mean-pressure constraint.
    if (has_multiplier_) {
        const double m = x(size_ - 1);
        if (residual) {
            residual->segment(nu_dofs, space.num_pressure_dofs()) += m * pressure_integrals_;
            (*residual)(size_ - 1) = pressure_integrals_.dot(p);
        }
        if (jacobian) {
            for (int k = 0; k < space.num_pressure_dofs(); ++k) {
                jacobian->valuePtr()[multiplier_row_positions_[k]] = pressure_integrals_(k);
                jacobian->valuePtr()[multiplier_col_positions_[k]] = pressure_integrals_(k);
            }
        }
    } else {
        if (residual)
            (*residual)(pinned_row) = x(pinned_row);
        if (jacobian)
            jacobian->valuePtr()[pinned_position_] = 1.0;
    }

    // Strong Dirichlet rows.
    if (residual) {
        for (int node : space.dirichlet_nodes()) {
            const Vec2 g = problem_.dirichlet(space.node_coordinate(node), step.time);
            residual->segment<2>(2 * node) = x.segment<2>(2 * node) - g;
        }
    }
    if (jacobian)
        for (int pos : dirichlet_diag_positions_)
            jacobian->valuePtr()[pos] = 1.0;
}

// ---------------------------------------------------------------------------
// Trilinear forms and diagnostics

double trilinear_convective(const TaylorHoodSpace& space, const VectorX& u, const VectorX& v, const VectorX& w)
{
    double sum = 0;
    for_each_cell_point(space, [&](int c, const Vec2&, double wq, const Phi2& phi, const Grad2& g, const Phi1&) {
        const auto U = cell_coefficients(space, u, c);
        const auto V = cell_coefficients(space, v, c);
        const auto W = cell_coefficients(space, w, c);
        const Vec2 uq = U.transpose() * phi;
        const Mat2 gv = V.transpose() * g;
        sum += wq * (gv * uq).dot(W.transpose() * phi);
    });
    return sum;
}

double trilinear_skew(const TaylorHoodSpace& space, const VectorX& u, const VectorX& v, const VectorX& w)
{
    double sum = 0;
    for_each_cell_point(space, [&](int c, const Vec2&, double wq, const Phi2& phi, const Grad2& g, const Phi1&) {
        const auto U = cell_coefficients(space, u, c);
        const auto V = cell_coefficients(space, v, c);
        const auto W = cell_coefficients(space, w, c);
        const Vec2 uq = U.transpose() * phi;
        const Vec2 vq = V.transpose() * phi;
        const Vec2 wq_val = W.transpose() * phi;
        const Mat2 gv = V.transpose() * g;
        const Mat2 gw = W.transpose() * g;
        sum += 0.5 * wq * ((gv * uq).dot(wq_val) - (gw * uq).dot(vq));
    });
    return sum;
}

std::vector<WallSample> boundary_functionals(const TaylorHoodSpace& space, const SlipLaw& law, const VectorX& u,
                                             SlipTime time)
{
    std::vector<WallSample> out;
    for_each_slip_point(space, [&](const Facet& f, const Vec2& x, double, const Phi2& phi, const Grad2&, const Phi1&) {
        const auto U = cell_coefficients(space, u, f.cell);
        const auto split = trace_split(Vec2(U.transpose() * phi), f.normal);
        const Vec2 sigma = tangential_projector(f.normal) * law.traction(split.tangential, time);
        out.push_back({x, split.tangential.norm(), sigma.norm(), split.normal});
    });
    std::stable_sort(out.begin(), out.end(), [](const WallSample& a, const WallSample& b) {
        return a.x.x() < b.x.x() || (a.x.x() == b.x.x() && a.x.y() < b.x.y());
    });
    return out;
}

double EnergyBalance::relative_residual() const
{
    const double scale = std::max({std::abs(time_term), std::abs(viscous), std::abs(nitsche_cross),
                                   std::abs(slip_work), std::abs(penalty), std::abs(forcing_work),
                                   std::abs(correction_work)});
    return scale > 0 ? std::abs(residual()) / scale : std::abs(residual());
}

EnergyBalance energy_balance(const NitscheOperator& op, const SystemState& state, const StepContext& step)
{
    const TaylorHoodSpace& space = op.space();
    const FlowProblem& pb = op.problem();
    const double nu = pb.config.nu;
    const bool unsteady = step.dt.has_value();
    const double inv_dt = unsteady ? 1.0 / *step.dt : 0.0;
    const double beta = op.beta_effective();
    const SlipTime law_time{step.time, unsteady ? *step.dt : 0.0};
    EnergyBalance e;

    for_each_cell_point(space, [&](int c, const Vec2& x, double w, const Phi2& phi, const Grad2& g, const Phi1&) {
        const auto U = cell_coefficients(space, state.u, c);
        const Vec2 uq = U.transpose() * phi;
        const Mat2 D = sym(Mat2(U.transpose() * g));
        e.viscous += w * 2 * nu * D.squaredNorm();
        if (unsteady) {
            const Vec2 old = cell_coefficients(space, step.u_old, c).transpose() * phi;
            e.time_term += w * inv_dt * (uq - old).dot(uq);
        }
        if (pb.forcing)
            e.forcing_work += w * pb.forcing(x, step.time).dot(uq);
    });
    const double cross_factor = pb.config.variant == NitscheVariant::symmetric ? -4.0 : 0.0;
    for_each_slip_point(space, [&](const Facet& f, const Vec2& x, double w, const Phi2& phi, const Grad2& g, const Phi1&) {
        const auto U = cell_coefficients(space, state.u, f.cell);
        const Vec2 uq = U.transpose() * phi;
        const Mat2 D = sym(Mat2(U.transpose() * g));
        const auto split = trace_split(uq, f.normal);
        const Mat2 proj = tangential_projector(f.normal);
        e.slip_work += w * (proj * pb.law.traction(split.tangential, law_time)).dot(split.tangential);
        if (pb.slip_correction)
            e.correction_work += w * pb.slip_correction(x, f.normal, step.time).dot(split.tangential);
        e.penalty += w * nu * op.alpha() / f.h * split.normal * split.normal;
        e.nitsche_cross += w * cross_factor * nu * f.normal.dot(D * f.normal) * split.normal;
        if (unsteady && beta > 0) {
            const Vec2 old = cell_coefficients(space, step.u_old, f.cell).transpose() * phi;
            e.time_term += w * beta * inv_dt * (uq - old).dot(uq);
        }
    });
    return e;
}

double penalty_quadratic_form(const TaylorHoodSpace& space, const VectorX& u, double alpha)
{
    double value = 0;
    for_each_cell_point(space, [&](int c, const Vec2&, double w, const Phi2&, const Grad2& g, const Phi1&) {
        value += w * 2 * sym(Mat2(cell_coefficients(space, u, c).transpose() * g)).squaredNorm();
    });
    for_each_slip_point(space, [&](const Facet& f, const Vec2&, double w, const Phi2& phi, const Grad2& g, const Phi1&) {
        const auto U = cell_coefficients(space, u, f.cell);
        const double un = (U.transpose() * phi).dot(f.normal);
        const double dnn = f.normal.dot(sym(Mat2(U.transpose() * g)) * f.normal);
        value += w * (-4 * dnn * un + alpha / f.h * un * un);
    });
    return value;
}

// ---------------------------------------------------------------------------
// Bilinear-form matrices

SparseMatrix velocity_mass_matrix(const TaylorHoodSpace& space)
{
    return assemble_velocity_cells(space, [](auto& local, double w, const Phi2& phi, const Grad2&) {
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                local.template block<2, 2>(2 * a, 2 * b).diagonal().array() += w * phi(a) * phi(b);
    });
}

SparseMatrix velocity_gradient_matrix(const TaylorHoodSpace& space)
{
    return assemble_velocity_cells(space, [](auto& local, double w, const Phi2&, const Grad2& g) {
        const Eigen::Matrix<double, 6, 6> k = g * g.transpose();
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                local.template block<2, 2>(2 * a, 2 * b).diagonal().array() += w * k(a, b);
    });
}

SparseMatrix symmetric_gradient_matrix(const TaylorHoodSpace& space)
{
    return assemble_velocity_cells(space, [](auto& local, double w, const Phi2&, const Grad2& g) {
        for (int a = 0; a < 6; ++a) {
            const Vec2 ga = g.row(a).transpose();
            for (int b = 0; b < 6; ++b) {
                const Vec2 gb = g.row(b).transpose();
                // D(phi_b e_d) : D(phi_a e_c) = 1/2 (delta_cd ga.gb + gb_c ga_d)
                local.template block<2, 2>(2 * a, 2 * b) += w * 0.5 * (ga.dot(gb) * Mat2::Identity() + gb * ga.transpose());
            }
        }
    });
}

SparseMatrix slip_trace_mass_matrix(const TaylorHoodSpace& space)
{
    return assemble_velocity_slip(space, [](auto& local, double w, const Phi2& phi, const Facet&) {
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                local.template block<2, 2>(2 * a, 2 * b).diagonal().array() += w * phi(a) * phi(b);
    });
}

SparseMatrix slip_normal_mass_matrix(const TaylorHoodSpace& space, bool inverse_h_weight)
{
    return assemble_velocity_slip(space, [inverse_h_weight](auto& local, double w, const Phi2& phi, const Facet& f) {
        const Mat2 nn = f.normal * f.normal.transpose();
        const double scale = inverse_h_weight ? w / f.h : w;
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                local.template block<2, 2>(2 * a, 2 * b) += scale * phi(a) * phi(b) * nn;
    });
}

SparseMatrix divergence_matrix(const TaylorHoodSpace& space)
{
    std::vector<Eigen::Triplet<double>> trip;
    for_each_cell_point(space, [&](int c, const Vec2&, double w, const Phi2&, const Grad2& g, const Phi1& psi) {
        const auto dofs = space.cell_velocity_dofs(c);
        const auto& pd = space.cell_pressure_dofs(c);
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 6; ++a)
                for (int d = 0; d < 2; ++d)
                    trip.emplace_back(pd[k], dofs[2 * a + d], w * psi(k) * g(a, d));
    });
    SparseMatrix b(space.num_pressure_dofs(), space.num_velocity_dofs());
    b.setFromTriplets(trip.begin(), trip.end());
    return b;
}

SparseMatrix pressure_mass_matrix(const TaylorHoodSpace& space)
{
    std::vector<Eigen::Triplet<double>> trip;
    for_each_cell_point(space, [&](int c, const Vec2&, double w, const Phi2&, const Grad2&, const Phi1& psi) {
        const auto& pd = space.cell_pressure_dofs(c);
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                trip.emplace_back(pd[k], pd[l], w * psi(k) * psi(l));
    });
    SparseMatrix m(space.num_pressure_dofs(), space.num_pressure_dofs());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

void write_coo(std::ostream& os, const SparseMatrix& m)
{
    const auto prec = os.precision(17);
    for (int c = 0; c < m.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(m, c); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    os.precision(prec);
}

} // namespace slipflow
