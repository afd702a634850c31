#include "slipflow/fespace.hpp"

#include "slipflow/reference_element.hpp"

#include <algorithm>
#include <cmath>

namespace slipflow {

TaylorHoodSpace::TaylorHoodSpace(Mesh mesh)
    : mesh_(std::move(mesh)), cell_rule_(cell_rule()), facet_rule_(facet_rule())
{
    const int nv = mesh_.num_vertices();
    node_coordinates_ = mesh_.vertices();
    for (const auto& e : mesh_.edges())
        node_coordinates_.push_back(0.5 * (mesh_.vertices()[e[0]] + mesh_.vertices()[e[1]]));

    cell_maps_.reserve(mesh_.num_cells());
    for (int c = 0; c < mesh_.num_cells(); ++c) {
        CellMap m;
        m.origin = mesh_.vertices()[mesh_.cells()[c][0]];
        m.jacobian = mesh_.jacobian(c);
        m.inverse = m.jacobian.inverse();
        m.det = m.jacobian.determinant();
        cell_maps_.push_back(m);
    }

    node_is_dirichlet_.assign(num_nodes(), false);
    for (int f = 0; f < mesh_.num_facets(); ++f) {
        const Facet& facet = mesh_.facets()[f];
        if (facet.tag == BoundaryTag::dirichlet) {
            node_is_dirichlet_[facet.vertices[0]] = true;
            node_is_dirichlet_[facet.vertices[1]] = true;
            node_is_dirichlet_[nv + facet.edge] = true;
        } else if (facet.tag == BoundaryTag::slip) {
            slip_facets_.push_back(f);
        }
    }
    for (int i = 0; i < num_nodes(); ++i)
        if (node_is_dirichlet_[i])
            dirichlet_nodes_.push_back(i);
}

std::array<int, 6> TaylorHoodSpace::cell_nodes(int cell) const
{
    const auto& v = mesh_.cells()[cell];
    const auto& e = mesh_.cell_edges()[cell];
    const int nv = mesh_.num_vertices();
    return {v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]};
}

std::array<int, 12> TaylorHoodSpace::cell_velocity_dofs(int cell) const
{
    const auto nodes = cell_nodes(cell);
    std::array<int, 12> dofs;
    for (int a = 0; a < 6; ++a) {
        dofs[2 * a] = velocity_dof(nodes[a], 0);
        dofs[2 * a + 1] = velocity_dof(nodes[a], 1);
    }
    return dofs;
}

std::vector<int> TaylorHoodSpace::dirichlet_velocity_dofs() const
{
    std::vector<int> dofs;
    dofs.reserve(2 * dirichlet_nodes_.size());
    for (int node : dirichlet_nodes_) {
        dofs.push_back(velocity_dof(node, 0));
        dofs.push_back(velocity_dof(node, 1));
    }
    return dofs;
}

std::vector<Vec2> TaylorHoodSpace::facet_reference_points(int facet) const
{
    const Facet& f = mesh_.facets()[facet];
    std::vector<Vec2> pts;
    pts.reserve(facet_rule_.size());
    for (const auto& s : facet_rule_.points)
        pts.push_back(edge_point(f.local_edge, s(0)));
    return pts;
}

SystemState SystemState::zero(const TaylorHoodSpace& space)
{
    return {VectorX::Zero(space.num_velocity_dofs()), VectorX::Zero(space.num_pressure_dofs()), 0.0};
}

VelocityValue evaluate_velocity(const TaylorHoodSpace& space, const VectorX& u, int cell, const Vec2& xi)
{
    const auto nodes = space.cell_nodes(cell);
    const auto phi = p2_values(xi);
    const Eigen::Matrix<double, 6, 2> grad = p2_gradients(xi) * space.cell_map(cell).inverse;
    VelocityValue r{Vec2::Zero(), Mat2::Zero(), Mat2::Zero()};
    for (int a = 0; a < 6; ++a) {
        const Vec2 coeff(u(2 * nodes[a]), u(2 * nodes[a] + 1));
        r.value += phi(a) * coeff;
        r.gradient += coeff * grad.row(a);
    }
    r.D = sym(r.gradient);
    return r;
}

double evaluate_pressure(const TaylorHoodSpace& space, const VectorX& p, int cell, const Vec2& xi)
{
    const auto& dofs = space.cell_pressure_dofs(cell);
    const auto phi = p1_values(xi);
    return phi(0) * p(dofs[0]) + phi(1) * p(dofs[1]) + phi(2) * p(dofs[2]);
}

Vec2 evaluate_velocity_at(const TaylorHoodSpace& space, const VectorX& u, const Vec2& x)
{
    const auto loc = space.mesh().locate(x);
    if (!loc)
        throw std::invalid_argument("point outside the mesh");
    return evaluate_velocity(space, u, loc->first, loc->second).value;
}

TraceSplit trace_split(const Vec2& v, const Vec2& n)
{
    const double vn = v.dot(n);
    return {vn, v - vn * n};
}

TraceSplit trace_split(const TaylorHoodSpace& space, const VectorX& u, int facet, double s)
{
    const Facet& f = space.mesh().facets()[facet];
    const Vec2 xi = edge_point(f.local_edge, s);
    return trace_split(evaluate_velocity(space, u, f.cell, xi).value, f.normal);
}

VectorX interpolate_velocity(const TaylorHoodSpace& space, const VectorField& f, double t)
{
    VectorX u(space.num_velocity_dofs());
    for (int i = 0; i < space.num_nodes(); ++i)
        u.segment<2>(2 * i) = f(space.node_coordinate(i), t);
    return u;
}

VectorX interpolate_pressure(const TaylorHoodSpace& space, const ScalarField& p, double t)
{
    VectorX q(space.num_pressure_dofs());
    for (int i = 0; i < space.num_pressure_dofs(); ++i)
        q(i) = p(space.mesh().vertices()[i], t);
    return q;
}

ErrorNorms error_norms(const TaylorHoodSpace& space, const SystemState& state, const ExactFields& exact, double t)
{
    const Mesh& mesh = space.mesh();
    const auto& rule = space.cell_quadrature();
    double l2u = 0, h1u = 0, l2p = 0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const CellMap& map = space.cell_map(c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Vec2& xi = rule.points[q];
            const Vec2 x = map.origin + map.jacobian * xi;
            const double w = rule.weights[q] * map.det;
            const auto uh = evaluate_velocity(space, state.u, c, xi);
            l2u += w * (uh.value - exact.velocity(x, t)).squaredNorm();
            if (exact.gradient)
                h1u += w * (uh.gradient - exact.gradient(x, t)).squaredNorm();
            if (exact.pressure) {
                const double e = evaluate_pressure(space, state.p, c, xi) - exact.pressure(x, t);
                l2p += w * e * e;
            }
        }
    }

    double l2t = 0, l2n = 0;
    const auto& frule = space.facet_quadrature();
    for (int fi : space.slip_facets()) {
        const Facet& f = mesh.facets()[fi];
        const auto ref = space.facet_reference_points(fi);
        for (std::size_t q = 0; q < frule.size(); ++q) {
            const Vec2 x = mesh.map_to_physical(f.cell, ref[q]);
            const Vec2 diff = evaluate_velocity(space, state.u, f.cell, ref[q]).value - exact.velocity(x, t);
            const auto split = trace_split(diff, f.normal);
            const double w = frule.weights[q] * f.h;
            l2t += w * split.tangential.squaredNorm();
            l2n += w * split.normal * split.normal;
        }
    }
    return {std::sqrt(l2u), std::sqrt(h1u), std::sqrt(l2p), std::sqrt(l2t), std::sqrt(l2n)};
}

VectorX pressure_basis_integrals(const TaylorHoodSpace& space)
{
    // Each P1 hat integrates to |K| / 3 over every cell in its support.
    VectorX w = VectorX::Zero(space.num_pressure_dofs());
    for (int c = 0; c < space.mesh().num_cells(); ++c) {
        const double third = space.cell_map(c).det / 6.0;
        for (int v : space.cell_pressure_dofs(c))
            w(v) += third;
    }
    return w;
}

double integrate_pressure(const TaylorHoodSpace& space, const VectorX& p)
{
    return pressure_basis_integrals(space).dot(p);
}

} // namespace slipflow
