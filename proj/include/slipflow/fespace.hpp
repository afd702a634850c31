#pragma once

#include "slipflow/mesh.hpp"
#include "slipflow/quadrature.hpp"
#include "slipflow/types.hpp"

#include <array>
#include <vector>

namespace slipflow {

using MatrixField = std::function<Mat2(const Vec2& x, double t)>;

/// Affine geometry of one cell.
struct CellMap {
    Vec2 origin;
    Mat2 jacobian;
    Mat2 inverse; ///< J^{-1}; physical gradient rows are reference rows times J^{-1}
    double det = 0;
};

/// Taylor-Hood P2/P1 space on a tagged mesh.
///
/// Velocity nodes are the mesh vertices followed by the edge midpoints; the
/// velocity coefficient vector interleaves components, (x, y) per node.
/// Pressure nodes are the mesh vertices.
class TaylorHoodSpace {
public:
    explicit TaylorHoodSpace(Mesh mesh);

    const Mesh& mesh() const { return mesh_; }

    int num_nodes() const { return mesh_.num_vertices() + mesh_.num_edges(); }
    int num_velocity_dofs() const { return 2 * num_nodes(); }
    int num_pressure_dofs() const { return mesh_.num_vertices(); }

    static int velocity_dof(int node, int component) { return 2 * node + component; }

    /// The six P2 nodes of a cell in reference order.
    std::array<int, 6> cell_nodes(int cell) const;
    /// The twelve velocity dofs of a cell: (node 0 x, node 0 y, node 1 x, ...).
    std::array<int, 12> cell_velocity_dofs(int cell) const;
    const std::array<int, 3>& cell_pressure_dofs(int cell) const { return mesh_.cells()[cell]; }

    const Vec2& node_coordinate(int node) const { return node_coordinates_[node]; }
    const CellMap& cell_map(int cell) const { return cell_maps_[cell]; }

    /// Velocity nodes lying on a Dirichlet facet, sorted; a corner shared by a
    /// Dirichlet and a slip facet is Dirichlet.
    const std::vector<int>& dirichlet_nodes() const { return dirichlet_nodes_; }
    bool is_dirichlet_node(int node) const { return node_is_dirichlet_[node]; }
    /// Velocity dofs of the Dirichlet nodes, each exactly once.
    std::vector<int> dirichlet_velocity_dofs() const;

    /// Indices (into mesh().facets()) of the slip facets, in facet order.
    const std::vector<int>& slip_facets() const { return slip_facets_; }

    const TriangleRule<double>& cell_quadrature() const { return cell_rule_; }
    const LineRule<double>& facet_quadrature() const { return facet_rule_; }

    /// Reference coordinates, in the adjacent cell, of the quadrature points
    /// of a boundary facet.
    std::vector<Vec2> facet_reference_points(int facet) const;

private:
    Mesh mesh_;
    std::vector<Vec2> node_coordinates_;
    std::vector<CellMap> cell_maps_;
    std::vector<int> dirichlet_nodes_;
    std::vector<bool> node_is_dirichlet_;
    std::vector<int> slip_facets_;
    TriangleRule<double> cell_rule_;
    LineRule<double> facet_rule_;
};

/// Discrete velocity/pressure pair plus the scalar mean-pressure multiplier.
struct SystemState {
    VectorX u;
    VectorX p;
    double m = 0;

    static SystemState zero(const TaylorHoodSpace& space);
};

struct VelocityValue {
    Vec2 value;
    Mat2 gradient; ///< gradient(i, j) = d u_i / d x_j
    Mat2 D;        ///< symmetric gradient
};

VelocityValue evaluate_velocity(const TaylorHoodSpace& space, const VectorX& u, int cell, const Vec2& xi);
double evaluate_pressure(const TaylorHoodSpace& space, const VectorX& p, int cell, const Vec2& xi);

/// Point evaluation at a physical location; throws std::invalid_argument
/// outside the mesh.
Vec2 evaluate_velocity_at(const TaylorHoodSpace& space, const VectorX& u, const Vec2& x);

struct TraceSplit {
    double normal;  ///< v . n
    Vec2 tangential; ///< v - (v . n) n
};

TraceSplit trace_split(const Vec2& v, const Vec2& n);

/// Normal/tangential split of a discrete velocity at parameter s in [0, 1]
/// along a boundary facet (index into mesh().facets()).
TraceSplit trace_split(const TaylorHoodSpace& space, const VectorX& u, int facet, double s);

/// Nodal P2 interpolant of a velocity field.
VectorX interpolate_velocity(const TaylorHoodSpace& space, const VectorField& f, double t = 0);
/// Nodal P1 interpolant of a pressure field.
VectorX interpolate_pressure(const TaylorHoodSpace& space, const ScalarField& p, double t = 0);

struct ExactFields {
    VectorField velocity;
    MatrixField gradient;
    ScalarField pressure;
};

struct ErrorNorms {
    double l2_velocity = 0;
    double h1_velocity = 0; ///< H1 seminorm
    double l2_pressure = 0;
    double l2_tangential = 0; ///< L2(slip facets) of the tangential trace error
    double l2_normal = 0;     ///< L2(slip facets) of the normal trace error
};

ErrorNorms error_norms(const TaylorHoodSpace& space, const SystemState& state, const ExactFields& exact, double t);

/// Integral of each pressure basis function over the domain.
VectorX pressure_basis_integrals(const TaylorHoodSpace& space);

double integrate_pressure(const TaylorHoodSpace& space, const VectorX& p);

} // namespace slipflow
