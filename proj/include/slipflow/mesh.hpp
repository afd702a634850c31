#pragma once

#include "slipflow/types.hpp"

#include <array>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <vector>

namespace slipflow {

enum class Diagonal { right, crossed };

/// Boundary condition class of a boundary facet. The Dirichlet data and the
/// slip law themselves are supplied with the problem definition.
enum class BoundaryTag { untagged, dirichlet, slip };

const char* to_string(BoundaryTag tag);

/// A boundary edge. `vertices` are ordered counterclockwise with respect to
/// the adjacent cell, so the outward normal is the clockwise rotation of the
/// edge direction.
struct Facet {
    std::array<int, 2> vertices;
    int cell = -1;
    int local_edge = -1; ///< edge index within `cell` (opposite local vertex)
    int edge = -1;       ///< global edge index
    BoundaryTag tag = BoundaryTag::untagged;
    Vec2 normal = Vec2::Zero();
    double h = 0; ///< facet diameter h_F
};

struct FacetGeometry {
    Vec2 normal;
    double h;
    std::vector<Vec2> quadrature_points;
};

/// Maps a facet midpoint to a tag; std::nullopt leaves the facet untagged.
using FacetPredicate = std::function<std::optional<BoundaryTag>(const Vec2& midpoint)>;

/// Conforming triangulation of a polygon with tagged boundary facets.
/// Immutable after construction; tagging returns a new mesh.
class Mesh {
public:
    /// Builds edge connectivity and boundary facets. Cells must be
    /// counterclockwise with positive area and the triangulation conforming;
    /// violations throw ConfigError.
    Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    int num_facets() const { return static_cast<int>(facets_.size()); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& cells() const { return cells_; }
    /// Global edges as sorted vertex pairs.
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    /// Global edge index of each local edge of each cell.
    const std::vector<std::array<int, 3>>& cell_edges() const { return cell_edges_; }
    const std::vector<Facet>& facets() const { return facets_; }

    /// Boundary facet index of a global edge, or -1 for interior edges.
    int facet_of_edge(int edge) const { return edge_facet_[edge]; }
    bool is_boundary_edge(int edge) const { return edge_facet_[edge] >= 0; }

    /// Affine map x = x0 + J xi of a cell.
    Mat2 jacobian(int cell) const;
    Vec2 map_to_physical(int cell, const Vec2& xi) const;
    Vec2 map_to_reference(int cell, const Vec2& x) const;

    double cell_area(int cell) const;
    /// Longest edge of the cell.
    double cell_diameter(int cell) const;
    double cell_inradius(int cell) const;

    /// Normal, diameter and physical facet quadrature points of a boundary
    /// edge. Throws std::invalid_argument for interior edges.
    FacetGeometry facet_geometry(int edge) const;

    /// Applies `predicate` to every boundary facet midpoint. Throws
    /// ConfigError("untagged facet ...") if any facet is left untagged.
    Mesh tag_boundary(const FacetPredicate& predicate) const;

    /// Copy with all coordinates multiplied by `s`.
    Mesh scaled(double s) const;

    /// Locates the cell containing `x` (first match in cell order) and the
    /// reference coordinates of `x` in it; std::nullopt when outside.
    std::optional<std::pair<int, Vec2>> locate(const Vec2& x) const;

    /// Plain-text dump: `v x y`, `c i j k`, `f i j tag` lines.
    void write(std::ostream& os) const;

private:
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> cell_edges_;
    std::vector<Facet> facets_;
    std::vector<int> edge_facet_;
};

/// Structured triangulation of (0,1)^2 with n x n squares. `right` splits each
/// square along its (lower-left, upper-right) diagonal; `crossed` adds the
/// square's centre and splits it into four. Facets are left untagged.
Mesh build_unit_square(int n, Diagonal diagonal = Diagonal::right);

enum class Wall { bottom, right, top, left };

/// Tags facets whose midpoint lies on one of `slip_walls` of the unit square
/// (within 1e-12) as slip and every other facet as Dirichlet.
FacetPredicate slip_walls_predicate(std::initializer_list<Wall> slip_walls);
FacetPredicate slip_walls_predicate(std::vector<Wall> slip_walls);

/// Slip on the top wall y = 1, Dirichlet elsewhere.
FacetPredicate top_wall_predicate();

/// Every boundary facet is slip.
FacetPredicate all_slip_predicate();

} // namespace slipflow
