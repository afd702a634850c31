#include "slipflow/mesh.hpp"

#include "slipflow/quadrature.hpp"
#include "slipflow/reference_element.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace slipflow {

const char* to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::dirichlet:
        return "dirichlet";
    case BoundaryTag::slip:
        return "slip";
    case BoundaryTag::untagged:
        break;
    }
    return "untagged";
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells))
{
    const int nv = num_vertices();
    std::map<std::pair<int, int>, int> edge_index;
    // Per edge: adjacent cells with their local edge index.
    std::vector<std::vector<std::pair<int, int>>> edge_cells;
    cell_edges_.resize(cells_.size());

    for (int c = 0; c < num_cells(); ++c) {
        for (int v : cells_[c]) {
            if (v < 0 || v >= nv)
                throw ConfigError("cell " + std::to_string(c) + " references vertex out of range");
        }
        if (cell_area(c) <= 0)
            throw ConfigError("cell " + std::to_string(c) + " has nonpositive signed area");
        for (int e = 0; e < 3; ++e) {
            const int a = cells_[c][kEdgeVertices[e][0]];
            const int b = cells_[c][kEdgeVertices[e][1]];
            const auto key = std::minmax(a, b);
            auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, num_edges());
            if (inserted) {
                edges_.push_back({key.first, key.second});
                edge_cells.emplace_back();
            }
            cell_edges_[c][e] = it->second;
            edge_cells[it->second].emplace_back(c, e);
        }
    }

    edge_facet_.assign(edges_.size(), -1);
    for (int e = 0; e < num_edges(); ++e) {
        const auto& adj = edge_cells[e];
        if (adj.size() > 2)
            throw ConfigError("edge " + std::to_string(e) + " shared by more than two cells");
        if (adj.size() == 2) {
            // Conforming neighbours traverse the shared edge in opposite directions.
            const auto [c0, l0] = adj[0];
            const auto [c1, l1] = adj[1];
            if (cells_[c0][kEdgeVertices[l0][0]] != cells_[c1][kEdgeVertices[l1][1]])
                throw ConfigError("inconsistent orientation across edge " + std::to_string(e));
            continue;
        }
        const auto [c, l] = adj[0];
        Facet f;
        f.vertices = {cells_[c][kEdgeVertices[l][0]], cells_[c][kEdgeVertices[l][1]]};
        f.cell = c;
        f.local_edge = l;
        f.edge = e;
        const Vec2 t = vertices_[f.vertices[1]] - vertices_[f.vertices[0]];
        f.h = t.norm();
        f.normal = Vec2(t.y(), -t.x()) / f.h;
        edge_facet_[e] = num_facets();
        facets_.push_back(f);
    }

    // A hanging node is a facet vertex lying inside another facet.
    std::vector<int> boundary_vertices;
    for (const Facet& f : facets_)
        boundary_vertices.insert(boundary_vertices.end(), f.vertices.begin(), f.vertices.end());
    std::sort(boundary_vertices.begin(), boundary_vertices.end());
    boundary_vertices.erase(std::unique(boundary_vertices.begin(), boundary_vertices.end()), boundary_vertices.end());
    for (const Facet& f : facets_) {
        const Vec2 a = vertices_[f.vertices[0]];
        const Vec2 t = vertices_[f.vertices[1]] - a;
        for (int v : boundary_vertices) {
            if (v == f.vertices[0] || v == f.vertices[1])
                continue;
            const Vec2 d = vertices_[v] - a;
            const double s = d.dot(t) / t.squaredNorm();
            if (s > 0 && s < 1 && std::abs(t.x() * d.y() - t.y() * d.x()) <= 1e-12 * t.squaredNorm())
                throw ConfigError("nonconforming mesh: vertex " + std::to_string(v) + " lies inside edge " +
                                  std::to_string(f.edge));
        }
    }
}

Mat2 Mesh::jacobian(int cell) const
{
    const auto& c = cells_[cell];
    Mat2 j;
    j.col(0) = vertices_[c[1]] - vertices_[c[0]];
    j.col(1) = vertices_[c[2]] - vertices_[c[0]];
    return j;
}

Vec2 Mesh::map_to_physical(int cell, const Vec2& xi) const
{
    return vertices_[cells_[cell][0]] + jacobian(cell) * xi;
}

Vec2 Mesh::map_to_reference(int cell, const Vec2& x) const
{
    return jacobian(cell).inverse() * (x - vertices_[cells_[cell][0]]);
}

double Mesh::cell_area(int cell) const
{
    return 0.5 * jacobian(cell).determinant();
}

double Mesh::cell_diameter(int cell) const
{
    const auto& c = cells_[cell];
    double d = 0;
    for (int e = 0; e < 3; ++e)
        d = std::max(d, (vertices_[c[kEdgeVertices[e][0]]] - vertices_[c[kEdgeVertices[e][1]]]).norm());
    return d;
}

double Mesh::cell_inradius(int cell) const
{
    const auto& c = cells_[cell];
    double perimeter = 0;
    for (int e = 0; e < 3; ++e)
        perimeter += (vertices_[c[kEdgeVertices[e][0]]] - vertices_[c[kEdgeVertices[e][1]]]).norm();
    return 2 * cell_area(cell) / perimeter;
}

FacetGeometry Mesh::facet_geometry(int edge) const
{
    if (edge < 0 || edge >= num_edges() || edge_facet_[edge] < 0)
        throw std::invalid_argument("edge " + std::to_string(edge) + " is not a boundary facet");
    const Facet& f = facets_[edge_facet_[edge]];
    FacetGeometry g{f.normal, f.h, {}};
    const Vec2& a = vertices_[f.vertices[0]];
    const Vec2& b = vertices_[f.vertices[1]];
    for (const auto& s : facet_rule().points)
        g.quadrature_points.push_back((1 - s(0)) * a + s(0) * b);
    return g;
}

Mesh Mesh::tag_boundary(const FacetPredicate& predicate) const
{
    Mesh out = *this;
    for (auto& f : out.facets_) {
        const Vec2 mid = 0.5 * (vertices_[f.vertices[0]] + vertices_[f.vertices[1]]);
        const auto tag = predicate(mid);
        if (!tag || *tag == BoundaryTag::untagged) {
            std::ostringstream msg;
            msg << "untagged facet " << f.edge << " at midpoint (" << mid.x() << ", " << mid.y() << ")";
            throw ConfigError(msg.str());
        }
        f.tag = *tag;
    }
    return out;
}

Mesh Mesh::scaled(double s) const
{
    Mesh out = *this;
    for (auto& v : out.vertices_)
        v *= s;
    for (auto& f : out.facets_)
        f.h *= s;
    return out;
}

std::optional<std::pair<int, Vec2>> Mesh::locate(const Vec2& x) const
{
    constexpr double tol = 1e-12;
    for (int c = 0; c < num_cells(); ++c) {
        const Vec2 xi = map_to_reference(c, x);
        if (xi.x() >= -tol && xi.y() >= -tol && xi.x() + xi.y() <= 1 + tol)
            return std::pair{c, xi};
    }
    return std::nullopt;
}

void Mesh::write(std::ostream& os) const
{
    const auto prec = os.precision(17);
    for (const auto& v : vertices_)
        os << "v " << v.x() << ' ' << v.y() << '\n';
    for (const auto& c : cells_)
        os << "c " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    for (const auto& f : facets_)
        os << "f " << f.vertices[0] << ' ' << f.vertices[1] << ' ' << to_string(f.tag) << '\n';
    os.precision(prec);
}

Mesh build_unit_square(int n, Diagonal diagonal)
{
    if (n < 1)
        throw ConfigError("mesh resolution must be at least 1");
    const double h = 1.0 / n;
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> cells;
    const auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vertices.emplace_back(i * h, j * h);

    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
            if (diagonal == Diagonal::right) {
                cells.push_back({v00, v10, v11});
                cells.push_back({v00, v11, v01});
            } else {
                const int m = static_cast<int>(vertices.size());
                vertices.emplace_back((i + 0.5) * h, (j + 0.5) * h);
                cells.push_back({v00, v10, m});
                cells.push_back({v10, v11, m});
                cells.push_back({v11, v01, m});
                cells.push_back({v01, v00, m});
            }
        }
    }
    return Mesh(std::move(vertices), std::move(cells));
}

FacetPredicate slip_walls_predicate(std::initializer_list<Wall> slip_walls)
{
    return slip_walls_predicate(std::vector<Wall>(slip_walls));
}

FacetPredicate slip_walls_predicate(std::vector<Wall> walls)
{
    return [walls](const Vec2& m) -> std::optional<BoundaryTag> {
        constexpr double tol = 1e-12;
        for (Wall w : walls) {
            const bool on = (w == Wall::bottom && std::abs(m.y()) < tol)
                || (w == Wall::top && std::abs(m.y() - 1) < tol)
                || (w == Wall::left && std::abs(m.x()) < tol)
                || (w == Wall::right && std::abs(m.x() - 1) < tol);
            if (on)
                return BoundaryTag::slip;
        }
        return BoundaryTag::dirichlet;
    };
}

FacetPredicate top_wall_predicate()
{
    return slip_walls_predicate({Wall::top});
}

FacetPredicate all_slip_predicate()
{
    return [](const Vec2&) -> std::optional<BoundaryTag> { return BoundaryTag::slip; };
}

} // namespace slipflow
