#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace decouple {

using Index = std::int32_t;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class BoundaryTag { dirichlet };

struct BoundaryEdge {
    std::array<Index, 2> vertices;  // oriented as in the owning (CCW) cell
    Index edge = -1;                // global edge index
    BoundaryTag tag = BoundaryTag::dirichlet;
};

/// Conforming triangulation. Local edge e of a cell is the one opposite local
/// vertex e, i.e. (v1,v2), (v2,v0), (v0,v1). Global edges store their endpoints
/// with the smaller vertex index first.
///
/// A Mesh is immutable once built. `from_cells` derives topology without
/// checking invariants so that damaged meshes can still be inspected by
/// `check_invariants`; the generators below always validate.
class Mesh {
public:
    static Mesh from_cells(std::vector<Point> vertices, std::vector<std::array<Index, 3>> cells,
                           int level = 0);

    [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<std::array<Index, 3>>& cells() const noexcept { return cells_; }
    [[nodiscard]] const std::vector<std::array<Index, 2>>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<std::array<Index, 3>>& cell_edges() const noexcept { return cell_edges_; }
    [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_edges_; }
    /// Number of cells adjacent to each global edge.
    [[nodiscard]] const std::vector<int>& edge_valence() const noexcept { return edge_valence_; }
    [[nodiscard]] int level() const noexcept { return level_; }

    [[nodiscard]] std::size_t n_vertices() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t n_cells() const noexcept { return cells_.size(); }
    [[nodiscard]] std::size_t n_edges() const noexcept { return edges_.size(); }

    [[nodiscard]] std::array<Point, 3> cell_points(std::size_t c) const;
    /// Twice the signed area; positive for counter-clockwise cells.
    [[nodiscard]] double signed_double_area(std::size_t c) const;
    [[nodiscard]] bool is_boundary_edge(Index e) const { return edge_valence_[static_cast<std::size_t>(e)] == 1; }
    [[nodiscard]] bool is_boundary_vertex(Index v) const { return boundary_vertex_[static_cast<std::size_t>(v)]; }

private:
    std::vector<Point> vertices_;
    std::vector<std::array<Index, 3>> cells_;
    std::vector<std::array<Index, 2>> edges_;
    std::vector<std::array<Index, 3>> cell_edges_;
    std::vector<int> edge_valence_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<bool> boundary_vertex_;
    int level_ = 0;
};

struct MeshCheck {
    bool ok = true;
    std::string failed_invariant;  // "orientation", "edge_manifold", "euler", "boundary_loop"
    std::string detail;
};

/// Orientation, edge-manifold, Euler characteristic and single boundary loop.
[[nodiscard]] MeshCheck check_invariants(const Mesh& m);

/// Throws InvalidMesh naming the first violated invariant.
void validate(const Mesh& m);

/// Structured mesh of [0,1]^2 with n x n squares, each split along its
/// lower-left to upper-right diagonal.
[[nodiscard]] Mesh unit_square_mesh(int n);

/// (-1,1)^2 minus the lower right quadrant; cells of size 1/n, n even.
[[nodiscard]] Mesh lshape_mesh(int n);

/// Red refinement: every triangle is split into four congruent children.
/// Parent vertices keep their indices; edge midpoints follow in edge order.
[[nodiscard]] Mesh refine_uniform(const Mesh& m);

/// Maximum edge length.
[[nodiscard]] double mesh_size(const Mesh& m);

/// Smallest interior angle over all cells, in radians.
[[nodiscard]] double min_angle(const Mesh& m);

/// Sum of cell areas.
[[nodiscard]] double mesh_area(const Mesh& m);

}  // namespace decouple
