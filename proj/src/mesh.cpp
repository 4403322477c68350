#include "decouple/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "decouple/error.hpp"

namespace decouple {

namespace {

constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{1, 2}, {2, 0}, {0, 1}}};

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

Mesh Mesh::from_cells(std::vector<Point> vertices, std::vector<std::array<Index, 3>> cells, int level) {
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.cells_ = std::move(cells);
    m.level_ = level;

    const auto nv = static_cast<Index>(m.vertices_.size());
    std::map<std::pair<Index, Index>, Index> edge_ids;
    m.cell_edges_.resize(m.cells_.size());
    for (std::size_t c = 0; c < m.cells_.size(); ++c) {
        for (int e = 0; e < 3; ++e) {
            const Index a = m.cells_[c][kLocalEdges[e][0]];
            const Index b = m.cells_[c][kLocalEdges[e][1]];
            if (a < 0 || b < 0 || a >= nv || b >= nv) {
                throw InvalidMesh("vertex_index", "cell references a vertex out of range");
            }
            const auto key = std::minmax(a, b);
            auto [it, inserted] = edge_ids.try_emplace({key.first, key.second}, static_cast<Index>(m.edges_.size()));
            if (inserted) {
                m.edges_.push_back({key.first, key.second});
                m.edge_valence_.push_back(0);
            }
            m.cell_edges_[c][static_cast<std::size_t>(e)] = it->second;
            ++m.edge_valence_[static_cast<std::size_t>(it->second)];
        }
    }

    m.boundary_vertex_.assign(m.vertices_.size(), false);
    for (std::size_t c = 0; c < m.cells_.size(); ++c) {
        for (int e = 0; e < 3; ++e) {
            const Index id = m.cell_edges_[c][static_cast<std::size_t>(e)];
            if (m.edge_valence_[static_cast<std::size_t>(id)] != 1) continue;
            const Index a = m.cells_[c][kLocalEdges[e][0]];
            const Index b = m.cells_[c][kLocalEdges[e][1]];
            m.boundary_edges_.push_back({{a, b}, id, BoundaryTag::dirichlet});
            m.boundary_vertex_[static_cast<std::size_t>(a)] = true;
            m.boundary_vertex_[static_cast<std::size_t>(b)] = true;
        }
    }
    std::sort(m.boundary_edges_.begin(), m.boundary_edges_.end(),
              [](const BoundaryEdge& l, const BoundaryEdge& r) { return l.edge < r.edge; });
    return m;
}

std::array<Point, 3> Mesh::cell_points(std::size_t c) const {
    const auto& cell = cells_[c];
    return {vertices_[static_cast<std::size_t>(cell[0])], vertices_[static_cast<std::size_t>(cell[1])],
            vertices_[static_cast<std::size_t>(cell[2])]};
}

double Mesh::signed_double_area(std::size_t c) const {
    const auto p = cell_points(c);
    return (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
}

MeshCheck check_invariants(const Mesh& m) {
    auto fail = [](std::string inv, std::string detail) { return MeshCheck{false, std::move(inv), std::move(detail)}; };

    if (m.n_cells() == 0) return fail("edge_manifold", "mesh has no cells");

    for (std::size_t c = 0; c < m.n_cells(); ++c) {
        if (!(m.signed_double_area(c) > 0.0)) {
            std::ostringstream os;
            os << "cell " << c << " has non-positive signed area " << 0.5 * m.signed_double_area(c);
            return fail("orientation", os.str());
        }
    }

    for (std::size_t e = 0; e < m.n_edges(); ++e) {
        const int val = m.edge_valence()[e];
        if (val < 1 || val > 2) {
            std::ostringstream os;
            os << "edge " << e << " is shared by " << val << " cells";
            return fail("edge_manifold", os.str());
        }
    }
    // Interior edges must be traversed in opposite directions by their two cells.
    {
        std::map<std::pair<Index, Index>, int> directed;
        for (const auto& cell : m.cells()) {
            for (const auto& le : kLocalEdges) {
                if (++directed[{cell[static_cast<std::size_t>(le[0])], cell[static_cast<std::size_t>(le[1])]}] > 1) {
                    return fail("edge_manifold", "an edge is traversed twice in the same direction");
                }
            }
        }
    }

    const auto euler = static_cast<long>(m.n_vertices()) - static_cast<long>(m.n_edges()) + static_cast<long>(m.n_cells());
    if (euler != 1) {
        std::ostringstream os;
        os << "V - E + F = " << euler << ", expected 1";
        return fail("euler", os.str());
    }

    const auto& bnd = m.boundary_edges();
    if (bnd.empty()) return fail("boundary_loop", "mesh has no boundary");
    std::map<Index, std::size_t> outgoing;
    for (std::size_t i = 0; i < bnd.size(); ++i) {
        if (!outgoing.emplace(bnd[i].vertices[0], i).second) {
            return fail("boundary_loop", "boundary vertex with two outgoing boundary edges");
        }
    }
    std::size_t visited = 0;
    std::size_t cur = 0;
    do {
        auto it = outgoing.find(bnd[cur].vertices[1]);
        if (it == outgoing.end()) return fail("boundary_loop", "boundary chain is open");
        cur = it->second;
        ++visited;
    } while (cur != 0 && visited <= bnd.size());
    if (visited != bnd.size()) {
        std::ostringstream os;
        os << "boundary has more than one loop (" << visited << " of " << bnd.size() << " edges in the first)";
        return fail("boundary_loop", os.str());
    }
    return {};
}

void validate(const Mesh& m) {
    const auto check = check_invariants(m);
    if (!check.ok) throw InvalidMesh(check.failed_invariant, check.failed_invariant + ": " + check.detail);
}

Mesh unit_square_mesh(int n) {
    if (n < 1) throw InvalidArgument("unit_square_mesh: n must be >= 1");
    const int np = n + 1;
    std::vector<Point> verts;
    verts.reserve(static_cast<std::size_t>(np * np));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
        }
    }
    auto id = [np](int i, int j) { return static_cast<Index>(j * np + i); };
    std::vector<std::array<Index, 3>> cells;
    cells.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    Mesh m = Mesh::from_cells(std::move(verts), std::move(cells), 0);
    validate(m);
    return m;
}

Mesh lshape_mesh(int n) {
    if (n < 1) throw InvalidArgument("lshape_mesh: n must be >= 1");
    if (n % 2 != 0) throw InvalidArgument("lshape_mesh: n must be even so that the reentrant corner is a vertex");
    const int np = 2 * n + 1;
    // Grid point (i,j) sits at (-1 + i/n, -1 + j/n); the removed quadrant is x > 0, y < 0.
    auto removed_point = [n](int i, int j) { return i > n && j < n; };
    std::vector<Index> map(static_cast<std::size_t>(np * np), -1);
    std::vector<Point> verts;
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
            if (removed_point(i, j)) continue;
            map[static_cast<std::size_t>(j * np + i)] = static_cast<Index>(verts.size());
            verts.push_back({-1.0 + static_cast<double>(i) / n, -1.0 + static_cast<double>(j) / n});
        }
    }
    auto id = [&](int i, int j) { return map[static_cast<std::size_t>(j * np + i)]; };
    std::vector<std::array<Index, 3>> cells;
    for (int j = 0; j < 2 * n; ++j) {
        for (int i = 0; i < 2 * n; ++i) {
            if (i >= n && j < n) continue;
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    Mesh m = Mesh::from_cells(std::move(verts), std::move(cells), 0);
    validate(m);
    return m;
}

Mesh refine_uniform(const Mesh& m) {
    validate(m);
    std::vector<Point> verts = m.vertices();
    const auto nv = static_cast<Index>(verts.size());
    verts.reserve(verts.size() + m.n_edges());
    for (const auto& e : m.edges()) {
        const Point& a = m.vertices()[static_cast<std::size_t>(e[0])];
        const Point& b = m.vertices()[static_cast<std::size_t>(e[1])];
        verts.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
    std::vector<std::array<Index, 3>> cells;
    cells.reserve(4 * m.n_cells());
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
        const auto& v = m.cells()[c];
        const auto& e = m.cell_edges()[c];
        // mid[k] is the midpoint of the edge opposite local vertex k.
        const Index m0 = nv + e[0];
        const Index m1 = nv + e[1];
        const Index m2 = nv + e[2];
        cells.push_back({v[0], m2, m1});
        cells.push_back({m2, v[1], m0});
        cells.push_back({m1, m0, v[2]});
        cells.push_back({m0, m1, m2});
    }
    Mesh child = Mesh::from_cells(std::move(verts), std::move(cells), m.level() + 1);
    validate(child);
    return child;
}

double mesh_size(const Mesh& m) {
    double h = 0.0;
    for (const auto& e : m.edges()) {
        h = std::max(h, distance(m.vertices()[static_cast<std::size_t>(e[0])], m.vertices()[static_cast<std::size_t>(e[1])]));
    }
    return h;
}

double min_angle(const Mesh& m) {
    double best = std::numbers::pi;
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
        const auto p = m.cell_points(c);
        for (int k = 0; k < 3; ++k) {
            const Point& o = p[static_cast<std::size_t>(k)];
            const Point& a = p[static_cast<std::size_t>((k + 1) % 3)];
            const Point& b = p[static_cast<std::size_t>((k + 2) % 3)];
            const double ux = a.x - o.x, uy = a.y - o.y, vx = b.x - o.x, vy = b.y - o.y;
            best = std::min(best, std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy));
        }
    }
    return best;
}

double mesh_area(const Mesh& m) {
    double a = 0.0;
    for (std::size_t c = 0; c < m.n_cells(); ++c) a += 0.5 * m.signed_double_area(c);
    return a;
}

}  // namespace decouple
