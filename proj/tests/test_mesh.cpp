#include <gtest/gtest.h>

#include <cmath>

#include "decouple/error.hpp"
#include "decouple/mesh.hpp"

using namespace decouple;

namespace {

long euler(const Mesh& m) {
    return static_cast<long>(m.n_vertices()) - static_cast<long>(m.n_edges()) + static_cast<long>(m.n_cells());
}

}  // namespace

TEST(UnitSquareMesh, SmallestCase) {
    const Mesh m = unit_square_mesh(1);
    EXPECT_EQ(m.n_vertices(), 4u);
    EXPECT_EQ(m.n_cells(), 2u);
    EXPECT_EQ(m.boundary_edges().size(), 4u);
}

TEST(UnitSquareMesh, Counts) {
    const Mesh m = unit_square_mesh(2);
    EXPECT_EQ(m.n_vertices(), 9u);
    EXPECT_EQ(m.n_cells(), 8u);
    EXPECT_EQ(m.boundary_edges().size(), 8u);

    const Mesh m4 = unit_square_mesh(4);
    EXPECT_EQ(m4.n_vertices(), 25u);
    EXPECT_EQ(m4.n_edges(), 56u);
    EXPECT_EQ(m4.n_cells(), 32u);
    EXPECT_EQ(euler(m4), 1);
}

TEST(UnitSquareMesh, LexicographicVerticesAndFixedDiagonal) {
    const Mesh m = unit_square_mesh(3);
    for (int j = 0; j <= 3; ++j) {
        for (int i = 0; i <= 3; ++i) {
            const auto& p = m.vertices()[static_cast<std::size_t>(4 * j + i)];
            EXPECT_DOUBLE_EQ(p.x, i / 3.0);
            EXPECT_DOUBLE_EQ(p.y, j / 3.0);
        }
    }
    // The first square is split along (0,0)-(1/3,1/3).
    const auto& c0 = m.cells()[0];
    EXPECT_EQ(c0[0], 0);
    EXPECT_EQ(c0[2], 5);
}

TEST(UnitSquareMesh, RejectsZero) { EXPECT_THROW((void)unit_square_mesh(0), InvalidArgument); }

TEST(LShapeMesh, Counts) {
    const Mesh m = lshape_mesh(2);
    EXPECT_EQ(m.n_vertices(), 21u);
    EXPECT_EQ(m.n_cells(), 24u);
    EXPECT_EQ(m.boundary_edges().size(), 16u);
    EXPECT_NEAR(mesh_area(m), 3.0, 1e-14);
    EXPECT_TRUE(check_invariants(m).ok);
}

TEST(LShapeMesh, ReentrantCornerIsVertex) {
    for (int n : {2, 4, 6}) {
        const Mesh m = lshape_mesh(n);
        bool found = false;
        for (std::size_t v = 0; v < m.n_vertices(); ++v) {
            const auto& p = m.vertices()[v];
            if (p.x == 0.0 && p.y == 0.0) found = m.is_boundary_vertex(static_cast<Index>(v));
        }
        EXPECT_TRUE(found) << "n = " << n;
    }
}

TEST(LShapeMesh, RejectsOddN) {
    EXPECT_THROW((void)lshape_mesh(3), InvalidArgument);
    EXPECT_THROW((void)lshape_mesh(0), InvalidArgument);
}

TEST(RefineUniform, Counts) {
    const Mesh once = refine_uniform(unit_square_mesh(1));
    EXPECT_EQ(once.n_vertices(), 9u);
    EXPECT_EQ(once.n_cells(), 8u);
    EXPECT_EQ(once.level(), 1);
    const Mesh twice = refine_uniform(once);
    EXPECT_EQ(twice.n_cells(), 32u);
    EXPECT_EQ(twice.level(), 2);
}

TEST(RefineUniform, HalvesMeshSizeToRoundoff) {
    for (const Mesh& m : {unit_square_mesh(1), unit_square_mesh(3), lshape_mesh(2)}) {
        const Mesh r = refine_uniform(m);
        EXPECT_NEAR(mesh_size(r), mesh_size(m) / 2, 4e-16 * mesh_size(m));
    }
}

TEST(RefineUniform, KeepsParentVerticesAndMinAngle) {
    const Mesh m = lshape_mesh(2);
    const Mesh r = refine_uniform(m);
    for (std::size_t v = 0; v < m.n_vertices(); ++v) {
        EXPECT_EQ(r.vertices()[v].x, m.vertices()[v].x);
        EXPECT_EQ(r.vertices()[v].y, m.vertices()[v].y);
    }
    EXPECT_NEAR(min_angle(r), min_angle(m), 1e-14);
    EXPECT_NEAR(min_angle(m), std::atan(1.0), 1e-14);
}

TEST(RefineUniform, InvariantsHoldOnEveryLevel) {
    Mesh m = unit_square_mesh(2);
    Mesh l = lshape_mesh(2);
    for (int k = 0; k < 3; ++k) {
        EXPECT_TRUE(check_invariants(m).ok);
        EXPECT_TRUE(check_invariants(l).ok);
        EXPECT_EQ(euler(m), 1);
        EXPECT_EQ(euler(l), 1);
        m = refine_uniform(m);
        l = refine_uniform(l);
    }
}

TEST(MeshSize, Examples) {
    EXPECT_DOUBLE_EQ(mesh_size(unit_square_mesh(1)), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(mesh_size(unit_square_mesh(4)), std::sqrt(2.0) / 4);
}

TEST(CheckInvariants, FlippedCellFailsOrientation) {
    const Mesh m = unit_square_mesh(2);
    auto cells = m.cells();
    std::swap(cells[3][0], cells[3][1]);
    const auto r = check_invariants(Mesh::from_cells(m.vertices(), cells));
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_invariant, "orientation");
    EXPECT_NE(r.detail.find("cell 3"), std::string::npos);
}

TEST(CheckInvariants, DuplicatedCellFailsEdgeManifold) {
    const Mesh m = unit_square_mesh(1);
    auto cells = m.cells();
    cells.push_back(cells[0]);
    EXPECT_EQ(check_invariants(Mesh::from_cells(m.vertices(), cells)).failed_invariant, "edge_manifold");
}

TEST(CheckInvariants, DisconnectedMeshFailsEuler) {
    const std::vector<Point> v{{0, 0}, {1, 0}, {0, 1}, {3, 0}, {4, 0}, {3, 1}};
    const auto r = check_invariants(Mesh::from_cells(v, {{0, 1, 2}, {3, 4, 5}}));
    EXPECT_EQ(r.failed_invariant, "euler");
}

TEST(CheckInvariants, BowtieFailsBoundaryLoop) {
    // Two triangles sharing only vertex 0: V - E + F = 5 - 6 + 2 = 1.
    const std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {-1, 0}, {-1, -1}};
    const auto r = check_invariants(Mesh::from_cells(v, {{0, 1, 2}, {0, 3, 4}}));
    EXPECT_EQ(r.failed_invariant, "boundary_loop");
}

TEST(CheckInvariants, ValidateThrowsNamingInvariant) {
    const Mesh m = unit_square_mesh(1);
    auto cells = m.cells();
    std::swap(cells[0][1], cells[0][2]);
    try {
        validate(Mesh::from_cells(m.vertices(), cells));
        FAIL() << "expected InvalidMesh";
    } catch (const InvalidMesh& e) {
        EXPECT_EQ(e.invariant(), "orientation");
    }
}

TEST(CheckInvariants, OutOfRangeVertexIsRejected) {
    EXPECT_THROW((void)Mesh::from_cells({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 7}}), InvalidMesh);
}
