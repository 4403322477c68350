#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "decouple/assembly.hpp"
#include "decouple/error.hpp"
#include "decouple/fespace.hpp"
#include "decouple/quadrature.hpp"
#include "support.hpp"

using namespace decouple;

namespace {

MeshPtr square(int n) { return std::make_shared<const Mesh>(unit_square_mesh(n)); }

double row_dot(const std::vector<double>& row, const FEFunction& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * f.coeffs()[i];
    return s;
}

/// Barycentric coordinates of p in cell c.
std::array<double, 3> barycentric(const Mesh& m, std::size_t c, const Point& p) {
    const auto v = m.cell_points(c);
    const double det = m.signed_double_area(c);
    const double l1 = ((p.x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (p.y - v[0].y)) / det;
    const double l2 = ((v[1].x - v[0].x) * (p.y - v[0].y) - (p.x - v[0].x) * (v[1].y - v[0].y)) / det;
    return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

TEST(BuildSpace, DofCounts) {
    const auto m = square(1);
    EXPECT_EQ(build_space(m, 1, ValueShape::scalar)->n_dofs(), 4u);
    EXPECT_EQ(build_space(m, 2, ValueShape::scalar)->n_dofs(), 9u);
    EXPECT_EQ(build_space(m, 2, ValueShape::vector2)->n_dofs(), 18u);
    EXPECT_EQ(build_space(m, 3, ValueShape::scalar)->n_dofs(), 16u);
    EXPECT_EQ(build_space(m, 2, ValueShape::symtensor2)->n_dofs(), 27u);
}

TEST(BuildSpace, RejectsUnsupportedOrder) {
    EXPECT_THROW((void)build_space(square(1), 0, ValueShape::scalar), InvalidArgument);
    EXPECT_THROW((void)build_space(square(1), 4, ValueShape::scalar), InvalidArgument);
}

TEST(BuildSpace, NumberingVerticesThenEdgesThenInterior) {
    const auto s = build_space(square(2), 3, ValueShape::vector2);
    const auto& m = s->mesh();
    for (std::size_t v = 0; v < m.n_vertices(); ++v) {
        EXPECT_EQ(s->node_points()[v].x, m.vertices()[v].x);
        EXPECT_EQ(s->node_points()[v].y, m.vertices()[v].y);
    }
    // Two nodes per edge, from the lower to the higher vertex index.
    const auto& e0 = m.edges()[0];
    const auto& a = m.vertices()[static_cast<std::size_t>(e0[0])];
    const auto& b = m.vertices()[static_cast<std::size_t>(e0[1])];
    const auto& first = s->node_points()[m.n_vertices()];
    EXPECT_NEAR(first.x, a.x + (b.x - a.x) / 3, 1e-15);
    EXPECT_NEAR(first.y, a.y + (b.y - a.y) / 3, 1e-15);
    EXPECT_EQ(s->n_nodes(), m.n_vertices() + 2 * m.n_edges() + m.n_cells());
    EXPECT_EQ(s->dof(5, 1), 11);
}

TEST(DirichletDofs, Counts) {
    const auto m = square(2);
    EXPECT_EQ(dirichlet_dofs(*build_space(m, 1, ValueShape::scalar)).size(), 8u);
    EXPECT_EQ(dirichlet_dofs(*build_space(m, 2, ValueShape::scalar)).size(), 16u);
    EXPECT_EQ(dirichlet_dofs(*build_space(m, 2, ValueShape::vector2)).size(), 32u);
    const auto d = dirichlet_dofs(*build_space(m, 2, ValueShape::vector2));
    EXPECT_TRUE(std::is_sorted(d.begin(), d.end()));
}

TEST(Interpolate, ConstantIsExact) {
    const auto s = build_space(square(3), 3, ValueShape::scalar);
    const auto f = interpolate(s, scalar_field([](const Point&) { return 1.0; }));
    for (double c : f.coeffs()) EXPECT_EQ(c, 1.0);
    EXPECT_NEAR(f.eval({0.31, 0.77})[0], 1.0, 1e-14);
}

TEST(Interpolate, ReproducesAffineOnP1) {
    const auto s = build_space(square(4), 1, ValueShape::scalar);
    const auto f = interpolate(s, scalar_field([](const Point& p) { return p.x; }));
    const auto pts = test::random_vector(40, 3);
    for (std::size_t i = 0; i < pts.size(); i += 2) {
        const Point p{0.5 + 0.49 * pts[i], 0.5 + 0.49 * pts[i + 1]};
        EXPECT_NEAR(f.eval(p)[0], p.x, 1e-14);
    }
}

TEST(Interpolate, QuadraticOnP1HasErrorHSquaredOverFour) {
    // Linear interpolation of x^2 misses by h^2/4 at edge midpoints: 1/64 for h = 1/4.
    const auto s = build_space(square(4), 1, ValueShape::scalar);
    const auto f = interpolate(s, scalar_field([](const Point& p) { return p.x * p.x; }));
    double worst = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const Point p{k / 400.0, 0.0};
        worst = std::max(worst, std::abs(f.eval(p)[0] - p.x * p.x));
    }
    EXPECT_NEAR(worst, 1.0 / 64, 1e-14);
}

TEST(Interpolate, IsAProjectionOnDiscreteFunctions) {
    const auto s = build_space(square(3), 2, ValueShape::vector2);
    const FEFunction u(s, test::random_vector(s->n_dofs(), 5));
    const auto v = interpolate(s, u);
    EXPECT_EQ(v.coeffs(), u.coeffs());
}

TEST(Interpolate, ShapeMismatch) {
    const auto s = build_space(square(1), 1, ValueShape::vector2);
    EXPECT_THROW((void)interpolate(s, scalar_field([](const Point&) { return 1.0; })), ShapeMismatch);
}

TEST(Basis, PartitionOfUnityAtQuadraturePoints) {
    for (int k = 1; k <= 3; ++k) {
        const LagrangeElement el(k);
        std::vector<double> phi(static_cast<std::size_t>(el.n_basis()));
        for (const auto& q : quadrature_rule(8).points) {
            el.values(q, phi);
            double sum = 0.0;
            for (double v : phi) sum += v;
            EXPECT_NEAR(sum, 1.0, 1e-14);
        }
    }
}

TEST(Basis, ConformityAcrossInteriorEdges) {
    for (int k = 1; k <= 3; ++k) {
        const auto s = build_space(std::make_shared<const Mesh>(lshape_mesh(2)), k, ValueShape::vector2);
        const auto& m = s->mesh();
        const FEFunction u(s, test::random_vector(s->n_dofs(), 11 + static_cast<unsigned>(k)));
        std::vector<std::vector<std::size_t>> edge_cells(m.n_edges());
        for (std::size_t c = 0; c < m.n_cells(); ++c) {
            for (Index e : m.cell_edges()[c]) edge_cells[static_cast<std::size_t>(e)].push_back(c);
        }
        double jump = 0.0;
        for (std::size_t e = 0; e < m.n_edges(); ++e) {
            if (edge_cells[e].size() != 2) continue;
            const auto& a = m.vertices()[static_cast<std::size_t>(m.edges()[e][0])];
            const auto& b = m.vertices()[static_cast<std::size_t>(m.edges()[e][1])];
            for (double t : {0.137, 0.5, 0.81}) {
                const Point p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
                std::array<double, 2> v0{}, v1{};
                u.eval_in_cell(edge_cells[e][0], barycentric(m, edge_cells[e][0], p), v0);
                u.eval_in_cell(edge_cells[e][1], barycentric(m, edge_cells[e][1], p), v1);
                jump = std::max({jump, std::abs(v0[0] - v1[0]), std::abs(v0[1] - v1[1])});
            }
        }
        EXPECT_LT(jump, 1e-12) << "order " << k;
    }
}

TEST(MeanZeroConstraint, IntegratesDiscreteFunctions) {
    const auto s = build_space(square(4), 2, ValueShape::scalar);
    const auto row = mean_zero_constraint(*s);
    EXPECT_NEAR(row_dot(row, interpolate(s, scalar_field([](const Point&) { return 1.0; }))), 1.0, 1e-14);
    const auto odd = interpolate(s, scalar_field([](const Point& p) { return (p.x - 0.5) * (p.y - 0.5) + (p.x - 0.5); }));
    EXPECT_NEAR(row_dot(row, odd), 0.0, 1e-15);
}

TEST(MeanZeroConstraint, InterpolatedSineConvergesAtLeastQuadratically) {
    std::vector<double> h, err;
    for (int n : {8, 16, 32}) {
        const auto s = build_space(square(n), 1, ValueShape::scalar);
        const auto f = interpolate(s, scalar_field([](const Point& p) { return std::sin(2 * std::numbers::pi * p.x); }));
        h.push_back(1.0 / n);
        err.push_back(std::abs(row_dot(mean_zero_constraint(*s), f)));
    }
    // The error vanishes up to roundoff by symmetry or decays like h^2.
    for (std::size_t i = 1; i < err.size(); ++i) {
        EXPECT_TRUE(err[i] < 1e-14 || err[i] <= err[i - 1] / 3.9) << err[i - 1] << " -> " << err[i];
    }
}

TEST(MeanZeroConstraint, RejectsVectorSpace) {
    EXPECT_THROW((void)mean_zero_constraint(*build_space(square(1), 1, ValueShape::vector2)), ShapeMismatch);
}

TEST(RigidMotionConstraints, RowsAgainstSpanningFields) {
    const auto s = build_space(square(2), 2, ValueShape::vector2);
    const auto rows = rigid_motion_constraints(*s, RigidMotionVariant::rm);
    const auto e1 = interpolate(s, vector_field([](const Point&) { return std::array<double, 2>{1.0, 0.0}; }));
    EXPECT_NEAR(row_dot(rows[0], e1), 1.0, 1e-14);  // the area
    EXPECT_NEAR(row_dot(rows[1], e1), 0.0, 1e-14);
}

TEST(RigidMotionConstraints, RotationIsOrthogonalToTranslationsOnCenteredSquare) {
    auto base = unit_square_mesh(4);
    auto v = base.vertices();
    for (auto& p : v) p = {p.x - 0.5, p.y - 0.5};
    const auto m = std::make_shared<const Mesh>(Mesh::from_cells(v, base.cells()));
    const auto s = build_space(m, 1, ValueShape::vector2);
    const auto rows = rigid_motion_constraints(*s, RigidMotionVariant::rm);
    const auto rot = interpolate(s, vector_field([](const Point& p) { return std::array<double, 2>{-p.y, p.x}; }));
    EXPECT_NEAR(row_dot(rows[0], rot), 0.0, 1e-15);
    EXPECT_NEAR(row_dot(rows[1], rot), 0.0, 1e-15);
    EXPECT_GT(row_dot(rows[2], rot), 0.1);
}

TEST(RigidMotionConstraints, GramMatrixIsNonsingular) {
    for (auto variant : {RigidMotionVariant::rm, RigidMotionVariant::rm_rot}) {
        const auto s = build_space(square(2), 2, ValueShape::vector2);
        const auto rows = rigid_motion_constraints(*s, variant);
        const auto fields = rigid_motion_fields(variant);
        Eigen::Matrix3d g;
        for (int i = 0; i < 3; ++i) {
            const auto f = interpolate(s, fields[static_cast<std::size_t>(i)]);
            for (int j = 0; j < 3; ++j) g(j, i) = row_dot(rows[static_cast<std::size_t>(j)], f);
        }
        EXPECT_GT(std::abs(g.determinant()), 1e-6);
        EXPECT_NEAR((g - g.transpose()).norm(), 0.0, 1e-14);
    }
}

TEST(RigidMotionConstraints, RejectsScalarSpace) {
    EXPECT_THROW((void)rigid_motion_constraints(*build_space(square(1), 1, ValueShape::scalar), RigidMotionVariant::rm),
                 ShapeMismatch);
}

TEST(FEFunction, PointEvaluationOutsideDomainThrows) {
    const FEFunction u(build_space(std::make_shared<const Mesh>(lshape_mesh(2)), 1, ValueShape::scalar));
    EXPECT_THROW((void)u.eval({0.5, -0.5}), InvalidArgument);
    EXPECT_NO_THROW((void)u.eval({0.0, 0.0}));
}

TEST(FEFunction, CoefficientLengthChecked) {
    EXPECT_THROW(FEFunction(build_space(square(1), 1, ValueShape::scalar), {1.0, 2.0}), ShapeMismatch);
}
