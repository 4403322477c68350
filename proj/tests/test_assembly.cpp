#include <gtest/gtest.h>

#include <cmath>

#include "decouple/assembly.hpp"
#include "decouple/error.hpp"
#include "decouple/quadrature.hpp"
#include "decouple/verification.hpp"
#include "support.hpp"

using namespace decouple;

namespace {

MeshPtr square(int n) { return std::make_shared<const Mesh>(unit_square_mesh(n)); }
MeshPtr reference_triangle() {
    return std::make_shared<const Mesh>(Mesh::from_cells({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}));
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

double quad_monomial(const QuadratureRule& r, int a, int b) {
    double s = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q) {
        s += r.weights[q] * std::pow(r.points[q][1], a) * std::pow(r.points[q][2], b);
    }
    return s;
}

}  // namespace

TEST(Quadrature, LowOrderRules) {
    const auto& r1 = quadrature_rule(1);
    ASSERT_EQ(r1.size(), 1u);
    EXPECT_DOUBLE_EQ(r1.weights[0], 0.5);
    EXPECT_NEAR(r1.points[0][1], 1.0 / 3, 1e-16);

    const auto& r2 = quadrature_rule(2);
    ASSERT_EQ(r2.size(), 3u);
    for (double w : r2.weights) EXPECT_NEAR(w, 1.0 / 6, 1e-16);
    EXPECT_NEAR(quad_monomial(r2, 2, 0), 1.0 / 12, 1e-16);
    EXPECT_NEAR(quad_monomial(r2, 1, 1), 1.0 / 24, 1e-16);
    EXPECT_NEAR(quad_monomial(quadrature_rule(4), 2, 2), 1.0 / 180, 1e-16);
}

TEST(Quadrature, ExactForAllMonomialsUpToDegree) {
    for (int d = 1; d <= kMaxQuadratureDegree; ++d) {
        const auto& r = quadrature_rule(d);
        double wsum = 0.0;
        for (double w : r.weights) {
            EXPECT_GT(w, 0.0);
            wsum += w;
        }
        EXPECT_NEAR(wsum, 0.5, 1e-15);
        EXPECT_GE(r.degree, d);
        for (int a = 0; a <= d; ++a) {
            for (int b = 0; a + b <= d; ++b) {
                // Integral of x^a y^b over the reference triangle.
                const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                EXPECT_NEAR(quad_monomial(r, a, b), exact, 1e-15) << "degree " << d << " monomial " << a << "," << b;
            }
        }
    }
}

TEST(Quadrature, RejectsUnsupportedDegree) {
    EXPECT_THROW((void)quadrature_rule(0), InvalidArgument);
    EXPECT_THROW((void)quadrature_rule(9), InvalidArgument);
}

TEST(AssembleBilinear, ReferenceTriangleStiffnessAndMass) {
    const auto s = build_space(reference_triangle(), 1, ValueShape::scalar);
    const auto k = test::dense(assemble_bilinear(FormKind::stiffness, *s, *s));
    const auto m = test::dense(assemble_bilinear(FormKind::mass, *s, *s));
    Eigen::Matrix3d k_ref, m_ref;
    k_ref << 2, -1, -1, -1, 1, 0, -1, 0, 1;
    m_ref << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    EXPECT_NEAR((k - 0.5 * k_ref).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR((m - m_ref / 24).cwiseAbs().maxCoeff(), 0.0, 1e-16);
}

TEST(AssembleBilinear, SymmetricFormsAreSymmetric) {
    const auto m = std::make_shared<const Mesh>(lshape_mesh(2));
    const auto sc = build_space(m, 2, ValueShape::scalar);
    const auto vec = build_space(m, 2, ValueShape::vector2);
    const auto ten = build_space(m, 2, ValueShape::symtensor2);
    for (const auto& [kind, s] : std::vector<std::pair<FormKind, SpacePtr>>{{FormKind::mass, sc},
                                                                            {FormKind::stiffness, sc},
                                                                            {FormKind::curl_curl, sc},
                                                                            {FormKind::mass, vec},
                                                                            {FormKind::stiffness, vec},
                                                                            {FormKind::symcurl, vec},
                                                                            {FormKind::eps, vec},
                                                                            {FormKind::mass, ten},
                                                                            {FormKind::stiffness, ten}}) {
        EXPECT_LT(assemble_bilinear(kind, *s, *s).symmetry_error(), 1e-12) << to_string(kind);
    }
}

TEST(AssembleBilinear, StiffnessEqualsCurlCurl) {
    for (int k = 1; k <= 3; ++k) {
        const auto s = build_space(square(3), k, ValueShape::scalar);
        const auto a = test::dense(assemble_bilinear(FormKind::stiffness, *s, *s));
        const auto c = test::dense(assemble_bilinear(FormKind::curl_curl, *s, *s));
        EXPECT_LT((a - c).cwiseAbs().maxCoeff(), 1e-13 * a.cwiseAbs().maxCoeff());
    }
}

TEST(AssembleBilinear, SymcurlAnnihilatesRotatedRigidMotions) {
    const auto s = build_space(square(3), 2, ValueShape::vector2);
    const auto a = assemble_bilinear(FormKind::symcurl, *s, *s);
    for (const auto& f : rigid_motion_fields(RigidMotionVariant::rm_rot)) {
        const auto r = a * std::span<const double>(interpolate(s, f).coeffs());
        EXPECT_LT(norm_inf(r), 1e-13);
    }
    // (-y, x) is not in the kernel of sym curl.
    const auto rot = interpolate(s, rigid_motion_fields(RigidMotionVariant::rm)[2]);
    EXPECT_GT(norm_inf(a * std::span<const double>(rot.coeffs())), 1e-3);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(test::dense(a));
    EXPECT_GT(es.eigenvalues()(0), -1e-12);
    EXPECT_EQ(kernel_dimension(*s, FormKind::symcurl), 3);
}

TEST(AssembleBilinear, EpsAnnihilatesRigidMotions) {
    const auto s = build_space(square(2), 2, ValueShape::vector2);
    const auto a = assemble_bilinear(FormKind::eps, *s, *s);
    for (const auto& f : rigid_motion_fields(RigidMotionVariant::rm)) {
        EXPECT_LT(norm_inf(a * std::span<const double>(interpolate(s, f).coeffs())), 1e-13);
    }
    EXPECT_EQ(kernel_dimension(*s, FormKind::eps), 3);
}

TEST(AssembleBilinear, StiffnessKernelIsConstants) {
    const auto s = build_space(std::make_shared<const Mesh>(lshape_mesh(2)), 2, ValueShape::scalar);
    EXPECT_EQ(kernel_dimension(*s, FormKind::stiffness), 1);
    const auto a = test::dense(assemble_bilinear(FormKind::stiffness, *s, *s));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-10);
    EXPECT_EQ(lu.rank(), a.rows() - 1);
}

TEST(AssembleBilinear, DivPressureMatchesPointwiseQuadrature) {
    const auto m = square(2);
    const auto x = build_space(m, 2, ValueShape::vector2);
    const auto p = build_space(m, 1, ValueShape::scalar);
    const auto b = assemble_bilinear(FormKind::div_pressure, *x, *p);
    ASSERT_EQ(b.rows(), p->n_dofs());
    ASSERT_EQ(b.cols(), x->n_dofs());
    auto psi_c = test::random_vector(x->n_dofs(), 1);
    for (Index d : dirichlet_dofs(*x)) psi_c[static_cast<std::size_t>(d)] = 0.0;
    const FEFunction psi(x, psi_c);
    const FEFunction q(p, test::random_vector(p->n_dofs(), 2));
    const double assembled = dot(q.coeffs(), b * std::span<const double>(psi.coeffs()));

    const auto& rule = quadrature_rule(3);
    double direct = 0.0;
    for (std::size_t c = 0; c < m->n_cells(); ++c) {
        const double area = 0.5 * m->signed_double_area(c);
        for (std::size_t k = 0; k < rule.size(); ++k) {
            std::array<double, 4> g{};
            std::array<double, 1> qv{};
            psi.grad_in_cell(c, rule.points[k], g);
            q.eval_in_cell(c, rule.points[k], qv);
            direct += 2 * area * rule.weights[k] * (g[0] + g[3]) * qv[0];
        }
    }
    EXPECT_NEAR(assembled, direct, 1e-13);
}

TEST(AssembleBilinear, TracePiAgreesWithTraceOfSymcurl) {
    const auto m = square(3);
    const auto w = build_space(m, 2, ValueShape::scalar);
    const auto q = build_space(m, 2, ValueShape::vector2);
    const auto a = test::dense(assemble_bilinear(FormKind::trace_pi, *w, *q));
    const auto b = test::dense(assemble_operators(DiffOp::value, DiffOp::trace_symcurl, *w, *q));
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-13);
    const auto wr = test::vec(test::random_vector(w->n_dofs(), 7));
    const auto qr = test::vec(test::random_vector(q->n_dofs(), 8));
    EXPECT_NEAR(qr.dot(a * wr), qr.dot(b * wr), 1e-12);
}

TEST(AssembleBilinear, ShapeMismatchIsRejected) {
    const auto sc = build_space(square(1), 1, ValueShape::scalar);
    const auto vec = build_space(square(1), 1, ValueShape::vector2);
    EXPECT_THROW((void)assemble_bilinear(FormKind::symcurl, *sc, *sc), ShapeMismatch);
    EXPECT_THROW((void)assemble_bilinear(FormKind::curl_curl, *vec, *vec), ShapeMismatch);
    EXPECT_THROW((void)assemble_bilinear(FormKind::div_pressure, *sc, *sc), ShapeMismatch);
    EXPECT_THROW((void)op_size(DiffOp::rot, ValueShape::scalar), ShapeMismatch);
}

TEST(AssembleBilinear, BitwiseReproducible) {
    const auto s = build_space(std::make_shared<const Mesh>(lshape_mesh(4)), 3, ValueShape::vector2);
    const auto a = assemble_bilinear(FormKind::symcurl, *s, *s);
    const auto b = assemble_bilinear(FormKind::symcurl, *s, *s);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_EQ(a.col_indices(), b.col_indices());
}

TEST(ApplyOp, Conventions) {
    // v = (v1, v2) with grad[2c + d] = d_d v_c.
    const std::array<double, 2> val{0.3, -0.7};
    const std::array<double, 4> grad{1.0, 2.0, 3.0, 4.0};
    std::array<double, 4> out{};
    apply_op(DiffOp::rot, ValueShape::vector2, val, grad, out);
    EXPECT_DOUBLE_EQ(out[0], 3.0 - 2.0);
    apply_op(DiffOp::boldcurl, ValueShape::vector2, val, grad, out);
    EXPECT_DOUBLE_EQ(out[0], 2.0);   // d2 v1
    EXPECT_DOUBLE_EQ(out[1], -1.0);  // -d1 v1
    EXPECT_DOUBLE_EQ(out[2], 4.0);
    EXPECT_DOUBLE_EQ(out[3], -3.0);
    apply_op(DiffOp::symcurl, ValueShape::vector2, val, grad, out);
    EXPECT_DOUBLE_EQ(out[1], 0.5 * (-1.0 + 4.0));
    EXPECT_DOUBLE_EQ(out[1], out[2]);
    apply_op(DiffOp::trace_symcurl, ValueShape::vector2, val, grad, out);
    EXPECT_DOUBLE_EQ(out[0], 2.0 - 3.0);

    const std::array<double, 1> s{2.5};
    const std::array<double, 2> sg{1.0, 2.0};
    apply_op(DiffOp::curl, ValueShape::scalar, s, sg, out);
    EXPECT_DOUBLE_EQ(out[0], 2.0);
    EXPECT_DOUBLE_EQ(out[1], -1.0);
    apply_op(DiffOp::pi, ValueShape::scalar, s, sg, out);
    EXPECT_DOUBLE_EQ(out[0], 2.5);
    EXPECT_DOUBLE_EQ(out[1], 0.0);
    EXPECT_DOUBLE_EQ(out[3], 2.5);
}

TEST(AssembleLoad, UnitLoadOnReferenceTriangle) {
    const auto s = build_space(reference_triangle(), 1, ValueShape::scalar);
    const auto b = assemble_load(*s, scalar_field([](const Point&) { return 1.0; }));
    for (double v : b) EXPECT_NEAR(v, 1.0 / 6, 1e-16);
}

TEST(AssembleLoad, ConstantVectorAgainstCurlKillsConstants) {
    const auto s = build_space(square(3), 2, ValueShape::scalar);
    const auto b = assemble_load(*s, vector_field([](const Point&) { return std::array<double, 2>{0.4, -1.3}; }), DiffOp::curl);
    const std::vector<double> ones(s->n_dofs(), 1.0);
    EXPECT_NEAR(dot(b, ones), 0.0, 1e-14);
    EXPECT_GT(norm_inf(b), 1e-3);
}

TEST(AssembleLoad, GradientFieldAgainstCurlVanishesOnH10) {
    // (grad q, curl v) = 0 for v vanishing on the boundary.
    const auto s = build_space(square(4), 2, ValueShape::scalar);
    const auto b = assemble_load(
        *s, vector_field([](const Point& p) { return std::array<double, 2>{2 * p.x * p.y, p.x * p.x + 3 * p.y * p.y}; }),
        DiffOp::curl);
    double interior = 0.0;
    for (std::size_t n = 0; n < s->n_nodes(); ++n) {
        if (!s->node_on_boundary(static_cast<Index>(n))) interior = std::max(interior, std::abs(b[n]));
    }
    EXPECT_LT(interior, 1e-14);
}

TEST(AssembleLoad, ShapeMismatch) {
    const auto s = build_space(square(1), 1, ValueShape::scalar);
    EXPECT_THROW((void)assemble_load(*s, vector_field([](const Point&) { return std::array<double, 2>{}; })), ShapeMismatch);
}
