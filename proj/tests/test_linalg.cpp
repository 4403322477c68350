#include <gtest/gtest.h>

#include <cmath>

#include "decouple/assembly.hpp"
#include "decouple/error.hpp"
#include "decouple/linalg.hpp"
#include "decouple/manufactured.hpp"
#include "decouple/solvers.hpp"
#include "support.hpp"

using namespace decouple;

namespace {

MeshPtr square(int n) { return std::make_shared<const Mesh>(unit_square_mesh(n)); }

SolverOptions tight() {
    SolverOptions o;
    o.tol = 1e-12;
    return o;
}

/// Reduced dense system on the free dofs of a Dirichlet problem.
Eigen::VectorXd dense_dirichlet_solve(const SparseMatrix& a, const std::vector<double>& b, const std::vector<Index>& fixed) {
    std::vector<char> is_fixed(a.rows(), 0);
    for (Index d : fixed) is_fixed[static_cast<std::size_t>(d)] = 1;
    std::vector<Eigen::Index> free;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (!is_fixed[i]) free.push_back(Eigen::Index(i));
    }
    const Eigen::MatrixXd full = test::dense(a);
    Eigen::MatrixXd r(free.size(), free.size());
    Eigen::VectorXd rb(free.size());
    for (std::size_t i = 0; i < free.size(); ++i) {
        rb(Eigen::Index(i)) = b[static_cast<std::size_t>(free[i])];
        for (std::size_t j = 0; j < free.size(); ++j) r(Eigen::Index(i), Eigen::Index(j)) = full(free[i], free[j]);
    }
    const Eigen::VectorXd xr = r.ldlt().solve(rb);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(Eigen::Index(a.rows()));
    for (std::size_t i = 0; i < free.size(); ++i) x(free[i]) = xr(Eigen::Index(i));
    return x;
}

}  // namespace

TEST(SparseMatrix, TripletsAreSummedAndSorted) {
    const auto a = SparseMatrix::from_triplets(3, 3, {{2, 1, 1.0}, {0, 2, 2.0}, {2, 1, 0.5}, {0, 0, -1.0}, {1, 1, 3.0}});
    EXPECT_EQ(a.nnz(), 4u);
    EXPECT_DOUBLE_EQ(a.at(2, 1), 1.5);
    EXPECT_DOUBLE_EQ(a.at(1, 2), 0.0);
    EXPECT_EQ(a.row_offsets(), (std::vector<std::size_t>{0, 2, 3, 4}));
    EXPECT_EQ(a.col_indices()[0], 0);
    EXPECT_EQ(a.col_indices()[1], 2);
    const auto t = a.transpose();
    EXPECT_DOUBLE_EQ(t.at(1, 2), 1.5);
    EXPECT_DOUBLE_EQ(a.symmetry_error(), 2.0);
}

TEST(SparseMatrix, MultiplyMatchesDense) {
    const auto m = square(3);
    const auto s = build_space(m, 2, ValueShape::vector2);
    const auto p = build_space(m, 1, ValueShape::scalar);
    const auto b = assemble_bilinear(FormKind::div_pressure, *s, *p);
    const auto x = test::random_vector(b.cols(), 1);
    const auto y = test::random_vector(b.rows(), 2);
    EXPECT_LT(test::max_abs_diff(b * std::span<const double>(x), test::dense(b) * test::vec(x)), 1e-14);
    std::vector<double> bty(b.cols());
    b.multiply_transpose(y, bty);
    EXPECT_LT(test::max_abs_diff(bty, test::dense(b).transpose() * test::vec(y)), 1e-14);
}

TEST(Cg, IdentityConvergesInOneIteration) {
    const std::vector<double> b{1.0, -2.0, 3.0};
    const auto r = cg(SparseMatrix::identity(3), b);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_EQ(r.x, b);
}

TEST(Cg, DiagonalFiniteTermination) {
    std::vector<Triplet> t;
    for (int i = 0; i < 5; ++i) t.push_back({i, i, i + 1.0});
    const auto r = cg(SparseMatrix::from_triplets(5, 5, t), std::vector<double>(5, 1.0));
    EXPECT_LE(r.iterations, 5);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.x[static_cast<std::size_t>(i)], 1.0 / (i + 1), 1e-14);
}

TEST(Cg, PoissonMatchesDenseOracle) {
    const auto s = build_space(square(8), 1, ValueShape::scalar);
    const auto a = assemble_bilinear(FormKind::stiffness, *s, *s);
    const auto f = assemble_load(*s, poisson_sine_case().load);
    const auto dofs = dirichlet_dofs(*s);
    const auto sys = apply_dirichlet(a, f, dofs, std::vector<double>(dofs.size(), 0.0));
    const auto r = cg(sys.a, sys.b, tight());
    EXPECT_LE(r.relative_residual, 1e-12);
    EXPECT_LT(test::max_abs_diff(r.x, dense_dirichlet_solve(a, f, dofs)), 1e-8);
}

TEST(Cg, BudgetExhaustionThrowsWithResidual) {
    const auto s = build_space(square(8), 2, ValueShape::scalar);
    const auto dofs = dirichlet_dofs(*s);
    const auto sys = apply_dirichlet(assemble_bilinear(FormKind::stiffness, *s, *s), std::vector<double>(s->n_dofs(), 1.0),
                                     dofs, std::vector<double>(dofs.size(), 0.0));
    SolverOptions o;
    o.max_iterations = 3;
    try {
        (void)cg(sys.a, sys.b, o);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_GT(e.final_residual(), o.tol);
        EXPECT_FALSE(e.history().empty());
    }
    o.throw_on_failure = false;
    const auto r = cg(sys.a, sys.b, o);
    EXPECT_FALSE(r.converged);
}

TEST(Cg, IndefiniteOperatorIsReported) {
    const auto a = SparseMatrix::from_dense({{1.0, 0.0}, {0.0, -1.0}});
    EXPECT_THROW((void)cg(a, std::vector<double>{1.0, 1.0}), NonConvergence);
}

TEST(Minres, DiagonalIndefinite) {
    const auto a = SparseMatrix::from_dense({{1.0, 0.0}, {0.0, -1.0}});
    const auto r = minres(as_operator(a), std::vector<double>{1.0, 1.0}, tight());
    EXPECT_NEAR(r.x[0], 1.0, 1e-14);
    EXPECT_NEAR(r.x[1], -1.0, 1e-14);
}

TEST(Minres, BorderedIdentityMatchesDense) {
    const int n = 6;
    std::vector<std::vector<double>> d(n + 1, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i < n; ++i) d[i][i] = 1.0, d[i][n] = d[n][i] = 1.0;
    const auto a = SparseMatrix::from_dense(d);
    const auto b = test::random_vector(n + 1, 4);
    const auto r = minres(as_operator(a), b, tight());
    EXPECT_LT(test::max_abs_diff(r.x, test::dense(a).fullPivLu().solve(test::vec(b))), 1e-10);
}

TEST(Minres, PreconditionedSaddleMatchesDense) {
    const auto s = build_space(square(2), 2, ValueShape::scalar);
    const auto k = assemble_bilinear(FormKind::stiffness, *s, *s);
    const auto m = assemble_bilinear(FormKind::mass, *s, *s);
    const auto a = SparseMatrix::add(k, 1.0, m, -40.0);  // indefinite
    ASSERT_LT(a.symmetry_error(), 1e-14);
    const auto b = test::random_vector(a.rows(), 9);
    auto diag = a.diagonal();
    for (auto& v : diag) v = std::abs(v);
    const auto r = minres(as_operator(a), b, tight(), diagonal_inverse(diag));
    EXPECT_LT(test::max_abs_diff(r.x, test::dense(a).fullPivLu().solve(test::vec(b))), 1e-8);
}

TEST(ApplyDirichlet, AllDofsGiveIdentity) {
    const auto a = SparseMatrix::from_dense({{4.0, 1.0}, {1.0, 3.0}});
    const std::vector<Index> dofs{0, 1};
    const std::vector<double> vals{2.0, -5.0};
    const auto sys = apply_dirichlet(a, std::vector<double>{1.0, 1.0}, dofs, vals);
    EXPECT_EQ(test::dense(sys.a), Eigen::Matrix2d::Identity());
    EXPECT_EQ(sys.b, vals);
}

TEST(ApplyDirichlet, NoDofsLeaveSystemUnchanged) {
    const auto a = SparseMatrix::from_dense({{4.0, 1.0}, {1.0, 3.0}});
    const auto sys = apply_dirichlet(a, std::vector<double>{1.0, 2.0}, {}, {});
    EXPECT_EQ(test::dense(sys.a), test::dense(a));
    EXPECT_EQ(sys.b, (std::vector<double>{1.0, 2.0}));
}

TEST(ApplyDirichlet, InhomogeneousDataMatchesReducedSystem) {
    const auto s = build_space(square(4), 2, ValueShape::scalar);
    const auto a = assemble_bilinear(FormKind::stiffness, *s, *s);
    const auto f = test::random_vector(s->n_dofs(), 3);
    const auto dofs = dirichlet_dofs(*s);
    // u = x + 2y is harmonic: boundary values from it, zero load, exact solution reproduced.
    std::vector<double> vals;
    for (Index d : dofs) {
        const auto& p = s->node_points()[static_cast<std::size_t>(d)];
        vals.push_back(p.x + 2 * p.y);
    }
    const auto sys = apply_dirichlet(a, std::vector<double>(s->n_dofs(), 0.0), dofs, vals);
    EXPECT_LT(sys.a.symmetry_error(), 1e-15);
    const auto r = cg(sys.a, sys.b, tight());
    for (std::size_t i = 0; i < s->n_dofs(); ++i) {
        const auto& p = s->node_points()[i];
        EXPECT_NEAR(r.x[i], p.x + 2 * p.y, 1e-10);
    }
    for (std::size_t k = 0; k < dofs.size(); ++k) EXPECT_NEAR(r.x[static_cast<std::size_t>(dofs[k])], vals[k], 1e-14);

    // Homogeneous data stays exactly zero through the iteration.
    const auto hom = apply_dirichlet(a, f, dofs, std::vector<double>(dofs.size(), 0.0));
    const auto xh = cg(hom.a, hom.b, tight()).x;
    for (Index d : dofs) EXPECT_EQ(xh[static_cast<std::size_t>(d)], 0.0);
    EXPECT_LT(test::max_abs_diff(xh, dense_dirichlet_solve(a, f, dofs)), 1e-9);
}

TEST(SolveSaddle, FunctionalRowOnly) {
    BlockSaddleSystem sys;
    sys.a = SparseMatrix::identity(2);
    sys.b = SparseMatrix(0, 2);
    sys.rhs_f = {1.0, 0.0};
    SaddleConstraints c;
    c.primal.functional_rows = {{1.0, 1.0}};
    SaddleOptions o;
    o.solver = tight();
    const auto sol = solve_saddle(sys, c, o);
    EXPECT_NEAR(sol.primal[0], 0.5, 1e-12);
    EXPECT_NEAR(sol.primal[1], -0.5, 1e-12);
    ASSERT_EQ(sol.constraint_multipliers.size(), 1u);
    EXPECT_NEAR(sol.constraint_multipliers[0], 0.5, 1e-12);
}

TEST(SolveSaddle, StokesZeroLoadGivesZero) {
    const auto m = square(2);
    const auto x = build_space(m, 2, ValueShape::vector2);
    const auto p = build_space(m, 1, ValueShape::scalar);
    const auto st = solve_stokes_system(x, p, std::vector<double>(x->n_dofs(), 0.0));
    EXPECT_EQ(norm_inf(st.velocity.coeffs()), 0.0);
    EXPECT_EQ(norm_inf(st.pressure.coeffs()), 0.0);
}

TEST(SolveSaddle, StokesMatchesDenseOracle) {
    const auto m = square(4);
    const auto x = build_space(m, 2, ValueShape::vector2);
    const auto p = build_space(m, 1, ValueShape::scalar);
    const auto load = assemble_load(*x, stokes_bubble_case().load);
    StokesOptions o;
    o.solver = tight();
    const auto st = solve_stokes_system(x, p, load, o);

    // Dense augmented system on free velocities, pressures and the mean-zero multiplier.
    const auto a = test::dense(assemble_bilinear(FormKind::stiffness, *x, *x));
    const auto b = test::dense(assemble_bilinear(FormKind::div_pressure, *x, *p));
    const auto mean = mean_zero_constraint(*p);
    std::vector<char> fixed(x->n_dofs(), 0);
    for (Index d : dirichlet_dofs(*x)) fixed[static_cast<std::size_t>(d)] = 1;
    std::vector<Eigen::Index> fr;
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        if (!fixed[i]) fr.push_back(Eigen::Index(i));
    }
    const auto nf = Eigen::Index(fr.size()), np = Eigen::Index(p->n_dofs());
    ASSERT_LE(nf + np + 1, 200);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nf + np + 1, nf + np + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + np + 1);
    for (Eigen::Index i = 0; i < nf; ++i) {
        rhs(i) = load[static_cast<std::size_t>(fr[static_cast<std::size_t>(i)])];
        for (Eigen::Index j = 0; j < nf; ++j) k(i, j) = a(fr[static_cast<std::size_t>(i)], fr[static_cast<std::size_t>(j)]);
        for (Eigen::Index q = 0; q < np; ++q) k(i, nf + q) = k(nf + q, i) = b(q, fr[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index q = 0; q < np; ++q) k(nf + np, nf + q) = k(nf + q, nf + np) = mean[static_cast<std::size_t>(q)];
    // The saddle multiplier is minus the pressure.
    const Eigen::VectorXd z = k.fullPivLu().solve(rhs);

    double dv = 0.0;
    for (Eigen::Index i = 0; i < nf; ++i) dv = std::max(dv, std::abs(st.velocity.coeffs()[static_cast<std::size_t>(fr[static_cast<std::size_t>(i)])] - z(i)));
    double dp = 0.0;
    for (Eigen::Index q = 0; q < np; ++q) dp = std::max(dp, std::abs(st.pressure.coeffs()[static_cast<std::size_t>(q)] + z(nf + q)));
    EXPECT_LT(dv, 1e-8);
    EXPECT_LT(dp, 1e-8);
}

TEST(SolveSaddle, ConstraintsHoldOnOutput) {
    const auto m = square(4);
    const auto x = build_space(m, 2, ValueShape::vector2);
    const auto p = build_space(m, 1, ValueShape::scalar);
    BlockSaddleSystem sys;
    sys.a = assemble_bilinear(FormKind::stiffness, *x, *x);
    sys.b = assemble_bilinear(FormKind::div_pressure, *x, *p);
    sys.rhs_f = assemble_load(*x, stokes_bubble_case().load);
    sys.rhs_g.assign(p->n_dofs(), 0.0);
    SaddleConstraints c;
    c.primal = homogeneous_dirichlet(*x);
    c.multiplier_rows = {mean_zero_constraint(*p)};
    SaddleOptions o;
    o.solver = tight();
    const auto sol = solve_saddle(sys, c, o);
    EXPECT_LE(sol.relative_residual, 1e-10);
    EXPECT_LT(norm_inf(sys.b * std::span<const double>(sol.primal)), 1e-11);
    EXPECT_LT(std::abs(dot(c.multiplier_rows[0], sol.multiplier)), 1e-12);
    for (Index d : c.primal.dirichlet_dofs) EXPECT_EQ(sol.primal[static_cast<std::size_t>(d)], 0.0);
}

TEST(SolveSaddle, MissingMeanZeroIsDiagnosedAsSingular) {
    const auto m = square(4);
    const auto x = build_space(m, 2, ValueShape::vector2);
    const auto p = build_space(m, 1, ValueShape::scalar);
    StokesOptions o;
    o.mean_zero_pressure = false;
    EXPECT_THROW((void)solve_stokes_system(x, p, assemble_load(*x, stokes_bubble_case().load), o), SingularSystem);
}

TEST(SolveSaddle, MissingRigidMotionRowsAreDiagnosedAsSingular) {
    const auto q = build_space(square(3), 2, ValueShape::vector2);
    BlockSaddleSystem sys;
    sys.a = assemble_bilinear(FormKind::symcurl, *q, *q);
    sys.b = SparseMatrix(0, q->n_dofs());
    sys.rhs_f = test::random_vector(q->n_dofs(), 1);
    EXPECT_THROW((void)solve_saddle(sys, {}, {}), Error);
}

TEST(SolveSaddle, DimensionMismatch) {
    BlockSaddleSystem sys;
    sys.a = SparseMatrix::identity(2);
    sys.b = SparseMatrix(0, 2);
    sys.rhs_f = {1.0};
    EXPECT_THROW((void)solve_saddle(sys, {}, {}), ShapeMismatch);
}
