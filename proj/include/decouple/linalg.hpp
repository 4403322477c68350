#pragma once

#include <functional>
#include <span>
#include <vector>

#include "decouple/fespace.hpp"
#include "decouple/sparse.hpp"

namespace decouple {

/// y = Op(x)
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct SolverOptions {
    double tol = 1e-10;         // relative residual
    int max_iterations = 20000;
    int stagnation_window = 50;  // MINRES breakdown policy
    bool throw_on_failure = true;
};

struct SolveResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;  // ||b - A x|| / ||b||, Euclidean (cg) or preconditioned (minres)
    std::vector<double> history;
    bool converged = true;
    bool stagnated = false;
};

/// Jacobi-preconditioned conjugate gradients. Guarantees
/// ||b - A x||_2 <= tol ||b||_2 on return; throws NonConvergence otherwise.
[[nodiscard]] SolveResult cg(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts = {},
                             std::span<const double> x0 = {});

/// Preconditioned MINRES for symmetric, possibly indefinite operators.
/// `precond_inverse` applies M^{-1} for an SPD M (identity when empty).
/// Stops when the M^{-1}-norm of the residual drops below tol times that of b.
/// Throws NonConvergence (stagnated() set) when the residual fails to decrease
/// by 0.1% over `stagnation_window` iterations while above 10 tol.
[[nodiscard]] SolveResult minres(const LinearOperator& op, std::span<const double> b, const SolverOptions& opts = {},
                                 const LinearOperator& precond_inverse = {}, std::span<const double> x0 = {});

[[nodiscard]] LinearOperator as_operator(const SparseMatrix& a);
[[nodiscard]] LinearOperator diagonal_inverse(std::vector<double> diag);

struct DirichletSystem {
    SparseMatrix a;
    std::vector<double> b;
};

/// Symmetric elimination: constrained rows and columns are zeroed, the
/// diagonal set to 1 and the right-hand side fixed, moving the known column
/// contributions to the right.
[[nodiscard]] DirichletSystem apply_dirichlet(const SparseMatrix& a, std::span<const double> b,
                                              std::span<const Index> dofs, std::span<const double> values);

/// [[A, B^T], [B, 0]] with right-hand side (f, g). B has zero rows when there
/// is no coupling block.
struct BlockSaddleSystem {
    SparseMatrix a;
    SparseMatrix b;
    std::vector<double> rhs_f;
    std::vector<double> rhs_g;
    /// Optional SPD diagonal approximating the multiplier Schur complement
    /// (the pressure mass diagonal for Stokes). Defaults to diag(B D_A^{-1} B^T).
    std::vector<double> multiplier_preconditioner;
};

/// Constraints on the primal unknown (Dirichlet and functional rows) and
/// functional rows on the multiplier (e.g. mean-zero pressure).
struct SaddleConstraints {
    ConstraintSet primal;
    std::vector<std::vector<double>> multiplier_rows;
};

struct SaddleOptions {
    SolverOptions solver{};
    /// Probe for an unconstrained kernel with a random right-hand side.
    bool check_singular = true;
};

struct SaddleSolution {
    std::vector<double> primal;
    std::vector<double> multiplier;
    std::vector<double> constraint_multipliers;
    int iterations = 0;
    double relative_residual = 0.0;  // Euclidean, full augmented system
};

/// Solves the augmented system
///   [[A, B^T, Cx^T, 0], [B, 0, 0, Cp^T], [Cx, 0, 0, 0], [0, Cp, 0, 0]]
/// with MINRES and a block-diagonal preconditioner. Throws SingularSystem when
/// the constraint set leaves a kernel.
[[nodiscard]] SaddleSolution solve_saddle(const BlockSaddleSystem& sys, const SaddleConstraints& constraints,
                                          const SaddleOptions& opts = {});

}  // namespace decouple
