#pragma once

#include <vector>

namespace decouple::dense {

/// Row-major square or rectangular matrix for small eigenvalue work.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Lower-triangular Cholesky factor; throws SingularSystem if not SPD.
[[nodiscard]] Matrix cholesky(const Matrix& a);
/// Solves L L^T x = b in place.
void cholesky_solve(const Matrix& l, std::vector<double>& b);

/// Eigen-decomposition of the symmetric part of `a` (Householder tridiagonalization
/// and QR, via Eigen). Eigenvalues ascending; vectors stored as columns.
void symmetric_eigen(const Matrix& a, std::vector<double>& values, Matrix& vectors);

/// All eigenvalues of A x = lambda M x (A symmetric, M SPD), ascending.
/// Throws SingularSystem if M is not SPD.
[[nodiscard]] std::vector<double> generalized_eigenvalues(const Matrix& a, const Matrix& m);

/// Smallest `count` eigenvalues of A x = lambda M x (A symmetric semidefinite,
/// M SPD) by inverse subspace iteration on A + shift M with Rayleigh-Ritz.
[[nodiscard]] std::vector<double> lowest_generalized_eigenvalues(const Matrix& a, const Matrix& m, std::size_t count,
                                                                 double shift, int max_iterations = 500,
                                                                 double tol = 1e-12);

}  // namespace decouple::dense
