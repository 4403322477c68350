#include "decouple/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "decouple/error.hpp"

namespace decouple::dense {

namespace {

Eigen::MatrixXd view(const Matrix& a) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::MatrixXd full = Eigen::Map<const RowMajor>(a.data.data(), Eigen::Index(a.rows), Eigen::Index(a.cols));
    return 0.5 * (full + full.transpose());
}

}  // namespace

Matrix cholesky(const Matrix& a) {
    const std::size_t n = a.rows;
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) throw SingularSystem("cholesky: matrix is not positive definite");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

void cholesky_solve(const Matrix& l, std::vector<double>& b) {
    const std::size_t n = l.rows;
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
        b[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
        b[ii] = s / l(ii, ii);
    }
}

void symmetric_eigen(const Matrix& a, std::vector<double>& values, Matrix& vectors) {
    const std::size_t n = a.rows;
    if (a.cols != n) throw ShapeMismatch("symmetric_eigen: matrix is not square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(view(a));
    if (es.info() != Eigen::Success) throw NonConvergence("symmetric_eigen: tridiagonal QR did not converge", 0.0, {}, false);
    values.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    vectors = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) vectors(r, c) = es.eigenvectors()(Eigen::Index(r), Eigen::Index(c));
    }
}

namespace {

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

}  // namespace

std::vector<double> generalized_eigenvalues(const Matrix& a, const Matrix& m) {
    const std::size_t n = a.rows;
    if (a.cols != n || m.rows != n || m.cols != n) throw ShapeMismatch("generalized_eigenvalues: dimensions");
    const Eigen::MatrixXd am = view(a), mm = view(m);
    Eigen::LLT<Eigen::MatrixXd> llt(mm);
    if (llt.info() != Eigen::Success) throw SingularSystem("generalized_eigenvalues: M is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(am, mm, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NonConvergence("generalized_eigenvalues: tridiagonal QR did not converge", 0.0, {}, false);
    return {es.eigenvalues().data(), es.eigenvalues().data() + n};
}

std::vector<double> lowest_generalized_eigenvalues(const Matrix& a, const Matrix& m, std::size_t count, double shift,
                                                   int max_iterations, double tol) {
    const std::size_t n = a.rows;
    if (count == 0 || count > n) throw InvalidArgument("lowest_generalized_eigenvalues: bad count");
    const std::size_t p = std::min(n, count + 2);
    Matrix shifted = a;
    for (std::size_t i = 0; i < n * n; ++i) shifted.data[i] += shift * m.data[i];
    const Matrix l = cholesky(shifted);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::vector<double>> x(p, std::vector<double>(n));
    for (auto& col : x) {
        for (auto& v : col) v = dist(rng);
    }

    std::vector<double> theta(p, 0.0), previous(p, 1e300);
    for (int it = 0; it < max_iterations; ++it) {
        std::vector<std::vector<double>> y(p);
        for (std::size_t j = 0; j < p; ++j) {
            y[j] = matvec(m, x[j]);
            cholesky_solve(l, y[j]);
        }
        Matrix ar(p, p), mr(p, p);
        std::vector<std::vector<double>> ay(p), my(p);
        for (std::size_t j = 0; j < p; ++j) {
            ay[j] = matvec(a, y[j]);
            my[j] = matvec(m, y[j]);
        }
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                double sa = 0.0, sm = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    sa += y[i][k] * ay[j][k];
                    sm += y[i][k] * my[j][k];
                }
                ar(i, j) = sa;
                mr(i, j) = sm;
            }
        }
        // Reduce to a standard problem with the Cholesky factor of the small mass matrix.
        const Matrix r = cholesky(mr);
        Matrix rinv(p, p);
        for (std::size_t j = 0; j < p; ++j) {
            std::vector<double> e(p, 0.0);
            e[j] = 1.0;
            for (std::size_t i = 0; i < p; ++i) {
                double s = e[i];
                for (std::size_t k = 0; k < i; ++k) s -= r(i, k) * rinv(k, j);
                rinv(i, j) = s / r(i, i);
            }
        }
        Matrix c(p, p);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < p; ++k) {
                    for (std::size_t q = 0; q < p; ++q) s += rinv(i, k) * ar(k, q) * rinv(j, q);
                }
                c(i, j) = s;
            }
        }
        Matrix vecs;
        symmetric_eigen(c, theta, vecs);
        // x_j = sum_i y_i (R^{-T} V)_ij
        for (std::size_t j = 0; j < p; ++j) {
            std::vector<double> coef(p, 0.0);
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t k = 0; k < p; ++k) coef[i] += rinv(k, i) * vecs(k, j);
            }
            std::fill(x[j].begin(), x[j].end(), 0.0);
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t k = 0; k < n; ++k) x[j][k] += coef[i] * y[i][k];
            }
        }
        double change = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            change = std::max(change, std::abs(theta[j] - previous[j]) / std::max(std::abs(theta[j]) + shift, 1e-300));
        }
        previous = theta;
        if (change < tol) break;
    }
    theta.resize(count);
    return theta;
}

}  // namespace decouple::dense
