#pragma once

#include <span>
#include <vector>

#include "decouple/mesh.hpp"

namespace decouple {

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Compressed sparse row storage; column indices strictly increasing per row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols);

    /// Duplicates are summed; entries are ordered by (row, col), so the result
    /// is independent of triplet order up to floating-point summation order
    /// within a duplicate group, which follows the input order.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
    static SparseMatrix identity(std::size_t n);
    static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense, double drop = 0.0);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& row_offsets() const noexcept { return offsets_; }
    [[nodiscard]] const std::vector<Index>& col_indices() const noexcept { return cols_idx_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double>& values() noexcept { return values_; }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y = A^T x
    void multiply_transpose(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] std::vector<double> operator*(std::span<const double> x) const;

    [[nodiscard]] SparseMatrix transpose() const;
    [[nodiscard]] double at(std::size_t i, std::size_t j) const;
    [[nodiscard]] std::vector<double> diagonal() const;
    /// max |A - A^T| over all entries (square matrices only).
    [[nodiscard]] double symmetry_error() const;
    [[nodiscard]] std::vector<std::vector<double>> to_dense() const;

    /// alpha * a + beta * b (same dimensions).
    static SparseMatrix add(const SparseMatrix& a, double alpha, const SparseMatrix& b, double beta);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<Index> cols_idx_;
    std::vector<double> values_;
};

// Small vector helpers.
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double norm2(std::span<const double> a);
[[nodiscard]] double norm_inf(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace decouple
