#include "decouple/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "decouple/error.hpp"

namespace decouple {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= rows || static_cast<std::size_t>(t.col) >= cols) {
            throw InvalidArgument("SparseMatrix::from_triplets: index out of range");
        }
    }
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    SparseMatrix m(rows, cols);
    m.cols_idx_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    std::size_t i = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        while (i < triplets.size() && static_cast<std::size_t>(triplets[i].row) == r) {
            const Index c = triplets[i].col;
            double v = 0.0;
            while (i < triplets.size() && static_cast<std::size_t>(triplets[i].row) == r && triplets[i].col == c) {
                v += triplets[i].value;
                ++i;
            }
            m.cols_idx_.push_back(c);
            m.values_.push_back(v);
        }
        m.offsets_[r + 1] = m.values_.size();
    }
    return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({static_cast<Index>(i), static_cast<Index>(i), 1.0});
    return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& dense, double drop) {
    const std::size_t rows = dense.size();
    const std::size_t cols = rows ? dense[0].size() : 0;
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (std::abs(dense[i][j]) > drop) t.push_back({static_cast<Index>(i), static_cast<Index>(j), dense[i][j]});
        }
    }
    return from_triplets(rows, cols, std::move(t));
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) s += values_[k] * x[static_cast<std::size_t>(cols_idx_[k])];
        y[r] = s;
    }
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(cols_), 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) y[static_cast<std::size_t>(cols_idx_[k])] += values_[k] * xr;
    }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
    if (x.size() != cols_) throw ShapeMismatch("SparseMatrix: vector length does not match column count");
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) t.push_back({cols_idx_[k], static_cast<Index>(r), values_[k]});
    }
    return from_triplets(cols_, rows_, std::move(t));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = cols_idx_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto last = cols_idx_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<Index>(j));
    return (it != last && *it == static_cast<Index>(j)) ? values_[static_cast<std::size_t>(it - cols_idx_.begin())] : 0.0;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

double SparseMatrix::symmetry_error() const {
    if (rows_ != cols_) throw ShapeMismatch("symmetry_error: matrix is not square");
    double err = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            err = std::max(err, std::abs(values_[k] - at(static_cast<std::size_t>(cols_idx_[k]), r)));
        }
    }
    return err;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
    std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) d[r][static_cast<std::size_t>(cols_idx_[k])] = values_[k];
    }
    return d;
}

SparseMatrix SparseMatrix::add(const SparseMatrix& a, double alpha, const SparseMatrix& b, double beta) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw ShapeMismatch("SparseMatrix::add: dimension mismatch");
    std::vector<Triplet> t;
    t.reserve(a.nnz() + b.nnz());
    for (std::size_t r = 0; r < a.rows_; ++r) {
        for (std::size_t k = a.offsets_[r]; k < a.offsets_[r + 1]; ++k) t.push_back({static_cast<Index>(r), a.cols_idx_[k], alpha * a.values_[k]});
        for (std::size_t k = b.offsets_[r]; k < b.offsets_[r + 1]; ++k) t.push_back({static_cast<Index>(r), b.cols_idx_[k], beta * b.values_[k]});
    }
    return from_triplets(a.rows_, a.cols_, std::move(t));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace decouple
