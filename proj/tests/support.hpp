#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "decouple/sparse.hpp"

namespace decouple::test {

inline Eigen::MatrixXd dense(const SparseMatrix& a) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(Eigen::Index(a.rows()), Eigen::Index(a.cols()));
    const auto& off = a.row_offsets();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) d(Eigen::Index(r), a.col_indices()[k]) = a.values()[k];
    }
    return d;
}

inline Eigen::VectorXd vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

inline std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

inline double max_abs_diff(const std::vector<double>& a, const Eigen::VectorXd& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b(Eigen::Index(i))));
    return m;
}

}  // namespace decouple::test
