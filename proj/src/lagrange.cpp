#include "decouple/lagrange.hpp"

#include "decouple/error.hpp"

namespace decouple {

namespace {

// P_a(t) = prod_{s<a} (k t - s)/(s + 1) with its first two derivatives.
struct Jet {
    double v, d1, d2;
};

Jet univariate(int a, int k, double t) {
    Jet j{1.0, 0.0, 0.0};
    for (int s = 0; s < a; ++s) {
        const double c = 1.0 / (s + 1);
        const double f = (k * t - s) * c;
        const double df = k * c;
        j = {j.v * f, j.d1 * f + j.v * df, j.d2 * f + 2.0 * j.d1 * df};
    }
    return j;
}

}  // namespace

LagrangeElement::LagrangeElement(int order) : order_(order) {
    if (order < 1 || order > 3) throw InvalidArgument("LagrangeElement: order must be 1, 2 or 3");
    const int k = order;
    multi_index_ = {{k, 0, 0}, {0, k, 0}, {0, 0, k}};
    for (int s = 1; s < k; ++s) multi_index_.push_back({0, k - s, s});
    for (int s = 1; s < k; ++s) multi_index_.push_back({s, 0, k - s});
    for (int s = 1; s < k; ++s) multi_index_.push_back({k - s, s, 0});
    for (int a = 1; a < k; ++a) {
        for (int b = 1; a + b < k; ++b) multi_index_.push_back({k - a - b, a, b});
    }
}

std::array<double, 3> LagrangeElement::node_barycentric(int i) const {
    const auto& a = multi_index_[static_cast<std::size_t>(i)];
    return {static_cast<double>(a[0]) / order_, static_cast<double>(a[1]) / order_, static_cast<double>(a[2]) / order_};
}

void LagrangeElement::values(const std::array<double, 3>& lambda, std::span<double> out) const {
    for (std::size_t i = 0; i < multi_index_.size(); ++i) {
        const auto& a = multi_index_[i];
        out[i] = univariate(a[0], order_, lambda[0]).v * univariate(a[1], order_, lambda[1]).v *
                 univariate(a[2], order_, lambda[2]).v;
    }
}

void LagrangeElement::lambda_derivatives(const std::array<double, 3>& lambda, std::span<double> out) const {
    for (std::size_t i = 0; i < multi_index_.size(); ++i) {
        const auto& a = multi_index_[i];
        const Jet j[3] = {univariate(a[0], order_, lambda[0]), univariate(a[1], order_, lambda[1]),
                          univariate(a[2], order_, lambda[2])};
        out[3 * i + 0] = j[0].d1 * j[1].v * j[2].v;
        out[3 * i + 1] = j[0].v * j[1].d1 * j[2].v;
        out[3 * i + 2] = j[0].v * j[1].v * j[2].d1;
    }
}

void LagrangeElement::lambda_hessians(const std::array<double, 3>& lambda, std::span<double> out) const {
    for (std::size_t i = 0; i < multi_index_.size(); ++i) {
        const auto& a = multi_index_[i];
        const Jet j[3] = {univariate(a[0], order_, lambda[0]), univariate(a[1], order_, lambda[1]),
                          univariate(a[2], order_, lambda[2])};
        for (int m = 0; m < 3; ++m) {
            for (int n = 0; n < 3; ++n) {
                double prod = 1.0;
                for (int l = 0; l < 3; ++l) {
                    const int order = (l == m) + (l == n);
                    prod *= order == 0 ? j[l].v : (order == 1 ? j[l].d1 : j[l].d2);
                }
                out[9 * i + static_cast<std::size_t>(3 * m + n)] = prod;
            }
        }
    }
}

CellGeometry CellGeometry::from_points(const std::array<std::array<double, 2>, 3>& p) {
    const double j00 = p[1][0] - p[0][0], j01 = p[2][0] - p[0][0];
    const double j10 = p[1][1] - p[0][1], j11 = p[2][1] - p[0][1];
    CellGeometry g;
    g.det = j00 * j11 - j01 * j10;
    // grad lambda_1 and lambda_2 are the rows of J^{-1}.
    g.grad_lambda[1] = {j11 / g.det, -j01 / g.det};
    g.grad_lambda[2] = {-j10 / g.det, j00 / g.det};
    g.grad_lambda[0] = {-g.grad_lambda[1][0] - g.grad_lambda[2][0], -g.grad_lambda[1][1] - g.grad_lambda[2][1]};
    return g;
}

}  // namespace decouple
