#pragma once

#include <array>
#include <span>
#include <vector>

namespace decouple {

/// Scalar Lagrange element of order k on the reference triangle, written in
/// barycentric coordinates. Local nodes: the three vertices, then k-1 nodes on
/// each local edge (edge e opposite vertex e, walked from its first to its
/// second vertex), then the interior nodes.
class LagrangeElement {
public:
    explicit LagrangeElement(int order);

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] int n_basis() const noexcept { return static_cast<int>(multi_index_.size()); }
    [[nodiscard]] int n_edge_nodes() const noexcept { return order_ - 1; }
    [[nodiscard]] int n_interior_nodes() const noexcept { return (order_ - 1) * (order_ - 2) / 2; }
    [[nodiscard]] const std::vector<std::array<int, 3>>& multi_indices() const noexcept { return multi_index_; }
    /// Barycentric coordinates of local node i.
    [[nodiscard]] std::array<double, 3> node_barycentric(int i) const;

    void values(const std::array<double, 3>& lambda, std::span<double> out) const;
    /// d phi_i / d lambda_m, stored as out[3*i + m].
    void lambda_derivatives(const std::array<double, 3>& lambda, std::span<double> out) const;
    /// d^2 phi_i / d lambda_m d lambda_n, stored as out[9*i + 3*m + n].
    void lambda_hessians(const std::array<double, 3>& lambda, std::span<double> out) const;

private:
    int order_;
    std::vector<std::array<int, 3>> multi_index_;
};

/// Affine map of one cell: gradients of the barycentric coordinates and |det J|.
struct CellGeometry {
    std::array<std::array<double, 2>, 3> grad_lambda{};
    double det = 0.0;  // twice the signed area

    static CellGeometry from_points(const std::array<std::array<double, 2>, 3>& p);
};

}  // namespace decouple
