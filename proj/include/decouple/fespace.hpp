#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "decouple/lagrange.hpp"
#include "decouple/mesh.hpp"

namespace decouple {

using MeshPtr = std::shared_ptr<const Mesh>;

/// Symmetric tensors are stored as (t11, t12, t22).
enum class ValueShape { scalar, vector2, symtensor2 };

[[nodiscard]] constexpr int n_components(ValueShape s) noexcept {
    return s == ValueShape::scalar ? 1 : (s == ValueShape::vector2 ? 2 : 3);
}

[[nodiscard]] const char* to_string(ValueShape s) noexcept;

/// Pointwise field with a fixed number of components.
struct Field {
    int n_components = 1;
    std::function<void(const Point&, std::span<double>)> eval;
};

[[nodiscard]] Field scalar_field(std::function<double(const Point&)> f);
[[nodiscard]] Field vector_field(std::function<std::array<double, 2>(const Point&)> f);
[[nodiscard]] Field tensor_field(std::function<std::array<double, 3>(const Point&)> f);

/// Conforming Lagrange space. Global nodes are numbered vertices first, then
/// edge nodes (edge by edge, from the lower to the higher vertex index), then
/// interior nodes; dof = node * n_components + component.
class FunctionSpace {
public:
    FunctionSpace(MeshPtr mesh, int order, ValueShape shape);

    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] ValueShape shape() const noexcept { return shape_; }
    [[nodiscard]] int n_components() const noexcept { return decouple::n_components(shape_); }
    [[nodiscard]] const LagrangeElement& element() const noexcept { return element_; }

    [[nodiscard]] std::size_t n_nodes() const noexcept { return node_points_.size(); }
    [[nodiscard]] std::size_t n_dofs() const noexcept { return n_nodes() * static_cast<std::size_t>(n_components()); }
    [[nodiscard]] int n_local_nodes() const noexcept { return element_.n_basis(); }
    [[nodiscard]] int n_local_dofs() const noexcept { return element_.n_basis() * n_components(); }

    /// Global node of each local node of cell c.
    [[nodiscard]] std::span<const Index> cell_nodes(std::size_t c) const {
        return {cell_nodes_.data() + c * static_cast<std::size_t>(n_local_nodes()),
                static_cast<std::size_t>(n_local_nodes())};
    }
    /// Global dofs of cell c in local order (local node major, component minor).
    void cell_dofs(std::size_t c, std::span<Index> out) const;

    [[nodiscard]] Index dof(Index node, int component) const noexcept {
        return node * n_components() + component;
    }
    [[nodiscard]] const std::vector<Point>& node_points() const noexcept { return node_points_; }
    [[nodiscard]] bool node_on_boundary(Index node) const { return node_boundary_[static_cast<std::size_t>(node)]; }

    /// Metric weight of a component in the inner product (2 for t12).
    [[nodiscard]] double component_weight(int component) const noexcept {
        return shape_ == ValueShape::symtensor2 && component == 1 ? 2.0 : 1.0;
    }

private:
    MeshPtr mesh_;
    int order_;
    ValueShape shape_;
    LagrangeElement element_;
    std::vector<Index> cell_nodes_;
    std::vector<Point> node_points_;
    std::vector<bool> node_boundary_;
};

using SpacePtr = std::shared_ptr<const FunctionSpace>;

[[nodiscard]] SpacePtr build_space(MeshPtr mesh, int order, ValueShape shape);

/// Coefficient vector bound to a space.
class FEFunction {
public:
    explicit FEFunction(SpacePtr space);
    FEFunction(SpacePtr space, std::vector<double> coeffs);

    [[nodiscard]] const FunctionSpace& space() const noexcept { return *space_; }
    [[nodiscard]] const SpacePtr& space_ptr() const noexcept { return space_; }
    [[nodiscard]] std::vector<double>& coeffs() noexcept { return coeffs_; }
    [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return coeffs_; }

    /// Values inside cell c at barycentric point lambda.
    void eval_in_cell(std::size_t c, const std::array<double, 3>& lambda, std::span<double> out) const;
    /// Physical gradients: out[2*comp + d] = d/dx_d of component comp.
    void grad_in_cell(std::size_t c, const std::array<double, 3>& lambda, std::span<double> out) const;
    /// Physical Hessians: out[4*comp + 2*a + b] = d^2/dx_a dx_b, each entry
    /// accumulated independently (no symmetry assumed).
    void hessian_in_cell(std::size_t c, const std::array<double, 3>& lambda, std::span<double> out) const;

    /// Point evaluation anywhere in the closed domain (linear cell search).
    [[nodiscard]] std::vector<double> eval(const Point& x) const;

private:
    SpacePtr space_;
    std::vector<double> coeffs_;
};

/// Dirichlet dofs plus dense functional rows c with c . coeffs = 0.
struct ConstraintSet {
    std::vector<Index> dirichlet_dofs;
    std::vector<double> dirichlet_values;
    std::vector<std::vector<double>> functional_rows;

    [[nodiscard]] bool empty() const noexcept { return dirichlet_dofs.empty() && functional_rows.empty(); }
};

/// Every dof sitting at a node on the boundary, all components, ascending.
[[nodiscard]] std::vector<Index> dirichlet_dofs(const FunctionSpace& s);

/// Homogeneous Dirichlet constraints on all boundary dofs.
[[nodiscard]] ConstraintSet homogeneous_dirichlet(const FunctionSpace& s);

/// Nodal interpolant of g.
[[nodiscard]] FEFunction interpolate(SpacePtr s, const Field& g);
/// Nodal interpolant of a discrete function living on the same mesh.
[[nodiscard]] FEFunction interpolate(SpacePtr s, const FEFunction& g);

/// Row c with c . coeffs = integral of u_h over the domain.
[[nodiscard]] std::vector<double> mean_zero_constraint(const FunctionSpace& s);

enum class RigidMotionVariant {
    rm,      // span{(1,0), (0,1), x^perp}: kernel of the symmetric gradient
    rm_rot,  // span{(1,0), (0,1), x}:      kernel of sym curl
};

/// Three rows imposing L2-orthogonality to the chosen rigid-motion span.
[[nodiscard]] std::array<std::vector<double>, 3> rigid_motion_constraints(const FunctionSpace& s,
                                                                          RigidMotionVariant variant);

/// The spanning fields of the chosen variant, in row order.
[[nodiscard]] std::array<Field, 3> rigid_motion_fields(RigidMotionVariant variant);

/// Locates the cell containing x and its barycentric coordinates; returns false
/// when x lies outside the mesh (beyond a small tolerance).
bool locate(const Mesh& m, const Point& x, std::size_t& cell, std::array<double, 3>& lambda);

}  // namespace decouple
