#include "decouple/fespace.hpp"

#include <algorithm>
#include <cmath>

#include "decouple/error.hpp"
#include "decouple/quadrature.hpp"

namespace decouple {

namespace {

constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{1, 2}, {2, 0}, {0, 1}}};

CellGeometry geometry_of(const Mesh& m, std::size_t c) {
    const auto p = m.cell_points(c);
    return CellGeometry::from_points({{{p[0].x, p[0].y}, {p[1].x, p[1].y}, {p[2].x, p[2].y}}});
}

Point physical_point(const Mesh& m, std::size_t c, const std::array<double, 3>& l) {
    const auto p = m.cell_points(c);
    return {l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x, l[0] * p[0].y + l[1] * p[1].y + l[2] * p[2].y};
}

}  // namespace

const char* to_string(ValueShape s) noexcept {
    switch (s) {
        case ValueShape::scalar: return "scalar";
        case ValueShape::vector2: return "vector2";
        case ValueShape::symtensor2: return "symtensor2";
    }
    return "unknown";
}

Field scalar_field(std::function<double(const Point&)> f) {
    return {1, [f = std::move(f)](const Point& x, std::span<double> out) { out[0] = f(x); }};
}

Field vector_field(std::function<std::array<double, 2>(const Point&)> f) {
    return {2, [f = std::move(f)](const Point& x, std::span<double> out) {
                const auto v = f(x);
                out[0] = v[0];
                out[1] = v[1];
            }};
}

Field tensor_field(std::function<std::array<double, 3>(const Point&)> f) {
    return {3, [f = std::move(f)](const Point& x, std::span<double> out) {
                const auto v = f(x);
                out[0] = v[0];
                out[1] = v[1];
                out[2] = v[2];
            }};
}

FunctionSpace::FunctionSpace(MeshPtr mesh, int order, ValueShape shape)
    : mesh_(std::move(mesh)), order_(order), shape_(shape), element_(order) {
    if (!mesh_) throw InvalidArgument("FunctionSpace: null mesh");
    const Mesh& m = *mesh_;
    const int k = order_;
    const auto nv = static_cast<Index>(m.n_vertices());
    const auto ne = static_cast<Index>(m.n_edges());
    const int per_edge = k - 1;
    const int per_cell = element_.n_interior_nodes();
    const auto n_nodes = static_cast<std::size_t>(nv + ne * per_edge) + m.n_cells() * static_cast<std::size_t>(per_cell);

    node_points_.resize(n_nodes);
    node_boundary_.assign(n_nodes, false);
    cell_nodes_.resize(m.n_cells() * static_cast<std::size_t>(element_.n_basis()));

    for (Index v = 0; v < nv; ++v) {
        node_points_[static_cast<std::size_t>(v)] = m.vertices()[static_cast<std::size_t>(v)];
        node_boundary_[static_cast<std::size_t>(v)] = m.is_boundary_vertex(v);
    }

    const auto nb = static_cast<std::size_t>(element_.n_basis());
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
        const auto& cell = m.cells()[c];
        Index* local = cell_nodes_.data() + c * nb;
        for (int i = 0; i < 3; ++i) local[i] = cell[static_cast<std::size_t>(i)];
        for (int e = 0; e < 3; ++e) {
            const Index edge = m.cell_edges()[c][static_cast<std::size_t>(e)];
            const bool forward = cell[static_cast<std::size_t>(kLocalEdges[e][0])] < cell[static_cast<std::size_t>(kLocalEdges[e][1])];
            for (int s = 0; s < per_edge; ++s) {
                const int slot = forward ? s : per_edge - 1 - s;
                const Index node = nv + edge * per_edge + slot;
                local[3 + e * per_edge + s] = node;
            }
        }
        for (int s = 0; s < per_cell; ++s) {
            local[3 + 3 * per_edge + s] = nv + ne * per_edge + static_cast<Index>(c) * per_cell + s;
        }
        for (std::size_t i = 3; i < nb; ++i) {
            const auto node = static_cast<std::size_t>(local[i]);
            node_points_[node] = physical_point(m, c, element_.node_barycentric(static_cast<int>(i)));
        }
        for (int e = 0; e < 3; ++e) {
            if (!m.is_boundary_edge(m.cell_edges()[c][static_cast<std::size_t>(e)])) continue;
            for (int s = 0; s < per_edge; ++s) node_boundary_[static_cast<std::size_t>(local[3 + e * per_edge + s])] = true;
        }
    }
}

void FunctionSpace::cell_dofs(std::size_t c, std::span<Index> out) const {
    const auto nodes = cell_nodes(c);
    const int nc = n_components();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int comp = 0; comp < nc; ++comp) out[i * static_cast<std::size_t>(nc) + static_cast<std::size_t>(comp)] = dof(nodes[i], comp);
    }
}

SpacePtr build_space(MeshPtr mesh, int order, ValueShape shape) {
    if (order < 1 || order > 3) throw InvalidArgument("build_space: order must be 1, 2 or 3");
    return std::make_shared<const FunctionSpace>(std::move(mesh), order, shape);
}

FEFunction::FEFunction(SpacePtr space) : space_(std::move(space)) {
    if (!space_) throw InvalidArgument("FEFunction: null space");
    coeffs_.assign(space_->n_dofs(), 0.0);
}

FEFunction::FEFunction(SpacePtr space, std::vector<double> coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    if (!space_) throw InvalidArgument("FEFunction: null space");
    if (coeffs_.size() != space_->n_dofs()) throw ShapeMismatch("FEFunction: coefficient count does not match n_dofs");
}

void FEFunction::eval_in_cell(std::size_t c, const std::array<double, 3>& lambda, std::span<double> out) const {
    const auto& s = *space_;
    const int nc = s.n_components();
    std::vector<double> phi(static_cast<std::size_t>(s.n_local_nodes()));
    s.element().values(lambda, phi);
    const auto nodes = s.cell_nodes(c);
    for (int comp = 0; comp < nc; ++comp) out[static_cast<std::size_t>(comp)] = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int comp = 0; comp < nc; ++comp) {
            out[static_cast<std::size_t>(comp)] += phi[i] * coeffs_[static_cast<std::size_t>(s.dof(nodes[i], comp))];
        }
    }
}

void FEFunction::grad_in_cell(std::size_t c, const std::array<double, 3>& lambda, std::span<double> out) const {
    const auto& s = *space_;
    const int nc = s.n_components();
    const auto nb = static_cast<std::size_t>(s.n_local_nodes());
    std::vector<double> dl(3 * nb);
    s.element().lambda_derivatives(lambda, dl);
    const CellGeometry g = geometry_of(s.mesh(), c);
    const auto nodes = s.cell_nodes(c);
    std::fill(out.begin(), out.begin() + 2 * nc, 0.0);
    for (std::size_t i = 0; i < nb; ++i) {
        double gx = 0.0, gy = 0.0;
        for (std::size_t m = 0; m < 3; ++m) {
            gx += dl[3 * i + m] * g.grad_lambda[m][0];
            gy += dl[3 * i + m] * g.grad_lambda[m][1];
        }
        for (int comp = 0; comp < nc; ++comp) {
            const double u = coeffs_[static_cast<std::size_t>(s.dof(nodes[i], comp))];
            out[static_cast<std::size_t>(2 * comp)] += gx * u;
            out[static_cast<std::size_t>(2 * comp + 1)] += gy * u;
        }
    }
}

void FEFunction::hessian_in_cell(std::size_t c, const std::array<double, 3>& lambda, std::span<double> out) const {
    const auto& s = *space_;
    const int nc = s.n_components();
    const auto nb = static_cast<std::size_t>(s.n_local_nodes());
    std::vector<double> hl(9 * nb);
    s.element().lambda_hessians(lambda, hl);
    const CellGeometry g = geometry_of(s.mesh(), c);
    const auto nodes = s.cell_nodes(c);
    std::fill(out.begin(), out.begin() + 4 * nc, 0.0);
    for (std::size_t i = 0; i < nb; ++i) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                double h = 0.0;
                for (std::size_t m = 0; m < 3; ++m) {
                    for (std::size_t n = 0; n < 3; ++n) {
                        h += hl[9 * i + 3 * m + n] * g.grad_lambda[m][static_cast<std::size_t>(a)] *
                             g.grad_lambda[n][static_cast<std::size_t>(b)];
                    }
                }
                for (int comp = 0; comp < nc; ++comp) {
                    out[static_cast<std::size_t>(4 * comp + 2 * a + b)] += h * coeffs_[static_cast<std::size_t>(s.dof(nodes[i], comp))];
                }
            }
        }
    }
}

bool locate(const Mesh& m, const Point& x, std::size_t& cell, std::array<double, 3>& lambda) {
    constexpr double tol = 1e-12;
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
        const auto p = m.cell_points(c);
        const double det = m.signed_double_area(c);
        const double l1 = ((x.x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (x.y - p[0].y)) / det;
        const double l2 = ((p[1].x - p[0].x) * (x.y - p[0].y) - (x.x - p[0].x) * (p[1].y - p[0].y)) / det;
        const double l0 = 1.0 - l1 - l2;
        if (l0 >= -tol && l1 >= -tol && l2 >= -tol) {
            cell = c;
            lambda = {l0, l1, l2};
            return true;
        }
    }
    return false;
}

std::vector<double> FEFunction::eval(const Point& x) const {
    std::size_t c = 0;
    std::array<double, 3> l{};
    if (!locate(space_->mesh(), x, c, l)) throw InvalidArgument("FEFunction::eval: point outside the mesh");
    std::vector<double> out(static_cast<std::size_t>(space_->n_components()));
    eval_in_cell(c, l, out);
    return out;
}

std::vector<Index> dirichlet_dofs(const FunctionSpace& s) {
    std::vector<Index> out;
    for (Index node = 0; node < static_cast<Index>(s.n_nodes()); ++node) {
        if (!s.node_on_boundary(node)) continue;
        for (int comp = 0; comp < s.n_components(); ++comp) out.push_back(s.dof(node, comp));
    }
    return out;
}

ConstraintSet homogeneous_dirichlet(const FunctionSpace& s) {
    ConstraintSet cs;
    cs.dirichlet_dofs = dirichlet_dofs(s);
    cs.dirichlet_values.assign(cs.dirichlet_dofs.size(), 0.0);
    return cs;
}

FEFunction interpolate(SpacePtr s, const Field& g) {
    if (g.n_components != s->n_components()) throw ShapeMismatch("interpolate: field shape does not match the space");
    FEFunction u(s);
    std::vector<double> val(static_cast<std::size_t>(s->n_components()));
    for (Index node = 0; node < static_cast<Index>(s->n_nodes()); ++node) {
        g.eval(s->node_points()[static_cast<std::size_t>(node)], val);
        for (int comp = 0; comp < s->n_components(); ++comp) {
            u.coeffs()[static_cast<std::size_t>(s->dof(node, comp))] = val[static_cast<std::size_t>(comp)];
        }
    }
    return u;
}

FEFunction interpolate(SpacePtr s, const FEFunction& g) {
    if (g.space().n_components() != s->n_components()) throw ShapeMismatch("interpolate: field shape does not match the space");
    if (&g.space().mesh() != &s->mesh()) throw InvalidArgument("interpolate: discrete source must live on the same mesh");
    FEFunction u(s);
    std::vector<double> val(static_cast<std::size_t>(s->n_components()));
    for (std::size_t c = 0; c < s->mesh().n_cells(); ++c) {
        const auto nodes = s->cell_nodes(c);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            g.eval_in_cell(c, s->element().node_barycentric(static_cast<int>(i)), val);
            for (int comp = 0; comp < s->n_components(); ++comp) {
                u.coeffs()[static_cast<std::size_t>(s->dof(nodes[i], comp))] = val[static_cast<std::size_t>(comp)];
            }
        }
    }
    return u;
}

namespace {

// rows[r][dof] = integral of (basis_dof . field_r).
template <std::size_t R>
std::array<std::vector<double>, R> integrate_against(const FunctionSpace& s, const std::array<Field, R>& fields) {
    std::array<std::vector<double>, R> rows;
    for (auto& r : rows) r.assign(s.n_dofs(), 0.0);
    const auto& rule = quadrature_rule(std::min(kMaxQuadratureDegree, s.order() + 2));
    const int nc = s.n_components();
    const auto nb = static_cast<std::size_t>(s.n_local_nodes());
    std::vector<double> phi(nb), val(static_cast<std::size_t>(nc));
    const Mesh& m = s.mesh();
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
        const double area = 0.5 * std::abs(m.signed_double_area(c));
        const auto nodes = s.cell_nodes(c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            s.element().values(rule.points[q], phi);
            const Point x = physical_point(m, c, rule.points[q]);
            const double w = 2.0 * area * rule.weights[q];
            for (std::size_t r = 0; r < R; ++r) {
                fields[r].eval(x, val);
                for (std::size_t i = 0; i < nb; ++i) {
                    for (int comp = 0; comp < nc; ++comp) {
                        rows[r][static_cast<std::size_t>(s.dof(nodes[i], comp))] +=
                            w * phi[i] * val[static_cast<std::size_t>(comp)] * s.component_weight(comp);
                    }
                }
            }
        }
    }
    return rows;
}

}  // namespace

std::vector<double> mean_zero_constraint(const FunctionSpace& s) {
    if (s.shape() != ValueShape::scalar) throw ShapeMismatch("mean_zero_constraint: space must be scalar-valued");
    const std::array<Field, 1> one{scalar_field([](const Point&) { return 1.0; })};
    return std::move(integrate_against(s, one)[0]);
}

std::array<Field, 3> rigid_motion_fields(RigidMotionVariant variant) {
    Field third = variant == RigidMotionVariant::rm_rot
                      ? vector_field([](const Point& x) { return std::array<double, 2>{x.x, x.y}; })
                      : vector_field([](const Point& x) { return std::array<double, 2>{-x.y, x.x}; });
    return {vector_field([](const Point&) { return std::array<double, 2>{1.0, 0.0}; }),
            vector_field([](const Point&) { return std::array<double, 2>{0.0, 1.0}; }), std::move(third)};
}

std::array<std::vector<double>, 3> rigid_motion_constraints(const FunctionSpace& s, RigidMotionVariant variant) {
    if (s.shape() != ValueShape::vector2) throw ShapeMismatch("rigid_motion_constraints: space must be vector-valued");
    return integrate_against(s, rigid_motion_fields(variant));
}

}  // namespace decouple
