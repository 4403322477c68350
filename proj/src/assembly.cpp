#include "decouple/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "decouple/error.hpp"
#include "decouple/quadrature.hpp"

namespace decouple {

const char* to_string(DiffOp op) noexcept {
    switch (op) {
        case DiffOp::value: return "value";
        case DiffOp::grad: return "grad";
        case DiffOp::div: return "div";
        case DiffOp::curl: return "curl";
        case DiffOp::rot: return "rot";
        case DiffOp::symcurl: return "symcurl";
        case DiffOp::boldcurl: return "boldcurl";
        case DiffOp::eps: return "eps";
        case DiffOp::pi: return "pi";
        case DiffOp::trace_symcurl: return "trace_symcurl";
    }
    return "unknown";
}

const char* to_string(FormKind k) noexcept {
    switch (k) {
        case FormKind::mass: return "MASS";
        case FormKind::stiffness: return "STIFFNESS";
        case FormKind::curl_curl: return "CURLCURL";
        case FormKind::div_pressure: return "DIV_PRESSURE";
        case FormKind::symcurl: return "SYMCURL";
        case FormKind::eps: return "EPS";
        case FormKind::trace_pi: return "TRACE_PI";
        case FormKind::curlcouple: return "CURLCOUPLE";
        case FormKind::boldcurl_couple: return "BOLDCURL_COUPLE";
    }
    return "unknown";
}

int op_size(DiffOp op, ValueShape shape) {
    const auto bad = [&]() -> int {
        throw ShapeMismatch(std::string("operator ") + to_string(op) + " is undefined for " + to_string(shape) + " fields");
    };
    switch (shape) {
        case ValueShape::scalar:
            switch (op) {
                case DiffOp::value: return 1;
                case DiffOp::grad: return 2;
                case DiffOp::curl: return 2;
                case DiffOp::pi: return 4;
                default: return bad();
            }
        case ValueShape::vector2:
            switch (op) {
                case DiffOp::value: return 2;
                case DiffOp::grad: return 4;
                case DiffOp::div: return 1;
                case DiffOp::rot: return 1;
                case DiffOp::symcurl:
                case DiffOp::boldcurl:
                case DiffOp::eps: return 4;
                case DiffOp::trace_symcurl: return 1;
                default: return bad();
            }
        case ValueShape::symtensor2:
            switch (op) {
                case DiffOp::value: return 4;
                case DiffOp::grad: return 8;
                case DiffOp::div: return 2;
                default: return bad();
            }
    }
    return bad();
}

void apply_op(DiffOp op, ValueShape shape, std::span<const double> v, std::span<const double> g, std::span<double> out) {
    auto d = [&](int comp, int dir) { return g[static_cast<std::size_t>(2 * comp + dir)]; };
    switch (shape) {
        case ValueShape::scalar:
            switch (op) {
                case DiffOp::value: out[0] = v[0]; return;
                case DiffOp::grad: out[0] = d(0, 0); out[1] = d(0, 1); return;
                case DiffOp::curl: out[0] = d(0, 1); out[1] = -d(0, 0); return;
                case DiffOp::pi: out[0] = v[0]; out[1] = 0.0; out[2] = 0.0; out[3] = v[0]; return;
                default: break;
            }
            break;
        case ValueShape::vector2:
            switch (op) {
                case DiffOp::value: out[0] = v[0]; out[1] = v[1]; return;
                case DiffOp::grad:
                    out[0] = d(0, 0); out[1] = d(0, 1); out[2] = d(1, 0); out[3] = d(1, 1);
                    return;
                case DiffOp::div: out[0] = d(0, 0) + d(1, 1); return;
                case DiffOp::rot: out[0] = d(1, 0) - d(0, 1); return;
                case DiffOp::boldcurl:
                    out[0] = d(0, 1); out[1] = -d(0, 0); out[2] = d(1, 1); out[3] = -d(1, 0);
                    return;
                case DiffOp::symcurl: {
                    const double off = 0.5 * (d(1, 1) - d(0, 0));
                    out[0] = d(0, 1); out[1] = off; out[2] = off; out[3] = -d(1, 0);
                    return;
                }
                case DiffOp::eps: {
                    const double off = 0.5 * (d(0, 1) + d(1, 0));
                    out[0] = d(0, 0); out[1] = off; out[2] = off; out[3] = d(1, 1);
                    return;
                }
                case DiffOp::trace_symcurl: out[0] = d(0, 1) - d(1, 0); return;
                default: break;
            }
            break;
        case ValueShape::symtensor2:
            switch (op) {
                case DiffOp::value: out[0] = v[0]; out[1] = v[1]; out[2] = v[1]; out[3] = v[2]; return;
                case DiffOp::grad: {
                    // entry (i,j) of the full tensor maps to stored component
                    constexpr int comp_of[4] = {0, 1, 1, 2};
                    for (int ij = 0; ij < 4; ++ij) {
                        out[static_cast<std::size_t>(2 * ij)] = d(comp_of[ij], 0);
                        out[static_cast<std::size_t>(2 * ij + 1)] = d(comp_of[ij], 1);
                    }
                    return;
                }
                case DiffOp::div:
                    out[0] = d(0, 0) + d(1, 1);
                    out[1] = d(1, 0) + d(2, 1);
                    return;
                default: break;
            }
            break;
    }
    (void)op_size(op, shape);  // throws
}

std::pair<DiffOp, DiffOp> form_operators(FormKind kind) {
    switch (kind) {
        case FormKind::mass: return {DiffOp::value, DiffOp::value};
        case FormKind::stiffness: return {DiffOp::grad, DiffOp::grad};
        case FormKind::curl_curl: return {DiffOp::curl, DiffOp::curl};
        case FormKind::div_pressure: return {DiffOp::div, DiffOp::value};
        case FormKind::symcurl: return {DiffOp::symcurl, DiffOp::symcurl};
        case FormKind::eps: return {DiffOp::eps, DiffOp::eps};
        case FormKind::trace_pi: return {DiffOp::pi, DiffOp::symcurl};
        case FormKind::curlcouple: return {DiffOp::curl, DiffOp::value};
        case FormKind::boldcurl_couple: return {DiffOp::boldcurl, DiffOp::value};
    }
    throw InvalidArgument("unknown form kind");
}

Point map_to_cell(const Mesh& m, std::size_t c, const std::array<double, 3>& l) {
    const auto p = m.cell_points(c);
    return {l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x, l[0] * p[0].y + l[1] * p[1].y + l[2] * p[2].y};
}

CellGeometry cell_geometry(const Mesh& m, std::size_t c) {
    const auto p = m.cell_points(c);
    return CellGeometry::from_points({{{p[0].x, p[0].y}, {p[1].x, p[1].y}, {p[2].x, p[2].y}}});
}

namespace {

int op_degree(DiffOp op, int order) {
    return (op == DiffOp::value || op == DiffOp::pi) ? order : std::max(order - 1, 0);
}

/// Basis values and barycentric derivatives of one element on one rule.
struct Tabulation {
    std::size_t nq = 0, nb = 0;
    std::vector<double> phi;   // [q][i]
    std::vector<double> dphi;  // [q][i][m]

    Tabulation(const LagrangeElement& el, const QuadratureRule& rule)
        : nq(rule.size()), nb(static_cast<std::size_t>(el.n_basis())), phi(nq * nb), dphi(nq * nb * 3) {
        for (std::size_t q = 0; q < nq; ++q) {
            el.values(rule.points[q], std::span(phi).subspan(q * nb, nb));
            el.lambda_derivatives(rule.points[q], std::span(dphi).subspan(q * nb * 3, nb * 3));
        }
    }
};

/// op(basis) for every local dof at every quadrature point of one cell:
/// out[(q * ndof + dof) * size + k].
void evaluate_basis_ops(const FunctionSpace& s, const Tabulation& tab, const CellGeometry& geo, DiffOp op, int size,
                        std::vector<double>& out) {
    const int nc = s.n_components();
    const std::size_t ndof = tab.nb * static_cast<std::size_t>(nc);
    out.assign(tab.nq * ndof * static_cast<std::size_t>(size), 0.0);
    std::vector<double> val(static_cast<std::size_t>(nc)), grad(static_cast<std::size_t>(2 * nc));
    for (std::size_t q = 0; q < tab.nq; ++q) {
        for (std::size_t i = 0; i < tab.nb; ++i) {
            const double* dl = &tab.dphi[(q * tab.nb + i) * 3];
            double gx = 0.0, gy = 0.0;
            for (std::size_t m = 0; m < 3; ++m) {
                gx += dl[m] * geo.grad_lambda[m][0];
                gy += dl[m] * geo.grad_lambda[m][1];
            }
            for (int comp = 0; comp < nc; ++comp) {
                std::fill(val.begin(), val.end(), 0.0);
                std::fill(grad.begin(), grad.end(), 0.0);
                val[static_cast<std::size_t>(comp)] = tab.phi[q * tab.nb + i];
                grad[static_cast<std::size_t>(2 * comp)] = gx;
                grad[static_cast<std::size_t>(2 * comp + 1)] = gy;
                const std::size_t dof = i * static_cast<std::size_t>(nc) + static_cast<std::size_t>(comp);
                apply_op(op, s.shape(), val, grad,
                         std::span(out).subspan((q * ndof + dof) * static_cast<std::size_t>(size), static_cast<std::size_t>(size)));
            }
        }
    }
}

void expand_field(const Field& f, const Point& x, int want, std::vector<double>& buf, std::vector<double>& out) {
    buf.resize(static_cast<std::size_t>(f.n_components));
    f.eval(x, buf);
    if (f.n_components == want) {
        out.assign(buf.begin(), buf.end());
    } else if (f.n_components == 3 && want == 4) {
        out = {buf[0], buf[1], buf[1], buf[2]};
    } else {
        throw ShapeMismatch("load field has " + std::to_string(f.n_components) + " components, operator expects " +
                            std::to_string(want));
    }
}

}  // namespace

SparseMatrix assemble_operators(DiffOp trial_op, DiffOp test_op, const FunctionSpace& trial, const FunctionSpace& test,
                                double coefficient) {
    if (&trial.mesh() != &test.mesh()) throw InvalidArgument("assemble: trial and test spaces live on different meshes");
    const int size = op_size(trial_op, trial.shape());
    if (op_size(test_op, test.shape()) != size) {
        throw ShapeMismatch(std::string("assemble: ") + to_string(trial_op) + " of " + to_string(trial.shape()) +
                            " is incompatible with " + to_string(test_op) + " of " + to_string(test.shape()));
    }
    const int degree = std::clamp(op_degree(trial_op, trial.order()) + op_degree(test_op, test.order()), 1, kMaxQuadratureDegree);
    const auto& rule = quadrature_rule(degree);
    const Tabulation tab_trial(trial.element(), rule);
    const Tabulation tab_test(test.element(), rule);

    const Mesh& m = trial.mesh();
    const auto nt = static_cast<std::size_t>(trial.n_local_dofs());
    const auto ns = static_cast<std::size_t>(test.n_local_dofs());
    std::vector<Index> dofs_trial(nt), dofs_test(ns);
    std::vector<double> ops_trial, ops_test, local(nt * ns);
    std::vector<Triplet> triplets;
    triplets.reserve(m.n_cells() * nt * ns);
    const auto sz = static_cast<std::size_t>(size);

    for (std::size_t c = 0; c < m.n_cells(); ++c) {
        const CellGeometry geo = cell_geometry(m, c);
        evaluate_basis_ops(trial, tab_trial, geo, trial_op, size, ops_trial);
        evaluate_basis_ops(test, tab_test, geo, test_op, size, ops_test);
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = coefficient * std::abs(geo.det) * rule.weights[q];
            for (std::size_t i = 0; i < ns; ++i) {
                const double* ti = &ops_test[(q * ns + i) * sz];
                for (std::size_t j = 0; j < nt; ++j) {
                    const double* tj = &ops_trial[(q * nt + j) * sz];
                    double s = 0.0;
                    for (std::size_t k = 0; k < sz; ++k) s += ti[k] * tj[k];
                    local[i * nt + j] += w * s;
                }
            }
        }
        trial.cell_dofs(c, dofs_trial);
        test.cell_dofs(c, dofs_test);
        for (std::size_t i = 0; i < ns; ++i) {
            for (std::size_t j = 0; j < nt; ++j) {
                if (local[i * nt + j] != 0.0) triplets.push_back({dofs_test[i], dofs_trial[j], local[i * nt + j]});
            }
        }
    }
    return SparseMatrix::from_triplets(test.n_dofs(), trial.n_dofs(), std::move(triplets));
}

SparseMatrix assemble_bilinear(FormKind kind, const FunctionSpace& trial, const FunctionSpace& test, double coefficient) {
    switch (kind) {
        case FormKind::mass:
        case FormKind::stiffness:
        case FormKind::symcurl:
        case FormKind::eps:
            if (trial.shape() != test.shape()) throw ShapeMismatch(std::string(to_string(kind)) + ": trial and test shapes differ");
            break;
        case FormKind::curl_curl:
            if (trial.shape() != ValueShape::scalar || test.shape() != ValueShape::scalar) {
                throw ShapeMismatch("CURLCURL: scalar spaces required");
            }
            break;
        case FormKind::div_pressure:
            if (!((trial.shape() == ValueShape::vector2 && test.shape() == ValueShape::scalar) ||
                  (trial.shape() == ValueShape::symtensor2 && test.shape() == ValueShape::vector2))) {
                throw ShapeMismatch("DIV_PRESSURE: trial must be vector (test scalar) or symtensor (test vector)");
            }
            break;
        case FormKind::trace_pi:
        case FormKind::curlcouple:
            if (trial.shape() != ValueShape::scalar || test.shape() != ValueShape::vector2) {
                throw ShapeMismatch(std::string(to_string(kind)) + ": trial scalar and test vector required");
            }
            break;
        case FormKind::boldcurl_couple:
            if (trial.shape() != ValueShape::vector2 || test.shape() != ValueShape::symtensor2) {
                throw ShapeMismatch("BOLDCURL_COUPLE: trial vector and test symtensor required");
            }
            break;
    }
    const auto [trial_op, test_op] = form_operators(kind);
    return assemble_operators(trial_op, test_op, trial, test, coefficient);
}

namespace {

template <class Integrand>
std::vector<double> assemble_vector(const FunctionSpace& test, DiffOp op, int quadrature_degree, Integrand&& integrand) {
    const int size = op_size(op, test.shape());
    const auto& rule = quadrature_rule(std::clamp(quadrature_degree, 1, kMaxQuadratureDegree));
    const Tabulation tab(test.element(), rule);
    const Mesh& m = test.mesh();
    const auto ns = static_cast<std::size_t>(test.n_local_dofs());
    const auto sz = static_cast<std::size_t>(size);
    std::vector<double> b(test.n_dofs(), 0.0), ops, fval;
    std::vector<Index> dofs(ns);
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
        const CellGeometry geo = cell_geometry(m, c);
        evaluate_basis_ops(test, tab, geo, op, size, ops);
        test.cell_dofs(c, dofs);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            integrand(map_to_cell(m, c, rule.points[q]), size, fval);
            const double w = std::abs(geo.det) * rule.weights[q];
            for (std::size_t i = 0; i < ns; ++i) {
                const double* ti = &ops[(q * ns + i) * sz];
                double s = 0.0;
                for (std::size_t k = 0; k < sz; ++k) s += ti[k] * fval[k];
                b[static_cast<std::size_t>(dofs[i])] += w * s;
            }
        }
    }
    return b;
}

}  // namespace

std::vector<double> assemble_load(const FunctionSpace& test, const Field& f, DiffOp against, int quadrature_degree) {
    std::vector<double> buf;
    return assemble_vector(test, against, quadrature_degree, [&](const Point& x, int size, std::vector<double>& out) {
        expand_field(f, x, size, buf, out);
    });
}

std::vector<double> assemble_projection_load(DiffOp op, const FunctionSpace& test, const FieldJet& exact,
                                             int quadrature_degree) {
    const int nc = test.n_components();
    if (exact.value.n_components != nc || exact.gradient.n_components != 2 * nc) {
        throw ShapeMismatch("assemble_projection_load: exact field shape does not match the space");
    }
    std::vector<double> val(static_cast<std::size_t>(nc)), grad(static_cast<std::size_t>(2 * nc));
    return assemble_vector(test, op, quadrature_degree, [&](const Point& x, int size, std::vector<double>& out) {
        exact.value.eval(x, val);
        exact.gradient.eval(x, grad);
        out.resize(static_cast<std::size_t>(size));
        apply_op(op, test.shape(), val, grad, out);
    });
}

}  // namespace decouple
