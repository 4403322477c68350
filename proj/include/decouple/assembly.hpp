#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decouple/fespace.hpp"
#include "decouple/sparse.hpp"

namespace decouple {

/// Pointwise differential operators acting on a field's value and gradient.
/// Tensor-valued results are written as full 2x2 matrices (11, 12, 21, 22) so
/// that plain Euclidean contraction is the Frobenius product; a symmetric
/// tensor stored as (t11, t12, t22) therefore picks up the factor 2 on t12.
///
/// Conventions in 2D: curl v = (d2 v, -d1 v) for a scalar, rot v = d1 v2 - d2 v1,
/// and the bold curl of a vector has the curls of its components as rows.
enum class DiffOp {
    value,          // scalar -> 1, vector -> 2, symtensor -> 4
    grad,           // scalar -> 2, vector -> 4 (d_j v_i), symtensor -> 8
    div,            // vector -> 1, symtensor -> 2 (row-wise)
    curl,           // scalar -> 2
    rot,            // vector -> 1
    symcurl,        // vector -> 4, symmetric part of the bold curl
    boldcurl,       // vector -> 4, full bold curl
    eps,            // vector -> 4, symmetric gradient
    pi,             // scalar -> 4, w I
    trace_symcurl,  // vector -> 1, tr(sym curl q) = d2 q1 - d1 q2
};

[[nodiscard]] const char* to_string(DiffOp op) noexcept;

/// Output length of `op` for a field of the given shape; throws ShapeMismatch
/// when the operator is undefined for that shape.
[[nodiscard]] int op_size(DiffOp op, ValueShape shape);

/// Applies `op` to a jet: value[c] and grad[2*c + d] for each stored component.
void apply_op(DiffOp op, ValueShape shape, std::span<const double> value, std::span<const double> grad,
              std::span<double> out);

/// The weak forms of the decoupled pipelines.
enum class FormKind {
    mass,             // (u, v)
    stiffness,        // (grad u, grad v), componentwise
    curl_curl,        // (curl u, curl v) for scalars
    div_pressure,     // (div psi, q): trial velocity (vector or symtensor), test pressure
    symcurl,          // (sym curl p, sym curl q)
    eps,              // (eps(p), eps(q))
    trace_pi,         // (pi w, sym curl q): trial scalar, test vector
    curlcouple,       // (curl w, psi): trial scalar, test vector
    boldcurl_couple,  // (bold curl phi, Psi): trial vector, test symtensor
};

[[nodiscard]] const char* to_string(FormKind k) noexcept;

/// Trial and test operators of a form.
[[nodiscard]] std::pair<DiffOp, DiffOp> form_operators(FormKind kind);

/// A[i][j] = coefficient * integral of op_trial(basis_j) . op_test(basis_i).
/// The quadrature degree is the sum of the polynomial degrees of both factors.
[[nodiscard]] SparseMatrix assemble_operators(DiffOp trial_op, DiffOp test_op, const FunctionSpace& trial,
                                              const FunctionSpace& test, double coefficient = 1.0);

[[nodiscard]] SparseMatrix assemble_bilinear(FormKind kind, const FunctionSpace& trial, const FunctionSpace& test,
                                             double coefficient = 1.0);

/// b[i] = integral of f . op(basis_i). `f` supplies op_size(op) components, or
/// (t11, t12, t22) when op produces a symmetric tensor.
[[nodiscard]] std::vector<double> assemble_load(const FunctionSpace& test, const Field& f, DiffOp against = DiffOp::value,
                                                int quadrature_degree = 8);

/// A field with its gradient; gradient[2*c + d] = d/dx_d of component c.
struct FieldJet {
    Field value;
    Field gradient;
};

/// b[i] = integral of op(exact) . op(basis_i), for Galerkin projections.
[[nodiscard]] std::vector<double> assemble_projection_load(DiffOp op, const FunctionSpace& test, const FieldJet& exact,
                                                           int quadrature_degree = 8);

/// Euclidean quadrature point in physical coordinates: x = sum l_i P_i.
[[nodiscard]] Point map_to_cell(const Mesh& m, std::size_t c, const std::array<double, 3>& lambda);
[[nodiscard]] CellGeometry cell_geometry(const Mesh& m, std::size_t c);

}  // namespace decouple
