#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "decouple/solvers.hpp"
#include "decouple/verification.hpp"

namespace decouple::io {

using nlohmann::json;

/// Coefficients plus space metadata.
[[nodiscard]] json to_json(const FEFunction& f);
/// Wall-clock timings are left out unless requested, so that identical runs
/// produce identical files.
[[nodiscard]] json to_json(const StageInfo& s, bool timings = false);
[[nodiscard]] json to_json(const DecoupledSolution& sol, bool timings = false);
[[nodiscard]] json to_json(const ConvergenceReport& r, bool timings = false);
[[nodiscard]] json to_json(const CheckReport& r);
[[nodiscard]] json to_json(const InfSupEstimate& e);

/// One row per level per norm: problem,level,h,n_dofs,norm,error,rate.
/// The rate column holds the fitted rate on the last row of each norm.
void write_report_csv(std::ostream& out, const ConvergenceReport& r);

/// Legacy ASCII VTK with vertex values of each field. Cell-wise discontinuous
/// data is not represented; fields are sampled at the mesh vertices.
void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<std::pair<std::string, const FEFunction*>>& fields);

/// MatrixMarket coordinate (general, real) and array formats.
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
[[nodiscard]] SparseMatrix read_matrix_market(std::istream& in);
void write_matrix_market(std::ostream& out, std::span<const double> v);
[[nodiscard]] std::vector<double> read_matrix_market_vector(std::istream& in);

/// Writes `text` to `path`, throwing Error("io", ...) on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace decouple::io
