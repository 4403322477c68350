#include "decouple/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "decouple/error.hpp"

namespace decouple::io {

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const FEFunction& f) {
    const auto& s = f.space();
    return {{"order", s.order()},
            {"shape", to_string(s.shape())},
            {"n_dofs", s.n_dofs()},
            {"n_cells", s.mesh().n_cells()},
            {"n_vertices", s.mesh().n_vertices()},
            {"coefficients", f.coeffs()}};
}

json to_json(const StageInfo& s, bool timings) {
    json j = {{"name", s.name}, {"n_dofs", s.n_dofs}, {"iterations", s.iterations}, {"relative_residual", s.relative_residual}};
    if (timings) j["seconds"] = s.seconds;
    return j;
}

json to_json(const DecoupledSolution& sol, bool timings) {
    json j;
    j["stages"] = json::array();
    for (const auto& s : sol.stages) j["stages"].push_back(to_json(s, timings));
    j["fields"] = json::object();
    for (const auto& [name, f] : sol.fields) j["fields"][name] = to_json(f);
    return j;
}

json to_json(const ConvergenceReport& r, bool timings) {
    json j;
    j["problem"] = r.problem;
    j["levels"] = json::array();
    for (const auto& l : r.levels) {
        json errors = json::object();
        for (const auto& [k, v] : l.errors) errors[k] = finite_or_null(v);
        json level = {{"level", l.level},   {"h", l.h},
                      {"n_cells", l.n_cells}, {"n_dofs", l.n_dofs},
                      {"iterations", l.iterations}, {"max_residual", l.max_residual},
                      {"errors", errors}};
        if (!l.diagnostics.empty()) level["diagnostics"] = l.diagnostics;
        if (timings) level["seconds"] = l.seconds;
        j["levels"].push_back(std::move(level));
    }
    j["fitted_rates"] = json::object();
    for (const auto& [k, v] : r.rates) j["fitted_rates"][k] = finite_or_null(v);
    j["expected_rates"] = json::object();
    for (const auto& [k, e] : r.expected) {
        j["expected_rates"][k] = {{"target", e.target},
                                  {"tolerance", e.tolerance},
                                  {"mode", e.mode == RateExpectation::Mode::within ? "within" : "at_least"},
                                  {"relative_to", e.relative_to}};
    }
    j["verdicts"] = r.verdicts;
    j["passed"] = r.passed();
    j["notes"] = r.notes;
    return j;
}

json to_json(const CheckReport& r) {
    json j;
    j["passed"] = r.passed();
    j["items"] = json::array();
    for (const auto& i : r.items) {
        j["items"].push_back(
            {{"name", i.name}, {"passed", i.passed}, {"value", finite_or_null(i.value)}, {"threshold", i.threshold}, {"detail", i.detail}});
    }
    return j;
}

json to_json(const InfSupEstimate& e) {
    return {{"beta", e.beta},
            {"beta_quotient", e.beta_quotient},
            {"kernel_dim", e.kernel_dim},
            {"n_velocity", e.n_velocity},
            {"n_pressure", e.n_pressure},
            {"skipped", e.skipped},
            {"note", e.note}};
}

void write_report_csv(std::ostream& out, const ConvergenceReport& r) {
    out << "problem,level,h,n_dofs,norm,error,rate\n";
    out << std::setprecision(10);
    std::vector<std::string> names;
    if (!r.levels.empty()) {
        for (const auto& [k, _] : r.levels.back().errors) names.push_back(k);
    }
    for (const auto& name : names) {
        for (std::size_t l = 0; l < r.levels.size(); ++l) {
            const auto& lv = r.levels[l];
            auto it = lv.errors.find(name);
            if (it == lv.errors.end()) continue;
            out << r.problem << ',' << lv.level << ',' << lv.h << ',' << lv.n_dofs << ',' << name << ',' << it->second << ',';
            auto rate = r.rates.find(name);
            if (l + 1 == r.levels.size() && rate != r.rates.end()) out << rate->second;
            out << '\n';
        }
    }
}

void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<std::pair<std::string, const FEFunction*>>& fields) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "# vtk DataFile Version 3.0\ndecoupled FE solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_vertices() << " double\n";
    for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << " 0\n";
    out << "CELLS " << mesh.n_cells() << ' ' << 4 * mesh.n_cells() << '\n';
    for (const auto& c : mesh.cells()) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    out << "CELL_TYPES " << mesh.n_cells() << '\n';
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) out << "5\n";
    if (fields.empty()) return;
    out << "POINT_DATA " << mesh.n_vertices() << '\n';
    for (const auto& [name, f] : fields) {
        if (&f->space().mesh() != &mesh) throw InvalidArgument("write_vtk: field '" + name + "' lives on another mesh");
        // Vertex nodes come first, so node v is vertex v.
        const int nc = f->space().n_components();
        const auto& x = f->coeffs();
        auto at = [&](std::size_t v, int c) { return x[v * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)]; };
        if (nc == 1) {
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (std::size_t v = 0; v < mesh.n_vertices(); ++v) out << at(v, 0) << '\n';
        } else if (nc == 2) {
            out << "VECTORS " << name << " double\n";
            for (std::size_t v = 0; v < mesh.n_vertices(); ++v) out << at(v, 0) << ' ' << at(v, 1) << " 0\n";
        } else {
            out << "TENSORS " << name << " double\n";
            for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
                out << at(v, 0) << ' ' << at(v, 1) << " 0\n" << at(v, 1) << ' ' << at(v, 2) << " 0\n0 0 0\n";
            }
        }
    }
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "%%MatrixMarket matrix coordinate real general\n" << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    const auto& off = a.row_offsets();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
            out << r + 1 << ' ' << a.col_indices()[k] + 1 << ' ' << a.values()[k] << '\n';
        }
    }
}

namespace {

std::string read_header(std::istream& in, const std::string& expected_kind) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) {
        throw Error("io", "MatrixMarket: missing banner");
    }
    if (line.find(expected_kind) == std::string::npos || line.find("real") == std::string::npos) {
        throw Error("io", "MatrixMarket: unsupported format '" + line + "'");
    }
    while (in.peek() == '%') std::getline(in, line);
    return line;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    read_header(in, "coordinate");
    std::size_t rows = 0, cols = 0, nnz = 0;
    if (!(in >> rows >> cols >> nnz)) throw Error("io", "MatrixMarket: bad size line");
    std::vector<Triplet> t;
    t.reserve(nnz);
    for (std::size_t k = 0; k < nnz; ++k) {
        long i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw Error("io", "MatrixMarket: truncated entry list");
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > rows || static_cast<std::size_t>(j) > cols) {
            throw Error("io", "MatrixMarket: entry index out of range");
        }
        t.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    }
    return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

void write_matrix_market(std::ostream& out, std::span<const double> v) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "%%MatrixMarket matrix array real general\n" << v.size() << " 1\n";
    for (double x : v) out << x << '\n';
}

std::vector<double> read_matrix_market_vector(std::istream& in) {
    read_header(in, "array");
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols) || cols != 1) throw Error("io", "MatrixMarket: expected a single column");
    std::vector<double> v(rows);
    for (auto& x : v) {
        if (!(in >> x)) throw Error("io", "MatrixMarket: truncated array");
    }
    return v;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error("io", "cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error("io", "failed writing '" + path + "'");
}

}  // namespace decouple::io
