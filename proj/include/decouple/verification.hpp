#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "decouple/assembly.hpp"
#include "decouple/manufactured.hpp"
#include "decouple/solvers.hpp"

namespace decouple {

enum class Norm { l2, h1_semi, h1 };

[[nodiscard]] const char* to_string(Norm n) noexcept;

/// Norm of uh - exact by degree-8 quadrature. H1 norms need exact.gradient.
[[nodiscard]] double error_norm(const FEFunction& uh, const FieldJet& exact, Norm norm);

/// Energy-type error || op(uh - exact) ||_0 (Frobenius for tensors).
[[nodiscard]] double operator_error_norm(const FEFunction& uh, const FieldJet& exact, DiffOp op);

/// || op(vh) ||_0 of a discrete function.
[[nodiscard]] double discrete_norm(const FEFunction& vh, DiffOp op);

/// Difference of two functions on the same space.
[[nodiscard]] FEFunction difference(const FEFunction& a, const FEFunction& b);

/// Solves form(P exact, q) = form(exact, q) for all discrete q under the
/// constraints. `form` must have equal trial and test operators. Throws
/// SingularSystem for a form with a kernel and no constraints.
[[nodiscard]] FEFunction galerkin_projection(SpacePtr space, const FieldJet& exact, FormKind form,
                                             const ConstraintSet& constraints, const SolverOptions& opts = {});

enum class GapKind { biharmonic_u, hhj_u, hhj_p };

[[nodiscard]] const char* to_string(GapKind g) noexcept;

/// |P^grad u - u_h|_1 or ||sym curl(P^cs p - p_h)||_0.
[[nodiscard]] double superconvergence_gap(const DecoupledSolution& sol, const ManufacturedCase& mcase, GapKind which,
                                          const SolverOptions& opts = {});

/// Least-squares slope of log(error) against log(h).
[[nodiscard]] double fit_rate(std::span<const double> h, std::span<const double> errors);

struct RateExpectation {
    enum class Mode { within, at_least };
    double target = 0.0;
    double tolerance = 0.0;
    Mode mode = Mode::within;
    /// When set, the target is added to the fitted rate of this norm.
    std::string relative_to;
};

struct LevelRecord {
    int level = 0;
    double h = 0.0;
    std::size_t n_cells = 0;
    std::size_t n_dofs = 0;
    int iterations = 0;
    double max_residual = 0.0;
    double seconds = 0.0;
    std::map<std::string, double> errors;
    std::map<std::string, double> diagnostics;  // recorded, no rate fitted
};

struct ConvergenceReport {
    std::string problem;
    std::vector<LevelRecord> levels;
    std::map<std::string, double> rates;  // over the last 3 levels
    std::map<std::string, RateExpectation> expected;
    std::map<std::string, bool> verdicts;
    std::vector<std::string> notes;

    [[nodiscard]] bool passed() const;
};

/// Computes the named errors of one level; fills the bookkeeping fields.
using LevelRunner = std::function<void(MeshPtr mesh, LevelRecord& rec)>;

/// Runs `runner` on base, refine(base), ... (n_levels meshes), fits rates over
/// the last 3 levels and applies the expectations. Levels run on up to `jobs`
/// threads; the report does not depend on completion order.
[[nodiscard]] ConvergenceReport convergence_study(const std::string& problem, const Mesh& base, int n_levels,
                                                  const LevelRunner& runner,
                                                  std::map<std::string, RateExpectation> expected, int jobs = 1);

/// Recomputes rates and verdicts from the levels.
void finalize_report(ConvergenceReport& r);

struct CheckItem {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckItem> items;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] const CheckItem* first_failure() const;
};

/// Pointwise div curl = 0 and rot grad = 0 for a random P_k field, and kernel
/// dimensions of SYMCURL (3) and STIFFNESS without boundary conditions (1).
[[nodiscard]] CheckReport exactness_check(MeshPtr mesh, int order, std::uint64_t seed = 1);

/// Kernel dimension of an assembled form on a space without constraints:
/// eigenvalues of A x = lambda M x below rel_tol times the largest computed one.
[[nodiscard]] int kernel_dimension(const FunctionSpace& space, FormKind form, int probe = 6, double rel_tol = 1e-8);

/// Synthesizes tau = grad p + curl w from random p (mean-zero) and w (H^1_0),
/// recovers both parts and reports the recomposition residual.
[[nodiscard]] CheckReport helmholtz_recompose_check(MeshPtr mesh, int order, std::uint64_t seed = 2,
                                                    bool zero_p = false, bool zero_w = false);

struct InfSupEstimate {
    double beta = 0.0;           // over mean-zero pressures
    double beta_quotient = 0.0;  // over pressures orthogonal to the whole kernel of B^T
    int kernel_dim = 0;          // pressure kernel of B^T, constants included
    std::size_t n_velocity = 0;
    std::size_t n_pressure = 0;
    bool skipped = false;
    std::string note;
};

/// Generalized singular values of B with respect to the velocity H^1-seminorm
/// (A with Dirichlet rows removed) and the pressure mass matrix:
/// beta^2 are the eigenvalues of B A^-1 B^T q = l M q. The constant pressure
/// is always in the kernel; a stable pair has no other kernel vector.
[[nodiscard]] InfSupEstimate estimate_infsup(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& pressure_mass,
                                             std::span<const Index> velocity_dirichlet);

/// Assembles the blocks of the pair (velocity_order, pressure_order) on mesh.
[[nodiscard]] InfSupEstimate estimate_infsup(MeshPtr mesh, int velocity_order, int pressure_order);

}  // namespace decouple
