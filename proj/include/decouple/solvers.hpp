#pragma once

#include <map>
#include <string>
#include <vector>

#include "decouple/assembly.hpp"
#include "decouple/fespace.hpp"
#include "decouple/linalg.hpp"

namespace decouple {

enum class PoissonForm { grad, curl };

/// Bookkeeping for one linear solve of a pipeline.
struct StageInfo {
    std::string name;
    std::size_t n_dofs = 0;
    int iterations = 0;
    double relative_residual = 0.0;
    double seconds = 0.0;
};

/// Named stage fields of a decoupled pipeline plus per-solve statistics.
/// Nested pipelines prefix their fields, e.g. "w/phi" is the Stokes velocity of
/// the biharmonic solve producing w.
struct DecoupledSolution {
    std::map<std::string, FEFunction> fields;
    std::vector<StageInfo> stages;

    [[nodiscard]] const FEFunction& field(const std::string& name) const;
    [[nodiscard]] bool has(const std::string& name) const { return fields.count(name) != 0; }
    [[nodiscard]] int total_iterations() const;
    [[nodiscard]] double max_relative_residual() const;
};

struct PipelineOptions {
    int scalar_order = 2;    // V_h
    int velocity_order = 2;  // X_h; also the vector space P_h of HHJ and the tensor space of triharmonic
    int pressure_order = 1;  // P_h; also the vector pressure of the tensor Stokes stage
    SolverOptions solver{};
    bool check_singular = true;
};

/// Validates orders and tolerance; throws InvalidArgument.
void validate(const PipelineOptions& o);

struct PoissonSolution {
    FEFunction u;
    StageInfo info;
};

/// (grad u, grad v) = load(v) with homogeneous Dirichlet conditions. The curl
/// form assembles (curl u, curl v), which equals the stiffness matrix.
[[nodiscard]] PoissonSolution solve_poisson_system(SpacePtr space, std::span<const double> load, PoissonForm form,
                                                   const SolverOptions& opts = {});

[[nodiscard]] FEFunction solve_poisson(MeshPtr mesh, int order, const Field& f, PoissonForm form = PoissonForm::grad,
                                       const SolverOptions& opts = {});

struct StokesOptions {
    int velocity_order = 2;
    int pressure_order = 1;
    double mass_coefficient = 0.0;       // (phi, psi) weight; 1 for the Brinkman block
    double stiffness_coefficient = 1.0;  // (grad phi, grad psi) weight; eps^2 for the Brinkman block
    bool mean_zero_pressure = true;      // false only for negative controls
    SolverOptions solver{};
    bool check_singular = true;
};

struct StokesSolution {
    FEFunction velocity;
    FEFunction pressure;
    StageInfo info;
};

/// a(phi, psi) + (div psi, p) = load(psi), (div phi, q) = 0, phi in H^1_0 and
/// p mean-zero, on the given spaces.
[[nodiscard]] StokesSolution solve_stokes_system(SpacePtr velocity, SpacePtr pressure, std::span<const double> load,
                                                 const StokesOptions& opts = {});

/// Stokes with load (rhs, psi).
[[nodiscard]] StokesSolution solve_stokes(MeshPtr mesh, const Field& rhs, const StokesOptions& opts = {});
[[nodiscard]] StokesSolution solve_stokes(MeshPtr mesh, const FEFunction& rhs, const StokesOptions& opts = {});

/// Delta^2 u = f: Poisson for w, Stokes for (phi, p) with load (curl w, psi),
/// Poisson for u with load (phi, curl chi). Fields: w, phi, p, u.
[[nodiscard]] DecoupledSolution solve_biharmonic_decoupled(MeshPtr mesh, const Field& f, const PipelineOptions& o = {});

/// eps^2 Delta^2 u - Delta u = f with the Brinkman middle block
/// (phi, psi) + eps^2 (grad phi, grad psi) + (div psi, p). Fields as above.
[[nodiscard]] DecoupledSolution solve_biharmonic_perturbed(MeshPtr mesh, const Field& f, double eps,
                                                           const PipelineOptions& o = {});

/// Delta^2 u = f through the HHJ splitting. Fields: w, p, u. sigma_h is the
/// combination sym curl p_h + pi w_h, evaluated by hhj_sigma_in_cell.
[[nodiscard]] DecoupledSolution solve_hhj_decoupled(MeshPtr mesh, const Field& f, const PipelineOptions& o = {});

/// sigma_h = (s11, s12, s22) at a point of cell c.
void hhj_sigma_in_cell(const DecoupledSolution& sol, std::size_t c, const std::array<double, 3>& lambda,
                       std::span<double> out);

/// -Delta^3 u = f: biharmonic solve for w, tensor Stokes for (Phi, r) with load
/// (bold curl phi_w, Psi), and a biharmonic solve for u whose Stokes load is
/// (Phi, bold curl psi). Fields: w and w/*, Phi, r, u/phi, u/p, u.
[[nodiscard]] DecoupledSolution solve_triharmonic_decoupled(MeshPtr mesh, const Field& f, const PipelineOptions& o = {});

/// Independent route for the eps = 0 limit: the Darcy block is solved through
/// its pressure Schur complement B M^-1 B^T with nested CG, then u follows
/// from the same outer Poisson solves. Returns u_h.
[[nodiscard]] FEFunction solve_mixed_poisson_reference(MeshPtr mesh, const Field& f, const PipelineOptions& o = {});

}  // namespace decouple
