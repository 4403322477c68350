#include "decouple/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "decouple/conventions.hpp"
#include "decouple/error.hpp"

namespace decouple {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> operator_times(const SparseMatrix& a, std::span<const double> x) { return a * x; }

std::vector<double> transpose_times(const SparseMatrix& a, std::span<const double> x) {
    std::vector<double> y(a.cols());
    a.multiply_transpose(x, y);
    return y;
}

void put(DecoupledSolution& sol, const std::string& name, FEFunction f) {
    sol.fields.insert_or_assign(name, std::move(f));
}

std::string join(const std::string& prefix, const std::string& name) {
    return prefix.empty() ? name : prefix + "/" + name;
}

StokesOptions stokes_options(const PipelineOptions& o, double mass, double stiffness) {
    StokesOptions s;
    s.velocity_order = o.velocity_order;
    s.pressure_order = o.pressure_order;
    s.mass_coefficient = mass;
    s.stiffness_coefficient = stiffness;
    s.solver = o.solver;
    s.check_singular = o.check_singular;
    return s;
}

struct BiharmonicSpaces {
    SpacePtr v, x, p;
    SparseMatrix curlcouple;  // rows X, cols V

    BiharmonicSpaces(const MeshPtr& mesh, const PipelineOptions& o)
        : v(build_space(mesh, o.scalar_order, ValueShape::scalar)),
          x(build_space(mesh, o.velocity_order, ValueShape::vector2)),
          p(build_space(mesh, o.pressure_order, ValueShape::scalar)),
          curlcouple(assemble_bilinear(FormKind::curlcouple, *v, *x)) {}
};

/// Stokes stage with a given load followed by the final Poisson solve for u.
void biharmonic_from_stokes_load(const BiharmonicSpaces& s, std::span<const double> load, const PipelineOptions& o,
                                 double mass, double stiffness, const std::string& prefix, DecoupledSolution& sol) {
    auto st = solve_stokes_system(s.x, s.p, load, stokes_options(o, mass, stiffness));
    st.info.name = join(prefix, "stokes");
    sol.stages.push_back(st.info);
    const auto u_load = transpose_times(s.curlcouple, st.velocity.coeffs());
    auto u = solve_poisson_system(s.v, u_load, PoissonForm::curl, o.solver);
    u.info.name = join(prefix, "poisson_u");
    sol.stages.push_back(u.info);
    put(sol, join(prefix, "phi"), std::move(st.velocity));
    put(sol, join(prefix, "p"), std::move(st.pressure));
    put(sol, prefix.empty() ? "u" : prefix, std::move(u.u));
}

void biharmonic_pipeline(const BiharmonicSpaces& s, const Field& f, const PipelineOptions& o, double mass,
                         double stiffness, const std::string& prefix, DecoupledSolution& sol) {
    const auto load = assemble_load(*s.v, f);
    auto w = solve_poisson_system(s.v, load, PoissonForm::curl, o.solver);
    w.info.name = join(prefix, "poisson_w");
    sol.stages.push_back(w.info);
    const auto stokes_load = operator_times(s.curlcouple, w.u.coeffs());
    put(sol, join(prefix, "w"), std::move(w.u));
    biharmonic_from_stokes_load(s, stokes_load, o, mass, stiffness, prefix, sol);
}

}  // namespace

const FEFunction& DecoupledSolution::field(const std::string& name) const {
    auto it = fields.find(name);
    if (it == fields.end()) throw InvalidArgument("DecoupledSolution: no stage field named '" + name + "'");
    return it->second;
}

int DecoupledSolution::total_iterations() const {
    int n = 0;
    for (const auto& s : stages) n += s.iterations;
    return n;
}

double DecoupledSolution::max_relative_residual() const {
    double r = 0.0;
    for (const auto& s : stages) r = std::max(r, s.relative_residual);
    return r;
}

void validate(const PipelineOptions& o) {
    auto check = [](int k, int lo, int hi, const char* what) {
        if (k < lo || k > hi) {
            std::ostringstream os;
            os << what << " order " << k << " outside the supported range [" << lo << ", " << hi << "]";
            throw InvalidArgument(os.str());
        }
    };
    check(o.scalar_order, 1, 3, "scalar");
    check(o.velocity_order, 1, 3, "velocity");
    check(o.pressure_order, 1, 3, "pressure");
    if (!(o.solver.tol > 0.0) || o.solver.tol >= 1.0) throw InvalidArgument("tolerance must lie in (0, 1)");
    if (o.solver.max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
}

PoissonSolution solve_poisson_system(SpacePtr space, std::span<const double> load, PoissonForm form,
                                     const SolverOptions& opts) {
    if (space->shape() != ValueShape::scalar) throw ShapeMismatch("solve_poisson: scalar space required");
    if (load.size() != space->n_dofs()) throw ShapeMismatch("solve_poisson: load length differs from the space");
    const auto t0 = Clock::now();
    const SparseMatrix a = assemble_bilinear(form == PoissonForm::grad ? FormKind::stiffness : FormKind::curl_curl, *space, *space);
    const auto dofs = dirichlet_dofs(*space);
    const std::vector<double> zeros(dofs.size(), 0.0);
    const auto sys = apply_dirichlet(a, load, dofs, zeros);
    auto res = cg(sys.a, sys.b, opts);
    PoissonSolution out{FEFunction(space, std::move(res.x)), {}};
    out.info = {"poisson", space->n_dofs(), res.iterations, res.relative_residual, seconds_since(t0)};
    return out;
}

FEFunction solve_poisson(MeshPtr mesh, int order, const Field& f, PoissonForm form, const SolverOptions& opts) {
    auto space = build_space(std::move(mesh), order, ValueShape::scalar);
    const auto load = assemble_load(*space, f);
    return solve_poisson_system(space, load, form, opts).u;
}

StokesSolution solve_stokes_system(SpacePtr velocity, SpacePtr pressure, std::span<const double> load,
                                   const StokesOptions& opts) {
    if (velocity->shape() != ValueShape::vector2 || pressure->shape() != ValueShape::scalar) {
        throw ShapeMismatch("solve_stokes: vector velocity and scalar pressure spaces required");
    }
    if (load.size() != velocity->n_dofs()) throw ShapeMismatch("solve_stokes: load length differs from the velocity space");
    if (opts.mass_coefficient < 0.0 || opts.stiffness_coefficient < 0.0 ||
        opts.mass_coefficient + opts.stiffness_coefficient == 0.0) {
        throw InvalidArgument("solve_stokes: coefficients must be nonnegative and not both zero");
    }
    const auto t0 = Clock::now();
    BlockSaddleSystem sys;
    if (opts.mass_coefficient == 0.0) {
        sys.a = assemble_bilinear(FormKind::stiffness, *velocity, *velocity, opts.stiffness_coefficient);
    } else if (opts.stiffness_coefficient == 0.0) {
        sys.a = assemble_bilinear(FormKind::mass, *velocity, *velocity, opts.mass_coefficient);
    } else {
        sys.a = SparseMatrix::add(assemble_bilinear(FormKind::mass, *velocity, *velocity), opts.mass_coefficient,
                                  assemble_bilinear(FormKind::stiffness, *velocity, *velocity), opts.stiffness_coefficient);
    }
    sys.b = assemble_bilinear(FormKind::div_pressure, *velocity, *pressure);
    sys.rhs_f.assign(load.begin(), load.end());
    sys.rhs_g.assign(pressure->n_dofs(), 0.0);
    // Pure Stokes: the pressure Schur complement is spectrally a mass matrix.
    if (opts.mass_coefficient == 0.0) {
        sys.multiplier_preconditioner = assemble_bilinear(FormKind::mass, *pressure, *pressure).diagonal();
        for (auto& d : sys.multiplier_preconditioner) d /= opts.stiffness_coefficient;
    }

    SaddleConstraints cons;
    cons.primal = homogeneous_dirichlet(*velocity);
    if (opts.mean_zero_pressure) cons.multiplier_rows.push_back(mean_zero_constraint(*pressure));
    SaddleOptions so{opts.solver, opts.check_singular};
    auto res = solve_saddle(sys, cons, so);

    for (double& v : res.multiplier) v *= conventions::stokes_pressure_sign;
    StokesSolution out{FEFunction(velocity, std::move(res.primal)), FEFunction(pressure, std::move(res.multiplier)), {}};
    out.info = {"stokes", velocity->n_dofs() + pressure->n_dofs(), res.iterations, res.relative_residual, seconds_since(t0)};
    return out;
}

StokesSolution solve_stokes(MeshPtr mesh, const Field& rhs, const StokesOptions& opts) {
    auto x = build_space(mesh, opts.velocity_order, ValueShape::vector2);
    auto p = build_space(mesh, opts.pressure_order, ValueShape::scalar);
    const auto load = assemble_load(*x, rhs);
    return solve_stokes_system(x, p, load, opts);
}

StokesSolution solve_stokes(MeshPtr mesh, const FEFunction& rhs, const StokesOptions& opts) {
    if (rhs.space().shape() != ValueShape::vector2) throw ShapeMismatch("solve_stokes: vector right-hand side required");
    if (&rhs.space().mesh() != mesh.get()) throw InvalidArgument("solve_stokes: right-hand side lives on another mesh");
    auto x = build_space(mesh, opts.velocity_order, ValueShape::vector2);
    auto p = build_space(mesh, opts.pressure_order, ValueShape::scalar);
    const auto load = assemble_bilinear(FormKind::mass, rhs.space(), *x) * std::span<const double>(rhs.coeffs());
    return solve_stokes_system(x, p, load, opts);
}

DecoupledSolution solve_biharmonic_decoupled(MeshPtr mesh, const Field& f, const PipelineOptions& o) {
    validate(o);
    const BiharmonicSpaces s(mesh, o);
    DecoupledSolution sol;
    biharmonic_pipeline(s, f, o, 0.0, 1.0, "", sol);
    return sol;
}

DecoupledSolution solve_biharmonic_perturbed(MeshPtr mesh, const Field& f, double eps, const PipelineOptions& o) {
    validate(o);
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("perturbation parameter must be a finite eps >= 0");
    const BiharmonicSpaces s(mesh, o);
    DecoupledSolution sol;
    biharmonic_pipeline(s, f, o, 1.0, eps * eps, "", sol);
    return sol;
}

DecoupledSolution solve_hhj_decoupled(MeshPtr mesh, const Field& f, const PipelineOptions& o) {
    validate(o);
    auto v = build_space(mesh, o.scalar_order, ValueShape::scalar);
    auto q = build_space(mesh, o.velocity_order, ValueShape::vector2);
    DecoupledSolution sol;

    auto load = assemble_load(*v, f);
    for (auto& b : load) b *= conventions::hhj_poisson_load_sign;
    auto w = solve_poisson_system(v, load, PoissonForm::grad, o.solver);
    w.info.name = "poisson_w";
    sol.stages.push_back(w.info);

    const auto t0 = Clock::now();
    const SparseMatrix tpi = assemble_bilinear(FormKind::trace_pi, *v, *q);  // rows Q, cols V
    BlockSaddleSystem sys;
    sys.a = assemble_bilinear(FormKind::symcurl, *q, *q);
    sys.b = SparseMatrix(0, q->n_dofs());
    sys.rhs_f = tpi * std::span<const double>(w.u.coeffs());
    for (auto& b : sys.rhs_f) b *= conventions::hhj_symcurl_load_sign;
    SaddleConstraints cons;
    for (auto& row : rigid_motion_constraints(*q, RigidMotionVariant::rm_rot)) cons.primal.functional_rows.push_back(std::move(row));
    const auto res = solve_saddle(sys, cons, {o.solver, o.check_singular});
    sol.stages.push_back({"symcurl_p", q->n_dofs(), res.iterations, res.relative_residual, seconds_since(t0)});
    FEFunction p(q, res.primal);

    // (sigma_h, pi chi) = (sym curl p_h, pi chi) + sign (pi w_h, pi chi), with (pi w, pi chi) = 2 (w, chi).
    auto u_load = transpose_times(tpi, p.coeffs());
    const auto mw = assemble_bilinear(FormKind::mass, *v, *v) * std::span<const double>(w.u.coeffs());
    for (std::size_t i = 0; i < u_load.size(); ++i) {
        u_load[i] = conventions::hhj_final_load_sign * (u_load[i] + 2.0 * conventions::hhj_sigma_pi_sign * mw[i]);
    }
    auto u = solve_poisson_system(v, u_load, PoissonForm::grad, o.solver);
    u.info.name = "poisson_u";
    sol.stages.push_back(u.info);

    put(sol, "w", std::move(w.u));
    put(sol, "p", std::move(p));
    put(sol, "u", std::move(u.u));
    return sol;
}

void hhj_sigma_in_cell(const DecoupledSolution& sol, std::size_t c, const std::array<double, 3>& lambda,
                       std::span<double> out) {
    const auto& p = sol.field("p");
    const auto& w = sol.field("w");
    double wv[1], pv[2], pg[4], full[4];
    w.eval_in_cell(c, lambda, wv);
    p.eval_in_cell(c, lambda, pv);
    p.grad_in_cell(c, lambda, pg);
    apply_op(DiffOp::symcurl, ValueShape::vector2, pv, pg, full);
    out[0] = full[0] + conventions::hhj_sigma_pi_sign * wv[0];
    out[1] = full[1];
    out[2] = full[3] + conventions::hhj_sigma_pi_sign * wv[0];
}

DecoupledSolution solve_triharmonic_decoupled(MeshPtr mesh, const Field& f, const PipelineOptions& o) {
    validate(o);
    const BiharmonicSpaces s(mesh, o);
    DecoupledSolution sol;

    Field inner_f = f;
    if (conventions::triharmonic_inner_load_sign != 1.0) {
        inner_f.eval = [g = f.eval](const Point& x, std::span<double> out) {
            g(x, out);
            for (auto& v : out) v *= conventions::triharmonic_inner_load_sign;
        };
    }
    biharmonic_pipeline(s, inner_f, o, 0.0, 1.0, "w", sol);

    const auto t0 = Clock::now();
    auto xt = build_space(mesh, o.velocity_order, ValueShape::symtensor2);
    auto r = build_space(mesh, o.pressure_order, ValueShape::vector2);
    const SparseMatrix g = assemble_bilinear(FormKind::boldcurl_couple, *s.x, *xt);  // rows XT, cols X
    BlockSaddleSystem sys;
    sys.a = assemble_bilinear(FormKind::stiffness, *xt, *xt);
    sys.b = assemble_bilinear(FormKind::div_pressure, *xt, *r);
    sys.rhs_f = g * std::span<const double>(sol.field("w/phi").coeffs());
    sys.rhs_g.assign(r->n_dofs(), 0.0);
    sys.multiplier_preconditioner = assemble_bilinear(FormKind::mass, *r, *r).diagonal();
    SaddleConstraints cons;
    cons.primal = homogeneous_dirichlet(*xt);
    for (auto& row : rigid_motion_constraints(*r, RigidMotionVariant::rm)) cons.multiplier_rows.push_back(std::move(row));
    auto res = solve_saddle(sys, cons, {o.solver, o.check_singular});
    sol.stages.push_back({"tensor_stokes", xt->n_dofs() + r->n_dofs(), res.iterations, res.relative_residual,
                          seconds_since(t0)});
    FEFunction phi_t(xt, std::move(res.primal));
    FEFunction r_h(r, std::move(res.multiplier));

    const auto load = transpose_times(g, phi_t.coeffs());
    put(sol, "Phi", std::move(phi_t));
    put(sol, "r", std::move(r_h));
    biharmonic_from_stokes_load(s, load, o, 0.0, 1.0, "u", sol);
    return sol;
}

FEFunction solve_mixed_poisson_reference(MeshPtr mesh, const Field& f, const PipelineOptions& o) {
    validate(o);
    const BiharmonicSpaces s(mesh, o);
    const auto load = assemble_load(*s.v, f);
    auto w = solve_poisson_system(s.v, load, PoissonForm::grad, o.solver);
    const auto rhs_x = operator_times(s.curlcouple, w.u.coeffs());

    const auto dofs = dirichlet_dofs(*s.x);
    const std::vector<double> zeros(dofs.size(), 0.0);
    const auto mass = apply_dirichlet(assemble_bilinear(FormKind::mass, *s.x, *s.x), rhs_x, dofs, zeros);
    std::vector<char> fixed(s.x->n_dofs(), 0);
    for (auto d : dofs) fixed[static_cast<std::size_t>(d)] = 1;
    const SparseMatrix b = assemble_bilinear(FormKind::div_pressure, *s.x, *s.p);

    SolverOptions inner = o.solver;
    inner.tol = std::min(1e-13, o.solver.tol * 1e-2);
    auto mass_solve = [&](std::span<const double> rhs) {
        std::vector<double> r(rhs.begin(), rhs.end());
        for (std::size_t i = 0; i < r.size(); ++i) if (fixed[i]) r[i] = 0.0;
        return cg(mass.a, r, inner).x;
    };
    auto schur = [&](std::span<const double> q) { return b * std::span<const double>(mass_solve(transpose_times(b, q))); };

    // Unpreconditioned CG on the consistent singular system S p = B M^-1 F.
    const auto g = b * std::span<const double>(mass_solve(mass.b));
    const std::size_t m = g.size();
    std::vector<double> p(m, 0.0), res = g, dir = g;
    const double gnorm = norm2(g);
    double rr = dot(res, res);
    for (int it = 0; it < o.solver.max_iterations && std::sqrt(rr) > o.solver.tol * 1e-1 * gnorm; ++it) {
        const auto sd = schur(dir);
        const double alpha = rr / dot(dir, sd);
        axpy(alpha, dir, p);
        axpy(-alpha, sd, res);
        const double rr_new = dot(res, res);
        for (std::size_t i = 0; i < m; ++i) dir[i] = res[i] + rr_new / rr * dir[i];
        rr = rr_new;
    }
    if (gnorm > 0.0 && std::sqrt(rr) > o.solver.tol * gnorm) {
        throw NonConvergence("mixed Poisson reference: Schur complement CG did not converge", std::sqrt(rr) / gnorm, {});
    }
    auto fx = mass.b;
    const auto btp = transpose_times(b, p);
    for (std::size_t i = 0; i < fx.size(); ++i) fx[i] -= btp[i];
    const FEFunction phi(s.x, mass_solve(fx));
    const auto u_load = transpose_times(s.curlcouple, phi.coeffs());
    return solve_poisson_system(s.v, u_load, PoissonForm::grad, o.solver).u;
}

}  // namespace decouple
