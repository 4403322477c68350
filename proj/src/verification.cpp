#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "decouple/verification.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include "decouple/dense.hpp"
#include "decouple/error.hpp"
#include "decouple/quadrature.hpp"

namespace decouple {

const char* to_string(Norm n) noexcept {
    switch (n) {
        case Norm::l2: return "L2";
        case Norm::h1_semi: return "H1semi";
        case Norm::h1: return "H1";
    }
    return "unknown";
}

const char* to_string(GapKind g) noexcept {
    switch (g) {
        case GapKind::biharmonic_u: return "biharmonic_u";
        case GapKind::hhj_u: return "hhj_u";
        case GapKind::hhj_p: return "hhj_p";
    }
    return "unknown";
}

namespace {

/// Calls fn(weight, value_h, grad_h, x) at every degree-8 quadrature point.
template <class Fn>
void for_each_point(const FEFunction& uh, Fn&& fn) {
    const auto& s = uh.space();
    const auto& rule = quadrature_rule(kMaxQuadratureDegree);
    const auto nc = static_cast<std::size_t>(s.n_components());
    std::vector<double> v(nc), g(2 * nc);
    for (std::size_t c = 0; c < s.mesh().n_cells(); ++c) {
        const double det = std::abs(s.mesh().signed_double_area(c));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            uh.eval_in_cell(c, rule.points[q], v);
            uh.grad_in_cell(c, rule.points[q], g);
            fn(det * rule.weights[q], v, g, map_to_cell(s.mesh(), c, rule.points[q]));
        }
    }
}

void require_shape(const FEFunction& uh, const FieldJet& exact, bool need_gradient) {
    const int nc = uh.space().n_components();
    if (exact.value.n_components != nc) throw ShapeMismatch("error_norm: exact field has the wrong number of components");
    if (need_gradient && (!exact.gradient.eval || exact.gradient.n_components != 2 * nc)) {
        throw InvalidArgument("error_norm: the exact field provides no gradient");
    }
}

}  // namespace

double error_norm(const FEFunction& uh, const FieldJet& exact, Norm norm) {
    const bool need_grad = norm != Norm::l2;
    require_shape(uh, exact, need_grad);
    const auto& s = uh.space();
    const int nc = s.n_components();
    std::vector<double> ev(static_cast<std::size_t>(nc)), eg(static_cast<std::size_t>(2 * nc));
    double sum = 0.0;
    for_each_point(uh, [&](double w, std::span<const double> v, std::span<const double> g, const Point& x) {
        if (norm != Norm::h1_semi) {
            exact.value.eval(x, ev);
            for (int c = 0; c < nc; ++c) {
                const double d = v[static_cast<std::size_t>(c)] - ev[static_cast<std::size_t>(c)];
                sum += w * s.component_weight(c) * d * d;
            }
        }
        if (need_grad) {
            exact.gradient.eval(x, eg);
            for (int c = 0; c < nc; ++c) {
                for (int d = 0; d < 2; ++d) {
                    const auto k = static_cast<std::size_t>(2 * c + d);
                    const double e = g[k] - eg[k];
                    sum += w * s.component_weight(c) * e * e;
                }
            }
        }
    });
    return std::sqrt(sum);
}

double operator_error_norm(const FEFunction& uh, const FieldJet& exact, DiffOp op) {
    require_shape(uh, exact, op != DiffOp::value && op != DiffOp::pi);
    const auto shape = uh.space().shape();
    const auto size = static_cast<std::size_t>(op_size(op, shape));
    const auto nc = static_cast<std::size_t>(uh.space().n_components());
    std::vector<double> ev(nc), eg(2 * nc, 0.0), oh(size), oe(size);
    double sum = 0.0;
    for_each_point(uh, [&](double w, std::span<const double> v, std::span<const double> g, const Point& x) {
        exact.value.eval(x, ev);
        if (exact.gradient.eval) exact.gradient.eval(x, eg);
        apply_op(op, shape, v, g, oh);
        apply_op(op, shape, ev, eg, oe);
        for (std::size_t k = 0; k < size; ++k) sum += w * (oh[k] - oe[k]) * (oh[k] - oe[k]);
    });
    return std::sqrt(sum);
}

double discrete_norm(const FEFunction& vh, DiffOp op) {
    const auto shape = vh.space().shape();
    const auto size = static_cast<std::size_t>(op_size(op, shape));
    std::vector<double> o(size);
    double sum = 0.0;
    for_each_point(vh, [&](double w, std::span<const double> v, std::span<const double> g, const Point&) {
        apply_op(op, shape, v, g, o);
        for (double x : o) sum += w * x * x;
    });
    return std::sqrt(sum);
}

FEFunction difference(const FEFunction& a, const FEFunction& b) {
    if (a.space_ptr() != b.space_ptr() && (a.coeffs().size() != b.coeffs().size() || &a.space().mesh() != &b.space().mesh())) {
        throw ShapeMismatch("difference: functions live on different spaces");
    }
    std::vector<double> d(a.coeffs().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.coeffs()[i] - b.coeffs()[i];
    return FEFunction(a.space_ptr(), std::move(d));
}

FEFunction galerkin_projection(SpacePtr space, const FieldJet& exact, FormKind form, const ConstraintSet& constraints,
                               const SolverOptions& opts) {
    const auto [trial_op, test_op] = form_operators(form);
    if (trial_op != test_op) throw InvalidArgument("galerkin_projection: the form must be symmetric");
    if (constraints.empty() && form != FormKind::mass) {
        throw SingularSystem(std::string("galerkin_projection: ") + to_string(form) +
                             " has a kernel; boundary or functional constraints are required");
    }
    const SparseMatrix a = assemble_bilinear(form, *space, *space);
    const auto rhs = assemble_projection_load(trial_op, *space, exact);
    if (constraints.functional_rows.empty()) {
        const auto& dv = constraints.dirichlet_values;
        const std::vector<double> zeros(constraints.dirichlet_dofs.size(), 0.0);
        const auto sys = apply_dirichlet(a, rhs, constraints.dirichlet_dofs, dv.empty() ? std::span<const double>(zeros) : dv);
        return FEFunction(space, cg(sys.a, sys.b, opts).x);
    }
    BlockSaddleSystem sys;
    sys.a = a;
    sys.b = SparseMatrix(0, space->n_dofs());
    sys.rhs_f = rhs;
    SaddleConstraints cons;
    cons.primal = constraints;
    if (cons.primal.dirichlet_values.empty()) cons.primal.dirichlet_values.assign(cons.primal.dirichlet_dofs.size(), 0.0);
    return FEFunction(space, solve_saddle(sys, cons, {opts, false}).primal);
}

double superconvergence_gap(const DecoupledSolution& sol, const ManufacturedCase& mcase, GapKind which,
                            const SolverOptions& opts) {
    if (which == GapKind::hhj_p) {
        const auto& ph = sol.field("p");
        ConstraintSet cons;
        for (auto& row : rigid_motion_constraints(ph.space(), RigidMotionVariant::rm_rot)) {
            cons.functional_rows.push_back(std::move(row));
        }
        const auto proj = galerkin_projection(ph.space_ptr(), mcase.field("p"), FormKind::symcurl, cons, opts);
        return discrete_norm(difference(proj, ph), DiffOp::symcurl);
    }
    const auto& uh = sol.field("u");
    const auto proj = galerkin_projection(uh.space_ptr(), mcase.field("u"), FormKind::stiffness,
                                          homogeneous_dirichlet(uh.space()), opts);
    return discrete_norm(difference(proj, uh), DiffOp::grad);
}

double fit_rate(std::span<const double> h, std::span<const double> errors) {
    if (h.size() != errors.size() || h.size() < 2) throw InvalidArgument("fit_rate: need at least two (h, error) pairs");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(errors[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double x = std::log(h[i]), y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool ConvergenceReport::passed() const {
    if (verdicts.size() < expected.size()) return false;
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second; });
}

void finalize_report(ConvergenceReport& r) {
    r.rates.clear();
    r.verdicts.clear();
    if (r.levels.size() >= 2) {
        const std::size_t first = r.levels.size() >= 3 ? r.levels.size() - 3 : 0;
        for (const auto& [name, _] : r.levels.back().errors) {
            std::vector<double> hs, es;
            for (std::size_t l = first; l < r.levels.size(); ++l) {
                auto it = r.levels[l].errors.find(name);
                if (it == r.levels[l].errors.end()) break;
                hs.push_back(r.levels[l].h);
                es.push_back(it->second);
            }
            if (hs.size() == r.levels.size() - first) r.rates[name] = fit_rate(hs, es);
        }
    }
    for (const auto& [name, e] : r.expected) {
        auto it = r.rates.find(name);
        bool ok = it != r.rates.end() && std::isfinite(it->second);
        double target = e.target;
        if (ok && !e.relative_to.empty()) {
            auto base = r.rates.find(e.relative_to);
            ok = base != r.rates.end() && std::isfinite(base->second);
            if (ok) target += base->second;
        }
        if (ok) {
            ok = e.mode == RateExpectation::Mode::within ? std::abs(it->second - target) <= e.tolerance
                                                         : it->second >= target - e.tolerance;
        }
        r.verdicts[name] = ok;
    }
}

ConvergenceReport convergence_study(const std::string& problem, const Mesh& base, int n_levels, const LevelRunner& runner,
                                    std::map<std::string, RateExpectation> expected, int jobs) {
    if (n_levels < 3) throw InvalidArgument("convergence_study: at least 3 levels are required");
    std::vector<MeshPtr> meshes;
    meshes.push_back(std::make_shared<const Mesh>(base));
    for (int l = 1; l < n_levels; ++l) meshes.push_back(std::make_shared<const Mesh>(refine_uniform(*meshes.back())));

    ConvergenceReport r;
    r.problem = problem;
    r.expected = std::move(expected);
    r.levels.resize(meshes.size());
    for (std::size_t l = 0; l < meshes.size(); ++l) {
        r.levels[l].level = static_cast<int>(l);
        r.levels[l].h = mesh_size(*meshes[l]);
        r.levels[l].n_cells = meshes[l]->n_cells();
    }
    auto run_one = [&](std::size_t l) {
        try {
            runner(meshes[l], r.levels[l]);
        } catch (const Error& e) {
            std::ostringstream os;
            os << "level " << l << " (" << meshes[l]->n_cells() << " cells): " << e.what();
            if (e.code() == "stagnation" || e.code() == "nonconvergence") {
                throw NonConvergence(os.str(), 0.0, {}, e.code() == "stagnation");
            }
            throw Error(e.code(), os.str());
        }
    };
    if (jobs <= 1) {
        for (std::size_t l = 0; l < meshes.size(); ++l) run_one(l);
    } else {
        // Largest levels first so the batch finishes together.
        std::vector<std::future<void>> pending;
        for (std::size_t k = meshes.size(); k-- > 0;) {
            pending.push_back(std::async(std::launch::async, run_one, k));
            if (pending.size() >= static_cast<std::size_t>(jobs)) {
                for (auto& f : pending) f.get();
                pending.clear();
            }
        }
        for (auto& f : pending) f.get();
    }
    r.notes.push_back("rates are least-squares slopes of log(error) against log(h) over the last 3 levels");
    finalize_report(r);
    return r;
}

bool CheckReport::passed() const {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.passed; });
}

const CheckItem* CheckReport::first_failure() const {
    for (const auto& i : items) {
        if (!i.passed) return &i;
    }
    return nullptr;
}

namespace {

dense::Matrix to_dense_matrix(const SparseMatrix& a) {
    dense::Matrix d(a.rows(), a.cols());
    const auto& off = a.row_offsets();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
            d(r, static_cast<std::size_t>(a.col_indices()[k])) = a.values()[k];
        }
    }
    return d;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace

int kernel_dimension(const FunctionSpace& space, FormKind form, int probe, double rel_tol) {
    const auto a = to_dense_matrix(assemble_bilinear(form, space, space));
    const auto m = to_dense_matrix(assemble_bilinear(FormKind::mass, space, space));
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(probe), space.n_dofs());
    const auto ev = dense::lowest_generalized_eigenvalues(a, m, count, 1.0);
    const double scale = std::max(1.0, std::abs(ev.back()));
    return static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](double l) { return std::abs(l) < rel_tol * scale; }));
}

CheckReport exactness_check(MeshPtr mesh, int order, std::uint64_t seed) {
    CheckReport rep;
    std::mt19937_64 rng(seed);
    auto v = build_space(mesh, order, ValueShape::scalar);
    const FEFunction vh(v, random_vector(v->n_dofs(), rng));
    const auto& rule = quadrature_rule(kMaxQuadratureDegree);
    double div_curl = 0.0, rot_grad = 0.0;
    double hess[4];
    for (std::size_t c = 0; c < mesh->n_cells(); ++c) {
        for (const auto& l : rule.points) {
            vh.hessian_in_cell(c, l, hess);
            // curl v = (d2 v, -d1 v): div = d1 d2 v - d2 d1 v
            div_curl = std::max(div_curl, std::abs(hess[0 * 2 + 1] - hess[1 * 2 + 0]));
            // grad v = (d1 v, d2 v): rot = d1 (d2 v) - d2 (d1 v)
            rot_grad = std::max(rot_grad, std::abs(-hess[1 * 2 + 0] + hess[0 * 2 + 1]));
        }
    }
    rep.items.push_back({"div_curl_zero", div_curl <= 1e-12, div_curl, 1e-12, "max |div curl v_h| over quadrature points"});
    rep.items.push_back({"rot_grad_zero", rot_grad <= 1e-12, rot_grad, 1e-12, "max |rot grad v_h| over quadrature points"});

    auto q = build_space(mesh, order, ValueShape::vector2);
    const int k_symcurl = kernel_dimension(*q, FormKind::symcurl);
    rep.items.push_back({"symcurl_kernel_dim", k_symcurl == 3, static_cast<double>(k_symcurl), 3.0,
                         "dimension of the kernel of (sym curl p, sym curl q), expected RM^rot"});
    const int k_stiff = kernel_dimension(*v, FormKind::stiffness);
    rep.items.push_back({"stiffness_kernel_dim", k_stiff == 1, static_cast<double>(k_stiff), 1.0,
                         "dimension of the kernel of (grad u, grad v) without boundary conditions"});
    return rep;
}

CheckReport helmholtz_recompose_check(MeshPtr mesh, int order, std::uint64_t seed, bool zero_p, bool zero_w) {
    CheckReport rep;
    std::mt19937_64 rng(seed);
    auto ps = build_space(mesh, order, ValueShape::scalar);
    auto vs = build_space(mesh, order, ValueShape::scalar);

    std::vector<double> p = random_vector(ps->n_dofs(), rng);
    std::vector<double> w = random_vector(vs->n_dofs(), rng);
    const auto mean_row = mean_zero_constraint(*ps);
    {
        const double mean = dot(mean_row, p) / mesh_area(*mesh);
        for (auto& x : p) x -= mean;  // Lagrange bases sum to one
    }
    for (auto d : dirichlet_dofs(*vs)) w[static_cast<std::size_t>(d)] = 0.0;
    if (zero_p) std::fill(p.begin(), p.end(), 0.0);
    if (zero_w) std::fill(w.begin(), w.end(), 0.0);

    SolverOptions so;
    so.tol = 1e-13;
    const SparseMatrix kpp = assemble_bilinear(FormKind::stiffness, *ps, *ps);
    const SparseMatrix kvv = assemble_bilinear(FormKind::curl_curl, *vs, *vs);
    const SparseMatrix curl_grad = assemble_operators(DiffOp::curl, DiffOp::grad, *vs, *ps);  // rows P, cols V
    const SparseMatrix grad_curl = assemble_operators(DiffOp::grad, DiffOp::curl, *ps, *vs);  // rows V, cols P

    // (i) (grad p^, grad q) = (tau, grad q), mean(p^) = 0
    BlockSaddleSystem sys;
    sys.a = kpp;
    sys.b = SparseMatrix(0, ps->n_dofs());
    sys.rhs_f = kpp * std::span<const double>(p);
    axpy(1.0, curl_grad * std::span<const double>(w), sys.rhs_f);
    SaddleConstraints cons;
    cons.primal.functional_rows.push_back(mean_row);
    const auto p_hat = solve_saddle(sys, cons, {so, false}).primal;

    // (ii) (curl w^, curl chi) = (tau - grad p^, curl chi), w^ in H^1_0
    std::vector<double> dp(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) dp[i] = p[i] - p_hat[i];
    auto rhs = kvv * std::span<const double>(w);
    axpy(1.0, grad_curl * std::span<const double>(dp), rhs);
    const auto bdofs = dirichlet_dofs(*vs);
    const std::vector<double> zeros(bdofs.size(), 0.0);
    const auto ds = apply_dirichlet(kvv, rhs, bdofs, zeros);
    const auto w_hat = cg(ds.a, ds.b, so).x;

    std::vector<double> dw(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) dw[i] = w[i] - w_hat[i];
    const FEFunction ep(ps, dp), ew(vs, dw), tp(ps, p), tw(vs, w);
    const auto& rule = quadrature_rule(kMaxQuadratureDegree);
    double res2 = 0.0, tau2 = 0.0;
    double gp[2], gw[2], tgp[2], tgw[2];
    for (std::size_t c = 0; c < mesh->n_cells(); ++c) {
        const double det = std::abs(mesh->signed_double_area(c));
        for (std::size_t k = 0; k < rule.size(); ++k) {
            ep.grad_in_cell(c, rule.points[k], gp);
            ew.grad_in_cell(c, rule.points[k], gw);
            tp.grad_in_cell(c, rule.points[k], tgp);
            tw.grad_in_cell(c, rule.points[k], tgw);
            // grad e_p + curl e_w with curl = (d2, -d1)
            const double r0 = gp[0] + gw[1], r1 = gp[1] - gw[0];
            const double t0 = tgp[0] + tgw[1], t1 = tgp[1] - tgw[0];
            res2 += det * rule.weights[k] * (r0 * r0 + r1 * r1);
            tau2 += det * rule.weights[k] * (t0 * t0 + t1 * t1);
        }
    }
    const double residual = std::sqrt(res2);
    rep.items.push_back({"helmholtz_residual", residual <= 1e-8, residual, 1e-8,
                         "||tau_h - grad p^ - curl w^||_0, ||tau_h||_0 = " + std::to_string(std::sqrt(tau2))});
    CheckItem pi{"helmholtz_grad_part", true, discrete_norm(ep, DiffOp::grad), 0.0, "||grad(p_h - p^)||_0 (recorded)"};
    CheckItem wi{"helmholtz_curl_part", true, discrete_norm(ew, DiffOp::grad), 0.0, "|w_h - w^|_1 (recorded)"};
    rep.items.push_back(pi);
    rep.items.push_back(wi);
    return rep;
}

InfSupEstimate estimate_infsup(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& pressure_mass,
                               std::span<const Index> velocity_dirichlet) {
    InfSupEstimate est;
    est.n_velocity = a.rows();
    est.n_pressure = b.rows();
    const std::size_t m = b.rows();
    if (m < 2 || est.n_velocity <= velocity_dirichlet.size()) {
        est.skipped = true;
        est.note = "too few free velocity or pressure dofs for a meaningful estimate";
        return est;
    }
    std::vector<char> fixed(a.rows(), 0);
    for (auto d : velocity_dirichlet) fixed[static_cast<std::size_t>(d)] = 1;
    const std::vector<double> zero_b(a.rows(), 0.0), zeros(velocity_dirichlet.size(), 0.0);
    const auto elim = apply_dirichlet(a, zero_b, velocity_dirichlet, zeros);
    const SparseMatrix bt = b.transpose();

    // S = B A^-1 B^T column by column with one sparse Cholesky factorization of A.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(elim.a.nnz());
    const auto& off = elim.a.row_offsets();
    for (std::size_t r = 0; r < elim.a.rows(); ++r) {
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
            trip.emplace_back(Eigen::Index(r), Eigen::Index(elim.a.col_indices()[k]), elim.a.values()[k]);
        }
    }
    Eigen::SparseMatrix<double> ae(Eigen::Index(a.rows()), Eigen::Index(a.rows()));
    ae.setFromTriplets(trip.begin(), trip.end());
    const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(ae);
    if (llt.info() != Eigen::Success) throw SingularSystem("estimate_infsup: velocity operator is not positive definite");

    dense::Matrix s(m, m);
    std::vector<double> e(m, 0.0), col(a.rows()), x(a.rows());
    for (std::size_t j = 0; j < m; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        bt.multiply(e, col);
        for (std::size_t i = 0; i < col.size(); ++i) {
            if (fixed[i]) col[i] = 0.0;
        }
        if (norm2(col) == 0.0) continue;
        Eigen::Map<Eigen::VectorXd>(x.data(), Eigen::Index(x.size())) =
            llt.solve(Eigen::Map<const Eigen::VectorXd>(col.data(), Eigen::Index(col.size())));
        const auto sx = b * std::span<const double>(x);
        for (std::size_t i = 0; i < m; ++i) s(i, j) = sx[i];
    }
    const auto ev = dense::generalized_eigenvalues(s, to_dense_matrix(pressure_mass));
    const double zero_tol = 1e-10 * std::max(ev.back(), 1e-300);
    est.kernel_dim = static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](double l) { return l < zero_tol; }));
    est.beta = std::sqrt(std::max(0.0, ev[1]));
    est.beta_quotient =
        est.kernel_dim < static_cast<int>(m) ? std::sqrt(std::max(0.0, ev[static_cast<std::size_t>(est.kernel_dim)])) : 0.0;
    if (est.kernel_dim > 1) {
        est.note = std::to_string(est.kernel_dim - 1) + " spurious pressure modes beyond the constants";
    }
    return est;
}

InfSupEstimate estimate_infsup(MeshPtr mesh, int velocity_order, int pressure_order) {
    auto x = build_space(mesh, velocity_order, ValueShape::vector2);
    auto p = build_space(mesh, pressure_order, ValueShape::scalar);
    const auto a = assemble_bilinear(FormKind::stiffness, *x, *x);
    const auto b = assemble_bilinear(FormKind::div_pressure, *x, *p);
    const auto mp = assemble_bilinear(FormKind::mass, *p, *p);
    const auto dofs = dirichlet_dofs(*x);
    return estimate_infsup(a, b, mp, dofs);
}

}  // namespace decouple
