#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "decouple/error.hpp"
#include "decouple/linalg.hpp"

namespace decouple {

namespace {

struct Augmented {
    std::size_t n = 0, m = 0, kx = 0, kp = 0;
    SparseMatrix a, b;
    std::vector<std::vector<double>> cx, cp;

    [[nodiscard]] std::size_t size() const { return n + m + kx + kp; }

    void apply(std::span<const double> z, std::span<double> y) const {
        const auto x = z.subspan(0, n);
        const auto p = z.subspan(n, m);
        auto yx = y.subspan(0, n);
        auto yp = y.subspan(n, m);
        a.multiply(x, yx);
        if (m > 0) {
            std::vector<double> btp(n);
            b.multiply_transpose(p, btp);
            axpy(1.0, btp, yx);
            b.multiply(x, yp);
        }
        for (std::size_t k = 0; k < kx; ++k) {
            axpy(z[n + m + k], cx[k], yx);
            y[n + m + k] = dot(cx[k], x);
        }
        for (std::size_t k = 0; k < kp; ++k) {
            axpy(z[n + m + kx + k], cp[k], yp);
            y[n + m + kx + k] = dot(cp[k], p);
        }
    }
};

double relative_residual(const Augmented& aug, std::span<const double> z, std::span<const double> rhs) {
    std::vector<double> r(aug.size());
    aug.apply(z, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
    const double bn = norm2(rhs);
    return bn == 0.0 ? norm2(r) : norm2(r) / bn;
}

}  // namespace

SaddleSolution solve_saddle(const BlockSaddleSystem& sys, const SaddleConstraints& constraints, const SaddleOptions& opts) {
    Augmented aug;
    aug.n = sys.a.rows();
    aug.m = sys.b.rows();
    if (sys.a.cols() != aug.n || sys.rhs_f.size() != aug.n) throw ShapeMismatch("solve_saddle: A block dimensions");
    if (aug.m > 0 && sys.b.cols() != aug.n) throw ShapeMismatch("solve_saddle: B block dimensions");
    if (sys.rhs_g.size() != aug.m) throw ShapeMismatch("solve_saddle: multiplier right-hand side length");
    for (const auto& row : constraints.primal.functional_rows) {
        if (row.size() != aug.n) throw ShapeMismatch("solve_saddle: primal constraint row length");
    }
    for (const auto& row : constraints.multiplier_rows) {
        if (row.size() != aug.m) throw ShapeMismatch("solve_saddle: multiplier constraint row length");
    }

    // Dirichlet elimination on the primal block.
    const auto& dd = constraints.primal.dirichlet_dofs;
    const auto& dv = constraints.primal.dirichlet_values;
    if (dd.size() != dv.size()) throw ShapeMismatch("solve_saddle: Dirichlet values");
    auto elim = apply_dirichlet(sys.a, sys.rhs_f, dd, dv);
    aug.a = std::move(elim.a);
    std::vector<char> fixed(aug.n, 0);
    std::vector<double> fixed_val(aug.n, 0.0);
    for (std::size_t k = 0; k < dd.size(); ++k) {
        fixed[static_cast<std::size_t>(dd[k])] = 1;
        fixed_val[static_cast<std::size_t>(dd[k])] = dv[k];
    }

    std::vector<double> rhs(aug.n + aug.m + constraints.primal.functional_rows.size() + constraints.multiplier_rows.size(), 0.0);
    std::copy(elim.b.begin(), elim.b.end(), rhs.begin());
    if (aug.m > 0) {
        std::vector<Triplet> t;
        const auto& off = sys.b.row_offsets();
        const auto& ci = sys.b.col_indices();
        const auto& vv = sys.b.values();
        for (std::size_t r = 0; r < aug.m; ++r) {
            double g = sys.rhs_g[r];
            for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
                const auto c = static_cast<std::size_t>(ci[k]);
                if (fixed[c]) g -= vv[k] * fixed_val[c];
                else t.push_back({static_cast<Index>(r), ci[k], vv[k]});
            }
            rhs[aug.n + r] = g;
        }
        aug.b = SparseMatrix::from_triplets(aug.m, aug.n, std::move(t));
    }
    for (const auto& row : constraints.primal.functional_rows) {
        std::vector<double> c = row;
        double h = 0.0;
        for (std::size_t j = 0; j < aug.n; ++j) {
            if (fixed[j]) {
                h -= c[j] * fixed_val[j];
                c[j] = 0.0;
            }
        }
        rhs[aug.n + aug.m + aug.cx.size()] = h;
        aug.cx.push_back(std::move(c));
    }
    aug.kx = aug.cx.size();
    aug.cp = constraints.multiplier_rows;
    aug.kp = aug.cp.size();

    // Block-diagonal preconditioner.
    std::vector<double> diag(aug.size(), 1.0);
    const auto da = aug.a.diagonal();
    for (std::size_t i = 0; i < aug.n; ++i) diag[i] = da[i] > 0.0 ? da[i] : 1.0;
    if (aug.m > 0) {
        if (!sys.multiplier_preconditioner.empty()) {
            if (sys.multiplier_preconditioner.size() != aug.m) throw ShapeMismatch("solve_saddle: multiplier preconditioner length");
            for (std::size_t i = 0; i < aug.m; ++i) diag[aug.n + i] = sys.multiplier_preconditioner[i];
        } else {
            const auto& off = aug.b.row_offsets();
            const auto& ci = aug.b.col_indices();
            const auto& vv = aug.b.values();
            for (std::size_t r = 0; r < aug.m; ++r) {
                double s = 0.0;
                for (std::size_t k = off[r]; k < off[r + 1]; ++k) s += vv[k] * vv[k] / diag[static_cast<std::size_t>(ci[k])];
                diag[aug.n + r] = s;
            }
        }
    }
    for (std::size_t k = 0; k < aug.kx; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < aug.n; ++j) s += aug.cx[k][j] * aug.cx[k][j] / diag[j];
        diag[aug.n + aug.m + k] = s;
    }
    for (std::size_t k = 0; k < aug.kp; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < aug.m; ++j) s += aug.cp[k][j] * aug.cp[k][j] / diag[aug.n + j];
        diag[aug.n + aug.m + aug.kx + k] = s;
    }
    const LinearOperator precond = diagonal_inverse(diag);
    const LinearOperator op = [&aug](std::span<const double> x, std::span<double> y) { aug.apply(x, y); };

    SolverOptions so = opts.solver;
    so.throw_on_failure = false;
    std::vector<double> z(aug.size(), 0.0);
    int total_its = 0;
    double true_rel = 0.0;
    SolveResult last;
    for (int attempt = 0; attempt < 6; ++attempt) {
        last = minres(op, rhs, so, precond, z);
        z = last.x;
        total_its += last.iterations;
        true_rel = relative_residual(aug, z, rhs);
        if (true_rel <= opts.solver.tol) break;
        if (last.stagnated && attempt > 0) break;
        so.tol *= 0.1;
        so.max_iterations = std::max(0, opts.solver.max_iterations - total_its);
        if (so.max_iterations == 0) break;
    }
    if (true_rel > opts.solver.tol) {
        std::ostringstream os;
        os << "solve_saddle: augmented residual " << true_rel << " above tolerance " << opts.solver.tol << " after "
           << total_its << " MINRES iterations";
        if (last.stagnated) {
            os << " (stagnation: the constraints leave a kernel or the pair is unstable)";
            throw NonConvergence(os.str(), true_rel, last.history, true);
        }
        throw NonConvergence(os.str(), true_rel, last.history);
    }

    if (opts.check_singular) {
        std::mt19937_64 rng(0x5eed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> probe(aug.size());
        for (auto& v : probe) v = dist(rng);
        SolverOptions po;
        po.tol = 1e-6;
        po.max_iterations = opts.solver.max_iterations;
        po.stagnation_window = opts.solver.stagnation_window;
        po.throw_on_failure = false;
        const auto pr = minres(op, probe, po, precond);
        if (!pr.converged) {
            std::ostringstream os;
            os << "solve_saddle: the constrained operator is singular (probe residual " << pr.relative_residual
               << (pr.stagnated ? " stagnated" : " did not converge") << " after " << pr.iterations
               << " iterations); a mean-zero or rigid-motion constraint is probably missing";
            throw SingularSystem(os.str());
        }
    }

    SaddleSolution out;
    out.primal.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(aug.n));
    out.multiplier.assign(z.begin() + static_cast<std::ptrdiff_t>(aug.n), z.begin() + static_cast<std::ptrdiff_t>(aug.n + aug.m));
    out.constraint_multipliers.assign(z.begin() + static_cast<std::ptrdiff_t>(aug.n + aug.m), z.end());
    out.iterations = total_its;
    out.relative_residual = true_rel;
    return out;
}

}  // namespace decouple
