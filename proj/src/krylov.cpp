#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "decouple/error.hpp"
#include "decouple/linalg.hpp"

namespace decouple {

LinearOperator as_operator(const SparseMatrix& a) {
    return [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
}

LinearOperator diagonal_inverse(std::vector<double> diag) {
    for (auto& d : diag) d = (d > 0.0 && std::isfinite(d)) ? 1.0 / d : 1.0;
    return [d = std::move(diag)](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < d.size(); ++i) y[i] = d[i] * x[i];
    };
}

SolveResult cg(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts, std::span<const double> x0) {
    const std::size_t n = b.size();
    if (a.rows() != n || a.cols() != n) throw ShapeMismatch("cg: matrix and right-hand side dimensions differ");
    SolveResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }
    std::vector<double> inv_diag = a.diagonal();
    for (auto& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

    std::vector<double> r(n), z(n), p(n), ap(n);
    auto true_residual = [&] {
        a.multiply(res.x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return norm2(r) / bnorm;
    };

    double rel = true_residual();
    res.history.push_back(rel);
    int it = 0;
    while (rel > opts.tol && it < opts.max_iterations) {
        // (Re)start from the true residual.
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = dot(r, z);
        while (it < opts.max_iterations) {
            a.multiply(p, ap);
            const double pap = dot(p, ap);
            if (!(pap > 0.0)) throw NonConvergence("cg: operator is not positive definite", rel, res.history);
            const double alpha = rz / pap;
            axpy(alpha, p, res.x);
            axpy(-alpha, ap, r);
            ++it;
            rel = norm2(r) / bnorm;
            res.history.push_back(rel);
            if (rel <= opts.tol) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        rel = true_residual();
    }
    res.iterations = it;
    res.relative_residual = rel;
    if (rel > opts.tol) {
        res.converged = false;
        if (!opts.throw_on_failure) return res;
        std::ostringstream os;
        os << "cg: no convergence after " << it << " iterations, relative residual " << rel;
        throw NonConvergence(os.str(), rel, res.history);
    }
    return res;
}

SolveResult minres(const LinearOperator& op, std::span<const double> b, const SolverOptions& opts,
                   const LinearOperator& precond_inverse, std::span<const double> x0) {
    const std::size_t n = b.size();
    auto apply_m = [&](std::span<const double> in, std::span<double> out) {
        if (precond_inverse) precond_inverse(in, out);
        else std::copy(in.begin(), in.end(), out.begin());
    };

    SolveResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());

    std::vector<double> y(n);
    apply_m(b, y);
    const double bnorm = std::sqrt(std::max(0.0, dot(b, y)));
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }

    std::vector<double> r1(n), r2(n), v(n), w(n, 0.0), w1(n), w2(n, 0.0);
    op(res.x, r1);
    for (std::size_t i = 0; i < n; ++i) r1[i] = b[i] - r1[i];
    apply_m(r1, y);
    double beta1 = std::sqrt(std::max(0.0, dot(r1, y)));
    res.history.push_back(beta1 / bnorm);
    if (beta1 <= opts.tol * bnorm) {
        res.relative_residual = beta1 / bnorm;
        return res;
    }
    r2 = r1;
    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    constexpr double tiny = std::numeric_limits<double>::epsilon();

    int it = 0;
    double rel = beta1 / bnorm;
    while (it < opts.max_iterations) {
        ++it;
        const double s = 1.0 / beta;
        for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
        op(v, y);
        if (it >= 2) axpy(-beta / oldb, r1, y);
        const double alfa = dot(v, y);
        axpy(-alfa / beta, r2, y);
        std::swap(r1, r2);
        r2 = y;
        apply_m(r2, y);
        oldb = beta;
        beta = std::sqrt(std::max(0.0, dot(r2, y)));
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        const double gamma = std::max(std::hypot(gbar, beta), tiny);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;
        std::swap(w1, w2);  // w1 <- previous w2
        std::swap(w2, w);   // w2 <- previous w
        for (std::size_t i = 0; i < n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        axpy(phi, w, res.x);

        rel = phibar / bnorm;
        res.history.push_back(rel);
        if (rel <= opts.tol) break;
        if (beta == 0.0) break;  // invariant subspace: exact solution reached
        const auto k = static_cast<std::size_t>(it);
        const auto win = static_cast<std::size_t>(opts.stagnation_window);
        if (k > win && rel > 10.0 * opts.tol && rel > (1.0 - 1e-3) * res.history[k - win]) {
            res.iterations = it;
            res.relative_residual = rel;
            res.converged = false;
            res.stagnated = true;
            if (!opts.throw_on_failure) return res;
            std::ostringstream os;
            os << "minres: residual stagnated at " << rel << " over the last " << win << " iterations (iteration " << it
               << "); the operator is likely singular or indefinite beyond the constraints";
            throw NonConvergence(os.str(), rel, res.history, true);
        }
    }
    res.iterations = it;
    res.relative_residual = rel;
    if (rel > opts.tol && beta != 0.0) {
        res.converged = false;
        if (!opts.throw_on_failure) return res;
        std::ostringstream os;
        os << "minres: no convergence after " << it << " iterations, relative residual " << rel;
        throw NonConvergence(os.str(), rel, res.history);
    }
    return res;
}

DirichletSystem apply_dirichlet(const SparseMatrix& a, std::span<const double> b, std::span<const Index> dofs,
                                std::span<const double> values) {
    const std::size_t n = a.rows();
    if (b.size() != n || dofs.size() != values.size()) throw ShapeMismatch("apply_dirichlet: dimension mismatch");
    std::vector<char> fixed(n, 0);
    std::vector<double> val(n, 0.0);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        const auto d = static_cast<std::size_t>(dofs[k]);
        if (d >= n) throw InvalidArgument("apply_dirichlet: dof out of range");
        fixed[d] = 1;
        val[d] = values[k];
    }
    DirichletSystem out;
    out.b.assign(b.begin(), b.end());
    std::vector<Triplet> t;
    t.reserve(a.nnz());
    const auto& off = a.row_offsets();
    const auto& ci = a.col_indices();
    const auto& vv = a.values();
    for (std::size_t r = 0; r < n; ++r) {
        if (fixed[r]) {
            t.push_back({static_cast<Index>(r), static_cast<Index>(r), 1.0});
            out.b[r] = val[r];
            continue;
        }
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
            const auto c = static_cast<std::size_t>(ci[k]);
            if (fixed[c]) out.b[r] -= vv[k] * val[c];
            else t.push_back({static_cast<Index>(r), ci[k], vv[k]});
        }
    }
    out.a = SparseMatrix::from_triplets(n, a.cols(), std::move(t));
    return out;
}

}  // namespace decouple
