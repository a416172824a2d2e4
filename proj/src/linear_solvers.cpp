#include "hartree/linear_solvers.hpp"
#include "hartree/errors.hpp"

#include <cmath>
#include <limits>

namespace hartree {
namespace {

// One MINRES cycle from x; returns the number of iterations spent.
int minres_cycle(const LinearOp& A, const Field& b, const LinearOp& M, Field& x, double rtol, int budget) {
    Field r1 = b - A(x);
    Field y = M ? M(r1) : r1;
    double beta1 = inner(r1, y);
    if (beta1 < 0.0) throw ContractViolation("minres: preconditioner is not positive definite");
    beta1 = std::sqrt(beta1);
    if (beta1 == 0.0) return 0;

    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    Field w(b.grid()), w2(b.grid()), w1(b.grid());
    Field r2 = r1;
    int itn = 0;
    while (itn < budget) {
        ++itn;
        Field v = (1.0 / beta) * y;
        y = A(v);
        if (itn >= 2) y.axpy(-beta / oldb, r1);
        const double alfa = inner(v, y);
        y.axpy(-alfa / beta, r2);
        r1 = std::move(r2);
        r2 = y;
        y = M ? M(r2) : r2;
        oldb = beta;
        beta = inner(r2, y);
        if (beta < 0.0) throw ContractViolation("minres: preconditioner is not positive definite");
        beta = std::sqrt(beta);

        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::hypot(gbar, beta);
        gamma = std::max(gamma, std::numeric_limits<double>::min());
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        w1 = std::move(w2);
        w2 = std::move(w);
        w = v;
        w.axpy(-oldeps, w1);
        w.axpy(-delta, w2);
        w *= 1.0 / gamma;
        x.axpy(phi, w);

        // phibar estimates the residual in the preconditioner norm; the
        // caller confirms with the true residual.
        if (phibar <= 0.1 * rtol * beta1) break;
        if (beta == 0.0) break;
    }
    return itn;
}

} // namespace

Field minres(const LinearOp& A, const Field& b, const LinearOp& M, double rtol, int max_iter, SolveReport* report) {
    Field x(b.grid());
    const double bnorm = norm(b);
    SolveReport rep;
    if (bnorm == 0.0) {
        rep.converged = true;
        if (report) *report = rep;
        return x;
    }
    int spent = 0;
    double rel = 1.0;
    for (int cycle = 0; cycle < 8 && spent < max_iter; ++cycle) {
        spent += minres_cycle(A, b, M, x, rtol, max_iter - spent);
        rel = norm(b - A(x)) / bnorm;
        if (rel <= rtol) break;
    }
    rep.iterations = spent;
    rep.relative_residual = rel;
    rep.converged = rel <= rtol;
    if (report) *report = rep;
    return x;
}

std::vector<Field> orthonormalize(const std::vector<Field>& vs, double drop_tol) {
    std::vector<Field> q;
    for (const auto& v : vs) {
        const double n0 = norm(v);
        if (n0 == 0.0) continue;
        Field u = v;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : q) u.axpy(-inner(e, u), e);
        const double n1 = norm(u);
        if (n1 <= drop_tol * n0) continue;
        q.push_back((1.0 / n1) * u);
    }
    return q;
}

Field project_out(const Field& u, const std::vector<Field>& basis) {
    Field r = u;
    for (const auto& q : basis) r.axpy(-inner(q, r), q);
    return r;
}

} // namespace hartree
