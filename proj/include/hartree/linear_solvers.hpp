#pragma once

#include "hartree/field.hpp"

#include <functional>
#include <vector>

namespace hartree {

using LinearOp = std::function<Field(const Field&)>;

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

// Preconditioned MINRES for symmetric (possibly indefinite) operators with a
// symmetric positive definite preconditioner. Restarts from the current
// iterate until the true relative residual meets rtol or the budget is spent.
Field minres(const LinearOp& A, const Field& b, const LinearOp& precond, double rtol, int max_iter,
             SolveReport* report = nullptr);

// Orthonormal basis (in the real pairing) for the span of the given fields,
// dropping directions whose Gram-Schmidt remainder falls below drop_tol.
std::vector<Field> orthonormalize(const std::vector<Field>& vs, double drop_tol = 1e-12);
// u - sum_q <q,u> q for an orthonormal set.
Field project_out(const Field& u, const std::vector<Field>& basis);

} // namespace hartree
