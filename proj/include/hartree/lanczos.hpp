#pragma once

#include "hartree/field.hpp"
#include "hartree/linear_solvers.hpp"

#include <cstdint>
#include <vector>

namespace hartree {

struct EigenOptions {
    int block_size = 4;
    int max_basis = 48;
    int max_restarts = 200;
    double tol = 1e-8;
    // Ritz values are reported relative to this shift when testing
    // convergence of pairs near it.
    double shift = 0.0;
    std::uint64_t seed = 12345;
    int symmetry_probes = 10;
    double symmetry_tol = 1e-8;
    // Maps start vectors into the subspace the operator acts on (e.g. real
    // fields for the L11 block); identity if empty.
    LinearOp restrict;
};

struct EigenResult {
    std::vector<double> values;     // ascending
    std::vector<Field> vectors;     // orthonormal in the real pairing
    std::vector<double> residuals;  // ||A u - lambda u|| recomputed explicitly
    std::vector<std::vector<double>> ritz_history;  // lowest Ritz values per restart
    int applications = 0;
};

// Smooth Gaussian random field: white noise filtered by exp(-|k|^2/k_c^2)
// with k_c half the Nyquist wavenumber; band-limited, unit l2 norm.
Field smooth_random_field(const Grid& g, std::uint64_t seed, bool real_only = false);

// Largest relative asymmetry |<Au,w> - <u,Aw>| / (|<Au,w>| + |<u,Aw>| + tiny)
// over random probe pairs, scaled by operator size estimate.
double symmetry_defect(const LinearOp& A, const Grid& g, int probes, std::uint64_t seed, const LinearOp& restrict = {});

// k algebraically lowest eigenpairs of a symmetric operator by block
// Lanczos with full reorthogonalization and thick restarts. Throws
// ContractViolation if the operator fails the symmetry probe and
// SolverFailure (with Ritz history in the message) if not converged.
EigenResult lowest_eigenpairs(const LinearOp& A, const Grid& g, int k, const EigenOptions& opts = {});

// Principal angles (radians, ascending) between the spans of two sets of
// fields.
std::vector<double> principal_angles(const std::vector<Field>& a, const std::vector<Field>& b);

} // namespace hartree
