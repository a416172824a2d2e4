#pragma once

#include "hartree/groundstate.hpp"
#include "hartree/lanczos.hpp"
#include "hartree/symplectic.hpp"

#include <string>
#include <vector>

namespace hartree {

struct SpectralOptions {
    double eig_tol = 1e-8;
    int block_size = 4;
    int max_basis = 48;
    int extra = 1;   // eigenpairs requested beyond negative + kernel
    std::uint64_t seed = 2024;
    double angle_tol = 1e-3;
    // Ritz vectors with more than this fraction of mass near the faces are
    // flagged as essential-band artifacts.
    double boundary_mass_tol = 0.01;
};

struct SpectralReport {
    std::string operator_tag;  // L11, L22 or Lfull
    std::vector<double> eigenvalues;
    std::vector<double> residuals;
    std::vector<double> boundary_mass;
    std::vector<bool> essential_artifact;
    int kernel_dim = 0;
    int kernel_dim_half_tol = 0;
    int negative_count = 0;
    double gap = 0.0;
    double essential_onset_estimate = 0.0;
    double kernel_tol = 0.0;
    double eig_tol = 0.0;
    std::vector<double> kernel_angles;  // against the expected kernel span
    int applications = 0;
    bool pass = false;
};

// max(1e-6, 10 * ground-state residual * mu)
double kernel_tolerance(const GroundState& gs);

// Fraction of ||u||^2 within 0.15 L of a face of the box.
double boundary_mass_fraction(const Field& u);

// Real block L11 of the unboosted Hessian; passes iff the kernel is three
// dimensional and spanned by the translation modes.
SpectralReport verify_kernel_assumption(const GroundState& gs0, const SpectralOptions& opts = {});

// Imaginary block L22 of the unboosted Hessian; passes iff the lowest
// eigenvalue is a simple zero with eigenvector along phi.
SpectralReport l22_report(const GroundState& gs0, const SpectralOptions& opts = {});

// Full Hessian; passes iff one negative eigenvalue, kernel dimension four
// spanned by {d_x phi, J phi}, and a positive gap.
SpectralReport full_spectrum_report(const GroundState& gs, const SpectralOptions& opts = {});

std::string to_json(const SpectralReport& r);

struct CoercivityResult {
    double rho = 0.0;        // minimum sampled quotient
    double mean = 0.0;
    double max_constraint = 0.0;
    int samples = 0;
};

// Minimum of <xi, L xi> / ||xi||_{H^1/2}^2 over smoothed random fields
// projected onto the skew-orthogonal complement of the tangent frame.
CoercivityResult coercivity_estimate(const GroundState& gs, const TangentFrame& frame, const Matrix8d& omega,
                                     int n_samples, std::uint64_t seed = 7, double constraint_tol = 1e-10);

} // namespace hartree
