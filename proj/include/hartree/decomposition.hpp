#pragma once

#include "hartree/family.hpp"
#include "hartree/symplectic.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hartree {

// Modulation point (y, v, theta, mu); theta in [0, 2 pi) once normalized.
struct SolitonParams {
    Vec3 y{0.0, 0.0, 0.0};
    Vec3 v{0.0, 0.0, 0.0};
    double theta = 0.0;
    double mu = 0.0;
};

// Ordered (y1, y2, y3, v1, v2, v3, theta, mu), matching the frame order.
Vector8d to_vector(const SolitonParams& p);
SolitonParams from_vector(const Vector8d& x);
double wrap_phase(double theta);

// exp(-theta J) u(x - y), and its inverse exp(theta J) psi(x + y).
Field to_lab_frame(const Field& u, const SolitonParams& p);
Field to_soliton_frame(const Field& psi, const SolitonParams& p);

// Tangent frame of the interpolated profile at (v, mu), centered at the
// origin with zero phase.
TangentFrame frame_from_sample(const FamilySample& s);

Field soliton_field(FamilyTable& table, const SolitonParams& p);
TangentFrame lab_frame(FamilyTable& table, const SolitonParams& p);

struct DecompositionOptions {
    // Converged when max_j |omega(xi, z_j)| < tol * ||psi||^2.
    double tol = 1e-9;
    int max_steps = 25;
    double damping = 0.5;
    int damped_steps = 2;
};

struct Decomposition {
    SolitonParams params;
    Field residual_field;  // xi in the soliton frame
    double constraint_norm = 0.0;
    int iterations = 0;
    std::vector<double> history;  // max_j |G_j| before each step and at exit
    explicit Decomposition(const Grid& g) : residual_field(g) {}
};

// Newton iteration on G_j(zeta) = omega(psi - phi_zeta, z_j). Throws
// DecompositionLost carrying `time` when it does not converge.
Decomposition skew_decompose(const Field& psi, const SolitonParams& guess, FamilyTable& table,
                             const DecompositionOptions& opts = {}, double time = 0.0);

struct ProjectionOptions {
    double eps = 0.05;        // weight of |x| in the X-norm
    double threshold = 0.25;  // largest accepted ||psi - phi_zeta||_X / ||psi||_X
    int max_steps = 40;
    std::optional<Vec3> v_hint;
    std::optional<double> mu_hint;
};

struct Projection {
    SolitonParams params;
    double distance = 0.0;  // relative X distance at the minimizer
    int iterations = 0;
};

// Center from the periodic density centroid, phase from the complex
// overlap, then Gauss-Newton on all eight parameters in the X metric.
// Throws NotNearManifold above the threshold.
Projection orthogonal_project(const Field& psi, FamilyTable& table, const ProjectionOptions& opts = {});

// Localized perturbation in the soliton frame: a smooth random real field
// times the profile envelope, made skew-orthogonal to the frame at (v, mu)
// and scaled to ||xi||_X = x_norm with weight eps.
Field skew_orthogonal_perturbation(FamilyTable& table, const Vec3& v, double mu, std::uint64_t seed, double x_norm,
                                   double eps);

// Periodic centroid of |u|^2 per axis.
Vec3 circular_centroid(const Field& u);

} // namespace hartree
