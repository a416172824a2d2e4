#pragma once

#include "hartree/field.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <utility>

namespace hartree {

struct GroundStateOptions {
    // Converged when ||E'(phi)|| < tol * ||phi||.
    double tol = 1e-10;
    int max_iter = 3000;
    double boundary_tol = 1e-8;
    bool check_boundary = true;
    double continuation_step = 0.05;
    double seed_width = 1.5;
    // Symmetrization period for boosted solves.
    int symmetrize_every = 10;
    // Newton-MINRES refinement after the renormalized iteration stalls.
    int newton_steps = 8;
    double mu_margin = 0.05;
};

struct GroundState {
    explicit GroundState(Field f) : field(std::move(f)) {}

    Field field;
    Vec3 v{0.0, 0.0, 0.0};
    double mu = 0.0;
    double m = 1.0;
    double residual = 0.0;           // ||E'(phi)||
    double relative_residual = 0.0;  // residual / ||phi||
    double mass_n = 0.0;
    double boundary_ratio = 0.0;
    int iterations = 0;
    std::string seed;
};

// Ordered (d_x1, d_x2, d_x3, d_v1, d_v2, d_v3, J phi, d_mu phi).
struct TangentFrame {
    std::array<Field, 8> z;
    // ||L d_v_j phi - J d_x_j phi||, ||L d_mu phi + phi||
    std::array<double, 3> velocity_residual{};
    double frequency_residual = 0.0;
    // ||L d_x_j phi||, ||L J phi||
    std::array<double, 4> kernel_residual{};
    int solver_iterations = 0;
};

struct FamilyScalars {
    double n = 0.0;
    double n_mu = 0.0;
    Eigen::Vector3d n_v = Eigen::Vector3d::Zero();
    Eigen::Matrix3d tau = Eigen::Matrix3d::Zero();
    // tau computed as <L d_v_j phi, d_v_k phi>, for cross-checking
    Eigen::Matrix3d tau_hessian = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d gamma = Eigen::Matrix3d::Zero();
};

double mu_lower_bound(const Vec3& v, double m);
// Throws ParameterDomain if the boosted resolvent symbol is not positive.
void require_frequency_window(const Vec3& v, double mu, double m, double margin);

// Maximum amplitude on the box faces relative to the peak.
double boundary_ratio(const Field& u);

GroundState solve_unboosted(double mu, double m, const Grid& grid, const GroundStateOptions& opts = {});
GroundState solve_boosted(const Vec3& v, double mu, double m, const Grid& grid, const GroundStateOptions& opts = {},
                          const GroundState* warm = nullptr);
// Continues the iteration from an existing state at possibly new (v, mu).
GroundState refine(const Field& start, const Vec3& v, double mu, double m, const GroundStateOptions& opts,
                   const std::string& seed);

TangentFrame tangent_frame(const GroundState& gs, double rtol = 1e-11);
// d_mu phi and d_v_j phi by central differences of the solved family; the
// remaining entries are filled as in tangent_frame.
TangentFrame finite_difference_frame(const GroundState& gs, double step = 1e-3, const GroundStateOptions& opts = {});

FamilyScalars family_scalars(const GroundState& gs, const TangentFrame& frame, bool require_stable = true);

// Distance in l2 between u and the span complement of the kernel
// {d_x phi, J phi}: || P_K^perp (a - b) || / ||a||.
double distance_modulo_kernel(const Field& a, const Field& b, const TangentFrame& frame);

struct DecayFit {
    double rate = 0.0;
    double along = 0.0;
    double across = 0.0;
    double bound = 0.0;  // min(m, (mu - mu_l) / sqrt(1 - |v|^2))
};

DecayFit decay_rate(const GroundState& gs);

} // namespace hartree
