#pragma once

#include "hartree/field.hpp"
#include "hartree/groundstate.hpp"

#include <Eigen/Dense>

namespace hartree {

using Matrix8d = Eigen::Matrix<double, 8, 8>;
using Vector8d = Eigen::Matrix<double, 8, 1>;

// omega(u, w) = integral (u2 w1 - u1 w2) = -<u, J w>.
double symplectic_form(const Field& u, const Field& w);

struct OmegaMatrix {
    Matrix8d entries = Matrix8d::Zero();
    double det = 0.0;
    // inverse in block form (0 -g 0 q; g 0 -q 0; 0 q^T 0 -gamma; -q^T 0 gamma 0)
    Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
    Eigen::Vector3d q = Eigen::Vector3d::Zero();
    double gamma_scalar = 0.0;
    Matrix8d inverse = Matrix8d::Zero();
    double antisymmetry_defect = 0.0;
    double inverse_defect = 0.0;       // ||Omega * Omega^{-1} - I||_max
    double block_formula_defect = 0.0; // block inverse vs direct inverse, max entry
};

// Block form of Omega from the family scalars (tau, n_v, n_mu).
Matrix8d omega_from_scalars(const Eigen::Matrix3d& tau, const Eigen::Vector3d& n_v, double n_mu);

// Assembles the block inverse from (tau, n_v, n_mu).
Matrix8d omega_inverse_from_blocks(const Eigen::Matrix3d& g, const Eigen::Vector3d& q, double gamma_scalar);

void inverse_blocks(const Eigen::Matrix3d& tau, const Eigen::Vector3d& n_v, double n_mu, Eigen::Matrix3d& g,
                    Eigen::Vector3d& q, double& gamma_scalar);

// Omega_jk = omega(z_j, z_k) over the tangent frame. Throws Degeneracy if
// det < det_min.
OmegaMatrix omega_matrix(const TangentFrame& frame, double det_min = 1e-10);

// Entries that vanish by reflection symmetry when v is along e3.
bool omega_forced_zero(int row, int col);
// max |forced-zero entry| / max |entry|
double omega_pattern_defect(const Matrix8d& om);

// Removes from xi its components along the frame so that
// omega(xi, z_j) = 0 for all j, using Omega^{-1}.
Field skew_project(const Field& xi, const TangentFrame& frame, const Matrix8d& omega_inverse);

// max_j |omega(xi, z_j)|
double skew_constraint(const Field& xi, const TangentFrame& frame);

} // namespace hartree
