#include "hartree/symplectic.hpp"
#include "hartree/errors.hpp"

#include <cmath>
#include <sstream>

namespace hartree {

double symplectic_form(const Field& u, const Field& w) {
    require_same_grid(u, w, "symplectic_form");
    double s = 0.0;
    const cplx* a = u.data();
    const cplx* b = w.data();
    for (std::size_t i = 0; i < u.size(); ++i) s += a[i].imag() * b[i].real() - a[i].real() * b[i].imag();
    return s * u.grid().cell_volume();
}

Matrix8d omega_from_scalars(const Eigen::Matrix3d& tau, const Eigen::Vector3d& n_v, double n_mu) {
    Matrix8d om = Matrix8d::Zero();
    om.block<3, 3>(0, 3) = tau;
    om.block<3, 3>(3, 0) = -tau;
    om.block<3, 1>(0, 7) = -n_v;
    om.block<3, 1>(3, 6) = n_v;
    om.block<1, 3>(6, 3) = -n_v.transpose();
    om.block<1, 3>(7, 0) = n_v.transpose();
    om(6, 7) = -n_mu;
    om(7, 6) = n_mu;
    return om;
}

void inverse_blocks(const Eigen::Matrix3d& tau, const Eigen::Vector3d& n_v, double n_mu, Eigen::Matrix3d& g,
                    Eigen::Vector3d& q, double& gamma_scalar) {
    const Eigen::Matrix3d outer = n_v * n_v.transpose();
    g = (tau + outer / n_mu).inverse();
    const Eigen::Matrix3d shifted = tau * n_mu + outer;
    q = shifted.fullPivLu().solve(n_v);
    gamma_scalar = (-1.0 + n_v.dot(q)) / n_mu;
}

Matrix8d omega_inverse_from_blocks(const Eigen::Matrix3d& g, const Eigen::Vector3d& q, double gamma_scalar) {
    Matrix8d inv = Matrix8d::Zero();
    inv.block<3, 3>(0, 3) = -g;
    inv.block<3, 3>(3, 0) = g;
    inv.block<3, 1>(0, 7) = q;
    inv.block<3, 1>(3, 6) = -q;
    inv.block<1, 3>(6, 3) = q.transpose();
    inv.block<1, 3>(7, 0) = -q.transpose();
    inv(6, 7) = -gamma_scalar;
    inv(7, 6) = gamma_scalar;
    return inv;
}

OmegaMatrix omega_matrix(const TangentFrame& frame, double det_min) {
    OmegaMatrix out;
    for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 8; ++k) out.entries(j, k) = j == k ? 0.0 : symplectic_form(frame.z[j], frame.z[k]);
    out.antisymmetry_defect = (out.entries + out.entries.transpose()).cwiseAbs().maxCoeff();
    out.det = out.entries.determinant();
    if (!(out.det >= det_min)) {
        std::ostringstream ss;
        ss << "symplectic matrix is degenerate: det " << out.det << " below " << det_min;
        throw Degeneracy(ss.str());
    }
    out.inverse = out.entries.fullPivLu().inverse();
    out.inverse_defect = (out.entries * out.inverse - Matrix8d::Identity()).cwiseAbs().maxCoeff();

    // Blocks read off the computed matrix in the generic layout.
    const Eigen::Matrix3d tau = out.entries.block<3, 3>(0, 3);
    const Eigen::Vector3d n_v = out.entries.block<1, 3>(7, 0).transpose();
    const double n_mu = out.entries(7, 6);
    inverse_blocks(tau, n_v, n_mu, out.g, out.q, out.gamma_scalar);
    const Matrix8d block_inv = omega_inverse_from_blocks(out.g, out.q, out.gamma_scalar);
    out.block_formula_defect = (block_inv - out.inverse).cwiseAbs().maxCoeff();
    return out;
}

bool omega_forced_zero(int row, int col) {
    const int r = std::min(row, col), c = std::max(row, col);
    if (r == c) return true;
    if (r < 3 && c == r + 3) return false;  // tau_jj
    if (r == 2 && c == 7) return false;     // n_v3
    if (r == 5 && c == 6) return false;     // n_v3
    if (r == 6 && c == 7) return false;     // n_mu
    return true;
}

double omega_pattern_defect(const Matrix8d& om) {
    double worst = 0.0;
    for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 8; ++k)
            if (omega_forced_zero(j, k)) worst = std::max(worst, std::abs(om(j, k)));
    return worst / std::max(om.cwiseAbs().maxCoeff(), 1e-300);
}

Field skew_project(const Field& xi, const TangentFrame& frame, const Matrix8d& omega_inverse) {
    // xi - sum_k c_k z_k with sum_k c_k Omega_kj = omega(xi, z_j):
    // c = Omega^{-T} b = -Omega^{-1} b.
    Vector8d b;
    for (int j = 0; j < 8; ++j) b(j) = symplectic_form(xi, frame.z[j]);
    const Vector8d c = -(omega_inverse * b);
    Field out = xi;
    for (int k = 0; k < 8; ++k) out.axpy(-c(k), frame.z[k]);
    return out;
}

double skew_constraint(const Field& xi, const TangentFrame& frame) {
    double worst = 0.0;
    for (int j = 0; j < 8; ++j) worst = std::max(worst, std::abs(symplectic_form(xi, frame.z[j])));
    return worst;
}

} // namespace hartree
