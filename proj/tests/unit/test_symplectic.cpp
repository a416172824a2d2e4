#include "hartree/symplectic.hpp"

#include <doctest.h>

#include <random>

using namespace hartree;

namespace {

struct Scalars {
    Eigen::Matrix3d tau;
    Eigen::Vector3d n_v;
    double n_mu;
};

Scalars random_scalars(unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Matrix3d a;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) a(j, k) = u(rng);
    Scalars s;
    s.tau = a * a.transpose() + Eigen::Matrix3d::Identity();
    s.tau = 0.5 * (s.tau + s.tau.transpose()).eval();
    s.n_v = Eigen::Vector3d(u(rng), u(rng), u(rng));
    s.n_mu = 0.5 + std::abs(u(rng));
    return s;
}

} // namespace

TEST_CASE("block inverse of the symplectic matrix") {
    for (unsigned seed = 1; seed <= 20; ++seed) {
        const Scalars s = random_scalars(seed);
        const Matrix8d om = omega_from_scalars(s.tau, s.n_v, s.n_mu);
        CHECK((om + om.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::Matrix3d g;
        Eigen::Vector3d q;
        double gamma = 0.0;
        inverse_blocks(s.tau, s.n_v, s.n_mu, g, q, gamma);
        const Matrix8d inv = omega_inverse_from_blocks(g, q, gamma);
        CHECK((om * inv - Matrix8d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("determinant for a boost along e3") {
    // tau diagonal, n_v = (0, 0, a): det = (tau11 tau22)^2 (tau33 n_mu + a^2)^2
    const Eigen::Matrix3d tau = Eigen::Vector3d(1.3, 0.7, 2.1).asDiagonal();
    const Eigen::Vector3d n_v(0.0, 0.0, -0.4);
    const double n_mu = 0.9;
    const Matrix8d om = omega_from_scalars(tau, n_v, n_mu);
    const double expected = std::pow(1.3 * 0.7, 2) * std::pow(2.1 * 0.9 + 0.16, 2);
    CHECK(om.determinant() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(omega_pattern_defect(om) == 0.0);
}

TEST_CASE("pattern defect sees an entry that should vanish") {
    const Eigen::Matrix3d tau = Eigen::Matrix3d::Identity();
    Matrix8d om = omega_from_scalars(tau, Eigen::Vector3d(0.0, 0.0, 0.5), 1.0);
    int forced = 0;
    for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 8; ++k) forced += omega_forced_zero(j, k) ? 1 : 0;
    CHECK(forced > 0);
    for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 8; ++k)
            if (omega_forced_zero(j, k)) {
                om(j, k) = 0.25;
                CHECK(omega_pattern_defect(om) == doctest::Approx(0.25));
                return;
            }
}
