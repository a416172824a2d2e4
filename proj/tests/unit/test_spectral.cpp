#include "helpers.hpp"

#include "hartree/functionals.hpp"
#include "hartree/spectral.hpp"

#include <doctest.h>

using namespace hartree;
using testing::max_diff;
using testing::plane_wave;

TEST_CASE("derivative of a plane wave is multiplication by i k") {
    const Grid g(16, 10.0);
    const Field u = plane_wave(g, 3, -2, 1);
    const double base = 2.0 * M_PI / g.length();
    const int modes[3] = {3, -2, 1};
    for (int axis = 0; axis < 3; ++axis) {
        Field expected = cplx(0.0, base * modes[axis]) * u;
        CHECK(max_diff(derivative(u, axis), expected) < 1e-12);
    }
}

TEST_CASE("kinetic and boost symbols on plane waves") {
    const Grid g(16, 12.0);
    const double m = 0.7;
    const Field u = plane_wave(g, 2, 1, -3);
    const double base = 2.0 * M_PI / g.length();
    const double kx = 2 * base, ky = base, kz = -3 * base;
    const double t = std::sqrt(kx * kx + ky * ky + kz * kz + m * m) - m;
    CHECK(max_diff(apply_kinetic(u, m), t * u) < 1e-12);

    const Vec3 v{0.1, -0.2, 0.3};
    const double b = -(v[0] * kx + v[1] * ky + v[2] * kz);
    CHECK(max_diff(apply_boost(u, v), b * u) < 1e-12);
}

TEST_CASE("translation shifts the phase of a plane wave") {
    const Grid g(12, 8.0);
    const Field u = plane_wave(g, 1, 2, -1);
    const Vec3 shift{0.37, -1.1, 2.3};
    const double base = 2.0 * M_PI / g.length();
    const double phase = -base * (1 * shift[0] + 2 * shift[1] - 1 * shift[2]);
    CHECK(max_diff(translate(u, shift), std::polar(1.0, phase) * u) < 1e-12);
}

TEST_CASE("Coulomb potential of a gaussian density") {
    // rho = exp(-r^2 / 2 s^2) has potential Q erf(r / (sqrt2 s)) / r, Q its total charge.
    const Grid g(48, 24.0);
    const double s = 1.0;
    const Field u = testing::gaussian(g, std::sqrt(2.0) * s);
    const RVec rho = density(u);
    const RVec pot = hartree_potential(g, rho);
    const double charge = std::pow(2.0 * M_PI, 1.5) * s * s * s;
    double worst = 0.0;
    for (int iz = 0; iz < g.n(); ++iz)
        for (int iy = 0; iy < g.n(); ++iy)
            for (int ix = 0; ix < g.n(); ++ix) {
                const double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                const double r = std::sqrt(x * x + y * y + z * z);
                if (r > 4.0) continue;
                const double exact =
                    r < 1e-12 ? charge * std::sqrt(2.0 / M_PI) / s : charge * std::erf(r / (std::sqrt(2.0) * s)) / r;
                worst = std::max(worst, std::abs(pot[g.index(ix, iy, iz)] - exact) / exact);
            }
    CHECK(worst < 1e-8);
}

TEST_CASE("upsampling reproduces a band-limited field on the fine grid") {
    const Grid g(8, 6.0);
    const Dealiaser d(g);
    const Field u = plane_wave(g, 1, -2, 3);
    const CVec fine = d.upsample(u);
    const Field expected = plane_wave(d.fine(), 1, -2, 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) worst = std::max(worst, std::abs(fine[i] - expected[i]));
    CHECK(worst < 1e-12);
    CHECK(max_diff(d.downsample(fine), u) < 1e-12);
}

TEST_CASE("mass of a gaussian") {
    // N = 1/2 ||u||^2 and exp(-r^2 / w^2) integrates to pi^{3/2} w^3
    const Grid g(32, 20.0);
    const double w = 1.3;
    const Field u = testing::gaussian(g, w);
    CHECK(mass(u) == doctest::Approx(0.5 * std::pow(M_PI, 1.5) * w * w * w).epsilon(1e-10));
}
