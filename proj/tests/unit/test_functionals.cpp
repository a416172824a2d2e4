#include "helpers.hpp"

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/groundstate.hpp"
#include "hartree/spectral.hpp"
#include "hartree/symplectic.hpp"

#include <doctest.h>

using namespace hartree;

namespace {

RVec well(const Grid& g) {
    RVec V(g.size());
    for (int iz = 0; iz < g.n(); ++iz)
        for (int iy = 0; iy < g.n(); ++iy)
            for (int ix = 0; ix < g.n(); ++ix) {
                const double r2 = g.coord(ix) * g.coord(ix) + g.coord(iy) * g.coord(iy) + g.coord(iz) * g.coord(iz);
                V[g.index(ix, iy, iz)] = -0.1 * std::exp(-0.01 * r2);
            }
    return V;
}

} // namespace

TEST_CASE("energy gradient matches central differences of the energy") {
    const Grid g(16, 12.0);
    const Field u = band_limited(testing::random_smooth(g, 1));
    const Field w = band_limited(testing::random_smooth(g, 2));
    const RVec V = well(g);
    const double m = 1.0, h = 1e-4;
    const double fd = (energy(u + h * w, V, m) - energy(u - h * w, V, m)) / (2.0 * h);
    const double exact = inner(energy_gradient(u, V, m), w);
    CHECK(std::abs(fd - exact) < 1e-6 * std::max(1.0, std::abs(exact)));
}

TEST_CASE("Hessian matches central differences of the action gradient") {
    const Grid g(16, 12.0);
    const Field p = band_limited(testing::random_smooth(g, 3));
    const Field xi = band_limited(testing::random_smooth(g, 4));
    const Vec3 v{0.0, 0.05, 0.2};
    const double mu = 0.5, m = 1.0, h = 1e-4;
    Field fd = action_gradient(p + h * xi, v, mu, m) - action_gradient(p - h * xi, v, mu, m);
    fd *= 1.0 / (2.0 * h);
    const Field exact = HessianOperator(p, v, mu, m).apply(xi);
    CHECK(norm(fd - exact) < 1e-6 * norm(exact));
}

TEST_CASE("Hessian is symmetric in the real pairing") {
    const Grid g(12, 10.0);
    const Field p = band_limited(testing::random_smooth(g, 5));
    const Field a = band_limited(testing::random_smooth(g, 6));
    const Field b = band_limited(testing::random_smooth(g, 7));
    const HessianOperator L(p, {0.0, 0.0, 0.3}, 0.6, 1.0);
    const double ab = inner(a, L.apply(b)), ba = inner(L.apply(a), b);
    CHECK(std::abs(ab - ba) < 1e-11 * std::max(1.0, std::abs(ab)));
}

TEST_CASE("interaction energy is quartic and translation invariant") {
    const Grid g(16, 12.0);
    const Field u = band_limited(testing::random_smooth(g, 8));
    const double base = interaction_energy(u);
    CHECK(interaction_energy(1.7 * u) == doctest::Approx(std::pow(1.7, 4) * base).epsilon(1e-12));
    CHECK(interaction_energy(translate(u, {0.31, -0.77, 1.13})) == doctest::Approx(base).epsilon(1e-11));
    CHECK(interaction_energy(rotate_phase(u, 0.9)) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("symplectic form") {
    const Grid g(8, 6.0);
    const Field u = testing::random_smooth(g, 9);
    const Field w = testing::random_smooth(g, 10);
    CHECK(symplectic_form(u, w) == doctest::Approx(-symplectic_form(w, u)).epsilon(1e-13));
    // omega(u, w) = -<u, J w>, so omega(u, J u) = ||u||^2
    CHECK(symplectic_form(u, w) == doctest::Approx(-inner(u, apply_J(w))).epsilon(1e-13));
    CHECK(symplectic_form(u, apply_J(u)) == doctest::Approx(inner(u, u)).epsilon(1e-13));
}

TEST_CASE("essential threshold of the boosted symbol") {
    // inf over k of sqrt(k^2 + m^2) - m - v.k is m (sqrt(1 - s^2) - 1)
    for (double s : {0.0, 0.1, 0.3, 0.55}) {
        const double m = 1.3;
        double inf = 1e300;
        for (double k = 0.0; k < 20.0; k += 1e-4) inf = std::min(inf, std::sqrt(k * k + m * m) - m - s * k);
        CHECK(-inf == doctest::Approx(mu_lower_bound({0.0, 0.0, s}, m)).epsilon(1e-7));
    }
    CHECK_THROWS_AS(mu_lower_bound({0.0, 0.0, 1.0}, 1.0), Error);
}
