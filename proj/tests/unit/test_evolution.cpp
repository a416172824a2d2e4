#include "helpers.hpp"

#include "hartree/evolution.hpp"
#include "hartree/functionals.hpp"
#include "hartree/spectral.hpp"

#include <doctest.h>

using namespace hartree;

namespace {

PotentialSpec test_well() { return {PotentialPreset::gaussian_well, 0.2, 0.1, {0.0, 0.0, -1.0}, 20.0}; }

} // namespace

TEST_CASE("linear free flow multiplies plane waves by their phase") {
    const Grid g(16, 10.0);
    const double m = 1.0, dt = 0.05;
    const Propagator prop(g, dt, nullptr, m, false);
    Field u = testing::plane_wave(g, 2, 0, -1);
    const Field u0 = u;
    prop.advance(u, 40);
    const double base = 2.0 * M_PI / g.length();
    const double k2 = base * base * 5.0;
    const double t = 40 * dt;
    CHECK(testing::max_diff(u, std::polar(1.0, -t * (std::sqrt(k2 + m * m) - m)) * u0) < 1e-11);
}

TEST_CASE("Strang steps conserve mass and run backwards") {
    const Grid g(16, 12.0);
    const PotentialSpec V = test_well();
    const Field u0 = band_limited(0.5 * testing::random_smooth(g, 31));
    const Propagator forward(g, 0.02, &V, 1.0);
    const Propagator backward(g, -0.02, &V, 1.0);
    Field u = u0;
    forward.advance(u, 25);
    CHECK(mass(u) == doctest::Approx(mass(u0)).epsilon(1e-13));
    CHECK(norm(u - u0) > 1e-3 * norm(u0));
    for (int i = 0; i < 25; ++i) backward.step(u);
    CHECK(norm(u - u0) < 1e-11 * norm(u0));
}

TEST_CASE("merged half steps agree with separate steps") {
    const Grid g(12, 10.0);
    const PotentialSpec V = test_well();
    const Propagator prop(g, 0.03, &V, 1.0);
    Field a = band_limited(0.5 * testing::random_smooth(g, 32));
    Field b = a;
    prop.advance(a, 7);
    for (int i = 0; i < 7; ++i) prop.step(b);
    CHECK(norm(a - b) < 1e-12 * norm(b));
}

TEST_CASE("Strang splitting is second order") {
    const Grid g(16, 12.0);
    const PotentialSpec V = test_well();
    const Field u0 = band_limited(0.6 * testing::random_smooth(g, 33));
    auto run = [&](double dt, int steps) {
        Field u = u0;
        Propagator(g, dt, &V, 1.0).advance(u, steps);
        return u;
    };
    const Field ref = run(0.0025, 160);
    const double e1 = norm(run(0.02, 20) - ref);
    const double e2 = norm(run(0.01, 40) - ref);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("simulation grid embedding is exact for band-limited fields") {
    const Grid g(12, 9.0);
    const Field u = band_limited(testing::random_smooth(g, 34));
    const Field up = to_simulation(u);
    CHECK(up.grid() == simulation_grid(g));
    CHECK(up.grid().n() == 24);
    CHECK(norm(to_analysis(up, g) - u) < 1e-13 * norm(u));
    CHECK(mass(up) == doctest::Approx(mass(u)).epsilon(1e-13));
}
