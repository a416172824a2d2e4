#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/groundstate.hpp"
#include "hartree/spectral.hpp"

#include <doctest.h>

using namespace hartree;

namespace {

const GroundState& small_state() {
    static const GroundState gs = [] {
        GroundStateOptions o;
        o.tol = 1e-10;
        o.boundary_tol = 5e-2;
        return solve_unboosted(0.5, 1.0, Grid(24, 24.0), o);
    }();
    return gs;
}

} // namespace

TEST_CASE("unboosted ground state on a small grid") {
    const GroundState& gs = small_state();
    const Field& phi = gs.field;
    CHECK(gs.relative_residual < 1e-9);
    CHECK(norm(action_gradient(phi, {0.0, 0.0, 0.0}, 0.5, 1.0)) < 1e-9 * norm(phi));
    // real up to a global phase, and even under each reflection
    double imag = 0.0, odd = 0.0;
    const Grid& g = phi.grid();
    for (int iz = 0; iz < g.n(); ++iz)
        for (int iy = 0; iy < g.n(); ++iy)
            for (int ix = 0; ix < g.n(); ++ix) {
                const cplx a = phi[g.index(ix, iy, iz)];
                imag = std::max(imag, std::abs(a.imag()));
                odd = std::max(odd, std::abs(a - phi[g.index(g.mirror(ix), iy, iz)]));
                odd = std::max(odd, std::abs(a - phi[g.index(iy, ix, iz)]));
            }
    CHECK(imag < 1e-10 * phi.max_abs());
    CHECK(odd < 1e-8 * phi.max_abs());
}

TEST_CASE("energy identity at a critical point") {
    // <E'(phi), phi> = 0 gives <T phi, phi> + 2 mu N - 4 I = 0
    const GroundState& gs = small_state();
    const Field& phi = gs.field;
    const double lhs = inner(apply_kinetic(phi, 1.0), phi) + 2.0 * 0.5 * mass(phi) - 4.0 * interaction_energy(phi);
    CHECK(std::abs(lhs) < 1e-8 * 4.0 * interaction_energy(phi));
}

TEST_CASE("translation and phase modes lie in the kernel") {
    const GroundState& gs = small_state();
    const TangentFrame fr = tangent_frame(gs);
    const HessianOperator L(gs.field, {0.0, 0.0, 0.0}, 0.5, 1.0);
    for (int j = 0; j < 3; ++j) CHECK(norm(L.apply(derivative(gs.field, j))) < 1e-7 * norm(gs.field));
    CHECK(norm(L.apply(apply_J(gs.field))) < 1e-7 * norm(gs.field));
    // L d_mu phi = -phi
    CHECK(norm(L.apply(fr.z[7]) + gs.field) < 1e-7 * norm(gs.field));
}

TEST_CASE("frequencies below the essential threshold are refused") {
    CHECK_THROWS_AS(solve_unboosted(-0.1, 1.0, Grid(16, 16.0)), ParameterDomain);
    CHECK_THROWS_AS(solve_boosted({0.0, 0.0, 1.2}, 0.5, 1.0, Grid(16, 16.0)), Error);
}
