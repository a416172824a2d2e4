#pragma once

#include "hartree/field.hpp"

#include <cmath>
#include <random>

namespace testing {

using hartree::cplx;
using hartree::Field;
using hartree::Grid;

// exp(-|x - c|^2 / (2 w^2)) times a plane wave exp(i q.x).
inline Field gaussian(const Grid& g, double width, hartree::Vec3 c = {0.0, 0.0, 0.0}, hartree::Vec3 q = {0.0, 0.0, 0.0}) {
    Field u(g);
    for (int iz = 0; iz < g.n(); ++iz)
        for (int iy = 0; iy < g.n(); ++iy)
            for (int ix = 0; ix < g.n(); ++ix) {
                const double x = g.coord(ix) - c[0], y = g.coord(iy) - c[1], z = g.coord(iz) - c[2];
                const double r2 = x * x + y * y + z * z;
                const double phase = q[0] * g.coord(ix) + q[1] * g.coord(iy) + q[2] * g.coord(iz);
                u[g.index(ix, iy, iz)] = std::exp(-r2 / (2.0 * width * width)) * std::polar(1.0, phase);
            }
    return u;
}

// exp(i k.x) for an integer lattice mode k (in units of 2 pi / L).
inline Field plane_wave(const Grid& g, int a, int b, int c) {
    const double base = 2.0 * M_PI / g.length();
    Field u(g);
    for (int iz = 0; iz < g.n(); ++iz)
        for (int iy = 0; iy < g.n(); ++iy)
            for (int ix = 0; ix < g.n(); ++ix)
                u[g.index(ix, iy, iz)] =
                    std::polar(1.0, base * (a * g.coord(ix) + b * g.coord(iy) + c * g.coord(iz)));
    return u;
}

inline Field random_smooth(const Grid& g, unsigned seed, double width = 1.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Field u(g);
    for (int j = 0; j < 4; ++j) {
        const hartree::Vec3 c{nd(rng), nd(rng), nd(rng)};
        const hartree::Vec3 q{0.3 * nd(rng), 0.3 * nd(rng), 0.3 * nd(rng)};
        u.axpy(nd(rng), gaussian(g, width, c, q));
    }
    return u;
}

inline double max_diff(const Field& a, const Field& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

} // namespace testing
