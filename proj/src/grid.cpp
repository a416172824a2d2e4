#include "hartree/grid.hpp"
#include "hartree/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hartree {

Grid::Grid(int n, double box_length) : n_(n), L_(box_length), h_(box_length / n), k_(n) {
    if (n < 8 || n % 2 != 0)
        throw ParameterDomain("grid: points per axis must be even and >= 8, got " + std::to_string(n));
    if (!(box_length > 0.0) || !std::isfinite(box_length))
        throw ParameterDomain("grid: box length must be positive");
    const double dk = 2.0 * std::numbers::pi / L_;
    for (int i = 0; i < n; ++i) {
        int f = i <= n / 2 ? i : i - n;
        if (i == n / 2) f = -n / 2;
        k_[i] = dk * f;
    }
}

double Grid::k_max() const { return std::numbers::pi * n_ / L_; }

double Grid::wrap(double d) const { return d - L_ * std::round(d / L_); }

Vec3 Grid::displacement(int ix, int iy, int iz, const Vec3& c) const {
    return {wrap(coord(ix) - c[0]), wrap(coord(iy) - c[1]), wrap(coord(iz) - c[2])};
}

} // namespace hartree
