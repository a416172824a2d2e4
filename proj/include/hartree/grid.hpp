#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace hartree {

using Vec3 = std::array<double, 3>;

// Cubic periodic box [-L/2, L/2)^3 with n points per axis. Linear index is
// ix + n*(iy + n*iz), x fastest.
class Grid {
public:
    Grid(int n, double box_length);

    int n() const { return n_; }
    double length() const { return L_; }
    double spacing() const { return h_; }
    double cell_volume() const { return h_ * h_ * h_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

    // Per-axis wavenumber for FFT bin i in the standard symmetric layout.
    double k(int i) const { return k_[i]; }
    const std::vector<double>& wavenumbers() const { return k_; }
    double k_max() const;
    // Odd symbols (derivatives) vanish on the unpaired Nyquist bin.
    double k_odd(int i) const { return i == n_ / 2 ? 0.0 : k_[i]; }

    double coord(int i) const { return -0.5 * L_ + i * h_; }
    std::size_t index(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) + static_cast<std::size_t>(n_) * (iy + static_cast<std::size_t>(n_) * iz);
    }
    // Index of the mirror point x -> -x.
    int mirror(int i) const { return (n_ - i) % n_; }

    // Minimum-image displacement from c to the grid point (ix,iy,iz).
    Vec3 displacement(int ix, int iy, int iz, const Vec3& c) const;
    double wrap(double d) const;

    bool operator==(const Grid& o) const { return n_ == o.n_ && L_ == o.L_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int n_;
    double L_;
    double h_;
    std::vector<double> k_;
};

} // namespace hartree
