#pragma once

#include "hartree/field.hpp"

#include <array>
#include <functional>
#include <limits>
#include <memory>

namespace hartree {

// Real Fourier symbol sampled on the full wavenumber lattice, laid out like
// a field (kx fastest).
struct Multiplier {
    Grid grid;
    RVec symbol;

    Field apply(const Field& u) const;
    // Multiplies an already transformed spectrum in place.
    void apply_spectral(cplx* spectrum) const;
};

double wavenumber_sq(const Grid& g, std::size_t idx);

// sqrt(|k|^2 + m^2) - m; cached per (grid, m).
std::shared_ptr<const Multiplier> kinetic_multiplier(const Grid& g, double m);
// -v.k, odd, zero on Nyquist bins.
Multiplier boost_multiplier(const Grid& g, const Vec3& v);
// Even symbol evaluated at every lattice wavenumber.
Multiplier make_multiplier(const Grid& g, const std::function<double(double, double, double)>& fn);

// (sqrt(-Delta+m^2) - m) u
Field apply_kinetic(const Field& u, double m);
// i v.grad u; symbol -v.k.
Field apply_boost(const Field& u, const Vec3& v);
// d/dx_axis u spectrally (symbol i k with Nyquist removed).
Field derivative(const Field& u, int axis);
std::array<Field, 3> gradient(const Field& u);
RVec derivative(const Grid& g, const RVec& f, int axis);
// u(x - shift), band-limited interpolation; Nyquist bins are dropped.
Field translate(const Field& u, const Vec3& shift);
RVec translate(const Grid& g, const RVec& f, const Vec3& shift);

// Convolution with 1/|x| using the cosine-truncated free-space kernel with
// truncation radius L/2. Exact for densities supported in a ball of that
// diameter.
class HartreeKernel {
public:
    explicit HartreeKernel(const Grid& g);
    RVec apply(const RVec& rho) const;
    const Grid& grid() const { return grid_; }
    double radius() const { return radius_; }
    // Symbol value at wavenumber magnitude squared k2.
    static double symbol(double k2, double radius);

private:
    Grid grid_;
    double radius_;
    RVec half_symbol_;
};

std::shared_ptr<const HartreeKernel> hartree_kernel(const Grid& g);
RVec hartree_potential(const Grid& g, const RVec& rho);

// Fields are treated as trigonometric polynomials without the unpaired
// Nyquist modes. This zeroes every Fourier bin with an index of n/2.
void project_band(Field& u);
Field band_limited(const Field& u);

// Exact evaluation of cubic terms for band-limited fields on a grid with
// twice the points per axis. Products formed there carry no aliasing back
// into the band, so the discrete interaction is translation invariant.
class Dealiaser {
public:
    explicit Dealiaser(const Grid& coarse);
    const Grid& coarse() const { return coarse_; }
    const Grid& fine() const { return fine_; }
    // Values of the band-limited interpolant at the fine grid points.
    CVec upsample(const Field& u) const;
    CVec upsample_spectrum(const cplx* coarse_spectrum) const;
    RVec upsample(const RVec& f) const;
    // Band projection of fine-grid values back to coarse samples.
    Field downsample(CVec fine_values) const;
    // Coarse spectrum (unscaled) of the band projection.
    void downsample_spectrum(CVec& fine_values, cplx* coarse_spectrum) const;
    // Hartree potential of a fine-grid density.
    RVec potential(const RVec& rho_fine) const;
    double fine_cell_volume() const { return fine_.cell_volume(); }

private:
    Grid coarse_;
    Grid fine_;
    std::vector<std::size_t> fine_of_coarse_;  // fine bin per coarse bin, or npos
};

std::shared_ptr<const Dealiaser> dealiaser(const Grid& g);

struct Norms {
    double l2 = 0.0;
    double h_half = 0.0;
    double x_weight = 0.0;
};

double h_half_norm(const Field& u);
// integral |x - c| |u|^2 with minimum-image distance.
double weighted_moment(const Field& u, const Vec3& center);
// X-norm with the box center as origin unless given.
Norms norms(const Field& u, double eps, const Vec3& center = {0.0, 0.0, 0.0});

// Full spectrum of a copy of u.
CVec spectrum(const Field& u);

} // namespace hartree
