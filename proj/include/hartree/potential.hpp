#pragma once

#include "hartree/field.hpp"

#include <array>
#include <string>

namespace hartree {

enum class PotentialPreset { zero, gaussian_well, smooth_ramp, cosine_bump };

PotentialPreset parse_preset(const std::string& name);
std::string preset_name(PotentialPreset p);

// Slowly varying external potentials, periodized through the chordal
// coordinate s_j = (L/pi) sin(pi (x_j - c_j) / L), which equals x_j - c_j
// near the center and is smooth on the torus.
//   gaussian_well: -A exp(-eps^2 |s|^2 / 2)
//   smooth_ramp:    A tanh(eps s_3)
//   cosine_bump:    A cos(eps |s|)
struct PotentialSpec {
    PotentialPreset preset = PotentialPreset::zero;
    double epsilon = 0.05;
    double amplitude = 0.0;
    Vec3 center{0.0, 0.0, 0.0};
    // Allowed ratio sup|d^a V| / (A eps^|a|) for |a| <= 3.
    double derivative_constant = 20.0;
};

class Potential {
public:
    // `verify` runs the derivative-hierarchy check (ParameterDomain on
    // failure).
    Potential(const PotentialSpec& spec, const Grid& g, bool verify = true);

    const PotentialSpec& spec() const { return spec_; }
    const Grid& grid() const { return grid_; }
    bool is_zero() const { return spec_.preset == PotentialPreset::zero || spec_.amplitude == 0.0; }
    // Samples at the grid points (empty for the zero preset).
    const RVec& samples() const { return samples_; }

    double value(const Vec3& x) const;
    Vec3 gradient(const Vec3& x) const;
    // Gradient samples at the grid points.
    const std::array<RVec, 3>& gradient_samples() const { return grad_samples_; }

    // sup|d^a V| / (A eps^|a|) maximised over multi-indices of each order
    // 1, 2, 3, measured with spectral derivatives of the samples.
    const std::array<double, 3>& derivative_ratios() const { return ratios_; }
    // sup |grad V|
    double max_gradient() const { return max_grad_; }

private:
    Vec3 chordal(const Vec3& x) const;

    PotentialSpec spec_;
    Grid grid_;
    RVec samples_;
    std::array<RVec, 3> grad_samples_;
    std::array<double, 3> ratios_{0.0, 0.0, 0.0};
    double max_grad_ = 0.0;
};

} // namespace hartree
