#include "hartree/potential.hpp"
#include "hartree/errors.hpp"
#include "hartree/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hartree {

PotentialPreset parse_preset(const std::string& name) {
    if (name == "zero") return PotentialPreset::zero;
    if (name == "gaussian_well") return PotentialPreset::gaussian_well;
    if (name == "smooth_ramp") return PotentialPreset::smooth_ramp;
    if (name == "cosine_bump") return PotentialPreset::cosine_bump;
    throw ConfigError("unknown potential preset '" + name + "'");
}

std::string preset_name(PotentialPreset p) {
    switch (p) {
    case PotentialPreset::zero: return "zero";
    case PotentialPreset::gaussian_well: return "gaussian_well";
    case PotentialPreset::smooth_ramp: return "smooth_ramp";
    case PotentialPreset::cosine_bump: return "cosine_bump";
    }
    return "zero";
}

Vec3 Potential::chordal(const Vec3& x) const {
    const double L = grid_.length();
    Vec3 s;
    for (int a = 0; a < 3; ++a) s[a] = L / std::numbers::pi * std::sin(std::numbers::pi * (x[a] - spec_.center[a]) / L);
    return s;
}

double Potential::value(const Vec3& x) const {
    if (is_zero()) return 0.0;
    const Vec3 s = chordal(x);
    const double A = spec_.amplitude, e = spec_.epsilon;
    const double s2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    switch (spec_.preset) {
    case PotentialPreset::gaussian_well: return -A * std::exp(-0.5 * e * e * s2);
    case PotentialPreset::smooth_ramp: return A * std::tanh(e * s[2]);
    case PotentialPreset::cosine_bump: return A * std::cos(e * std::sqrt(s2));
    case PotentialPreset::zero: break;
    }
    return 0.0;
}

Vec3 Potential::gradient(const Vec3& x) const {
    Vec3 out{0.0, 0.0, 0.0};
    if (is_zero()) return out;
    const Vec3 s = chordal(x);
    const double L = grid_.length();
    Vec3 ds;  // d s_j / d x_j
    for (int a = 0; a < 3; ++a) ds[a] = std::cos(std::numbers::pi * (x[a] - spec_.center[a]) / L);
    const double A = spec_.amplitude, e = spec_.epsilon;
    const double s2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    switch (spec_.preset) {
    case PotentialPreset::gaussian_well: {
        const double f = A * e * e * std::exp(-0.5 * e * e * s2);
        for (int a = 0; a < 3; ++a) out[a] = f * s[a] * ds[a];
        break;
    }
    case PotentialPreset::smooth_ramp: {
        const double t = std::tanh(e * s[2]);
        out[2] = A * e * (1.0 - t * t) * ds[2];
        break;
    }
    case PotentialPreset::cosine_bump: {
        const double r = std::sqrt(s2);
        // A cos(e r) has gradient -A e sin(e r) s / r, smooth at r = 0
        const double sinc = r > 1e-12 ? std::sin(e * r) / r : e;
        for (int a = 0; a < 3; ++a) out[a] = -A * e * sinc * s[a] * ds[a];
        break;
    }
    case PotentialPreset::zero: break;
    }
    return out;
}

Potential::Potential(const PotentialSpec& spec, const Grid& g, bool verify) : spec_(spec), grid_(g) {
    if (!(spec_.epsilon > 0.0) || !std::isfinite(spec_.epsilon))
        throw ParameterDomain("potential: epsilon must be positive");
    if (!std::isfinite(spec_.amplitude)) throw ParameterDomain("potential: amplitude must be finite");
    if (is_zero()) return;
    const int n = g.n();
    samples_.assign(g.size(), 0.0);
    for (auto& c : grad_samples_) c.assign(g.size(), 0.0);
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const Vec3 x{g.coord(ix), g.coord(iy), g.coord(iz)};
                samples_[idx] = value(x);
                const Vec3 gr = gradient(x);
                for (int a = 0; a < 3; ++a) grad_samples_[a][idx] = gr[a];
                max_grad_ = std::max(max_grad_, std::sqrt(gr[0] * gr[0] + gr[1] * gr[1] + gr[2] * gr[2]));
            }

    if (!verify) return;
    // Derivative hierarchy: every multi-index up to order 3.
    const double A = std::abs(spec_.amplitude), e = spec_.epsilon;
    auto sup = [](const RVec& f) {
        double m = 0.0;
        for (double x : f) m = std::max(m, std::abs(x));
        return m;
    };
    for (int a = 0; a < 3; ++a) {
        const RVec da = derivative(g, samples_, a);
        ratios_[0] = std::max(ratios_[0], sup(da) / (A * e));
        for (int b = a; b < 3; ++b) {
            const RVec dab = derivative(g, da, b);
            ratios_[1] = std::max(ratios_[1], sup(dab) / (A * e * e));
            for (int c = b; c < 3; ++c) ratios_[2] = std::max(ratios_[2], sup(derivative(g, dab, c)) / (A * e * e * e));
        }
    }
    for (int k = 0; k < 3; ++k)
        if (ratios_[k] > spec_.derivative_constant) {
            std::ostringstream ss;
            ss << "potential " << preset_name(spec_.preset) << ": order-" << k + 1 << " derivatives reach "
               << ratios_[k] << " * A * eps^" << k + 1 << ", above the allowed constant " << spec_.derivative_constant;
            throw ParameterDomain(ss.str());
        }
}

} // namespace hartree
