#include "hartree/spectral_analysis.hpp"
#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/spectral.hpp"

#include <json.hpp>

#include <limits>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hartree {

double kernel_tolerance(const GroundState& gs) { return std::max(1e-6, 10.0 * gs.residual * gs.mu); }

double boundary_mass_fraction(const Field& u) {
    const Grid& g = u.grid();
    const int n = g.n();
    const double edge = 0.35 * g.length();
    double inside = 0.0, total = 0.0;
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double a = std::norm(u[idx]);
                total += a;
                const double d = std::max({std::abs(g.coord(ix)), std::abs(g.coord(iy)), std::abs(g.coord(iz))});
                if (d > edge) inside += a;
            }
    return total > 0.0 ? inside / total : 0.0;
}

namespace {

SpectralReport analyse(const std::string& tag, const LinearOp& op, const LinearOp& restrict, const GroundState& gs,
                       int k, const std::vector<Field>& expected_kernel, const SpectralOptions& opts) {
    EigenOptions eo;
    eo.tol = opts.eig_tol;
    eo.block_size = opts.block_size;
    eo.max_basis = opts.max_basis;
    eo.seed = opts.seed;
    eo.shift = -2.0 * gs.mu;
    eo.restrict = restrict;
    const EigenResult er = lowest_eigenpairs(op, gs.field.grid(), k, eo);

    SpectralReport r;
    r.operator_tag = tag;
    r.eigenvalues = er.values;
    r.residuals = er.residuals;
    r.applications = er.applications;
    r.kernel_tol = kernel_tolerance(gs);
    r.eig_tol = opts.eig_tol;
    r.essential_onset_estimate = gs.mu - mu_lower_bound(gs.v, gs.m);
    std::vector<Field> kernel;
    for (std::size_t i = 0; i < er.values.size(); ++i) {
        const double lam = er.values[i];
        if (std::abs(lam) < r.kernel_tol) {
            ++r.kernel_dim;
            kernel.push_back(er.vectors[i]);
        } else if (lam < 0.0) {
            ++r.negative_count;
        } else if (r.gap == 0.0) {
            r.gap = lam;
        }
        if (std::abs(lam) < 0.5 * r.kernel_tol) ++r.kernel_dim_half_tol;
        r.boundary_mass.push_back(boundary_mass_fraction(er.vectors[i]));
        r.essential_artifact.push_back(r.boundary_mass.back() > opts.boundary_mass_tol);
    }
    if (!kernel.empty() && !expected_kernel.empty()) r.kernel_angles = principal_angles(kernel, expected_kernel);
    return r;
}

bool angles_ok(const SpectralReport& r, double tol) {
    if (r.kernel_angles.empty()) return false;
    return std::all_of(r.kernel_angles.begin(), r.kernel_angles.end(), [&](double a) { return a < tol; });
}

void require_unboosted(const GroundState& gs) {
    if (speed(gs.v) != 0.0) throw ContractViolation("kernel assumption check needs an unboosted ground state");
}

} // namespace

SpectralReport verify_kernel_assumption(const GroundState& gs0, const SpectralOptions& opts) {
    require_unboosted(gs0);
    HessianOperator H(gs0.field, gs0.v, gs0.mu, gs0.m);
    std::vector<Field> expected;
    for (int a = 0; a < 3; ++a) expected.push_back(real_part(derivative(gs0.field, a)));
    auto real_only = [](const Field& u) { return real_part(u); };
    SpectralReport r = analyse("L11", [&](const Field& u) { return H.apply(u); }, real_only, gs0, 4 + opts.extra,
                               expected, opts);
    r.pass = r.kernel_dim == 3 && r.kernel_dim_half_tol == 3 && angles_ok(r, opts.angle_tol) && r.gap > r.kernel_tol;
    return r;
}

SpectralReport l22_report(const GroundState& gs0, const SpectralOptions& opts) {
    require_unboosted(gs0);
    HessianOperator H(gs0.field, gs0.v, gs0.mu, gs0.m);
    auto imag_only = [](const Field& u) {
        Field w = u;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = cplx(0.0, u[i].imag());
        return w;
    };
    std::vector<Field> expected{apply_J(real_part(gs0.field))};
    SpectralReport r = analyse("L22", [&](const Field& u) { return H.apply(u); }, imag_only, gs0, 1 + opts.extra,
                               expected, opts);
    r.pass = r.kernel_dim == 1 && r.kernel_dim_half_tol == 1 && r.negative_count == 0 && !r.eigenvalues.empty() &&
             std::abs(r.eigenvalues.front()) < r.kernel_tol && angles_ok(r, opts.angle_tol) && r.gap > r.kernel_tol;
    return r;
}

SpectralReport full_spectrum_report(const GroundState& gs, const SpectralOptions& opts) {
    HessianOperator H(gs.field, gs.v, gs.mu, gs.m);
    std::vector<Field> expected;
    for (int a = 0; a < 3; ++a) expected.push_back(derivative(gs.field, a));
    expected.push_back(apply_J(gs.field));
    SpectralReport r = analyse("Lfull", [&](const Field& u) { return H.apply(u); }, {}, gs, 5 + opts.extra,
                               expected, opts);
    r.pass = r.negative_count == 1 && r.kernel_dim == 4 && r.kernel_dim_half_tol == 4 && r.gap > r.kernel_tol &&
             angles_ok(r, opts.angle_tol);
    return r;
}

std::string to_json(const SpectralReport& r) {
    nlohmann::json j;
    j["operator_tag"] = r.operator_tag;
    j["eigenvalues"] = r.eigenvalues;
    j["residuals"] = r.residuals;
    j["boundary_mass"] = r.boundary_mass;
    j["essential_artifact"] = r.essential_artifact;
    j["kernel_dim"] = r.kernel_dim;
    j["kernel_dim_half_tol"] = r.kernel_dim_half_tol;
    j["negative_count"] = r.negative_count;
    j["gap"] = r.gap;
    j["essential_onset_estimate"] = r.essential_onset_estimate;
    j["kernel_tol"] = r.kernel_tol;
    j["eig_tol"] = r.eig_tol;
    j["kernel_angles"] = r.kernel_angles;
    j["operator_applications"] = r.applications;
    j["pass"] = r.pass;
    return j.dump(2);
}

CoercivityResult coercivity_estimate(const GroundState& gs, const TangentFrame& frame, const Matrix8d& omega,
                                     int n_samples, std::uint64_t seed, double constraint_tol) {
    const Eigen::FullPivLU<Matrix8d> lu(omega);
    if (!lu.isInvertible()) throw ContractViolation("coercivity: symplectic matrix is singular");
    const Matrix8d inv = lu.inverse();
    HessianOperator H(gs.field, gs.v, gs.mu, gs.m);
    CoercivityResult out;
    out.rho = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        Field xi = smooth_random_field(gs.field.grid(), seed + static_cast<std::uint64_t>(s));
        xi = skew_project(xi, frame, inv);
        // a second pass removes the round-off left by the first
        xi = skew_project(xi, frame, inv);
        const double nrm = norm(xi);
        xi *= 1.0 / nrm;
        const double c = skew_constraint(xi, frame);
        out.max_constraint = std::max(out.max_constraint, c);
        if (c > constraint_tol) {
            std::ostringstream ss;
            ss << "coercivity: projected field violates the constraints by " << c;
            throw ContractViolation(ss.str());
        }
        const double hh = h_half_norm(xi);
        const double quotient = inner(xi, H.apply(xi)) / (hh * hh);
        out.rho = std::min(out.rho, quotient);
        sum += quotient;
        ++out.samples;
    }
    out.mean = out.samples ? sum / out.samples : 0.0;
    return out;
}

} // namespace hartree
