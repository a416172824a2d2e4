#include "hartree/decomposition.hpp"

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/lanczos.hpp"
#include "hartree/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hartree {

Vector8d to_vector(const SolitonParams& p) {
    Vector8d x;
    x << p.y[0], p.y[1], p.y[2], p.v[0], p.v[1], p.v[2], p.theta, p.mu;
    return x;
}

SolitonParams from_vector(const Vector8d& x) {
    SolitonParams p;
    p.y = {x(0), x(1), x(2)};
    p.v = {x(3), x(4), x(5)};
    p.theta = x(6);
    p.mu = x(7);
    return p;
}

double wrap_phase(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t < 0.0) t += two_pi;
    if (t >= two_pi) t -= two_pi;
    return t;
}

Field to_lab_frame(const Field& u, const SolitonParams& p) { return rotate_phase(translate(u, p.y), p.theta); }

Field to_soliton_frame(const Field& psi, const SolitonParams& p) {
    return translate(rotate_phase(psi, -p.theta), {-p.y[0], -p.y[1], -p.y[2]});
}

TangentFrame frame_from_sample(const FamilySample& s) {
    TangentFrame f{{derivative(s.phi, 0), derivative(s.phi, 1), derivative(s.phi, 2), s.tangent[0], s.tangent[1],
                    s.tangent[2], apply_J(s.phi), s.tangent[3]}};
    return f;
}

Field soliton_field(FamilyTable& table, const SolitonParams& p) {
    return to_lab_frame(table.sample(p.v, p.mu).phi, p);
}

TangentFrame lab_frame(FamilyTable& table, const SolitonParams& p) {
    TangentFrame f = frame_from_sample(table.sample(p.v, p.mu));
    for (auto& z : f.z) z = to_lab_frame(z, p);
    return f;
}

namespace {

Vector8d constraints(const Field& xi, const TangentFrame& f) {
    Vector8d g;
    for (int j = 0; j < 8; ++j) g(j) = symplectic_form(xi, f.z[j]);
    return g;
}

// d G_j / d zeta_k in the soliton frame, where G_j = omega(w - phi, z_j) and
// w = exp(theta J) psi(x + y).
Matrix8d jacobian(const Field& w, const Field& xi, const FamilySample& s, const TangentFrame& f) {
    Matrix8d jac = Matrix8d::Zero();
    const auto dw = gradient(w);
    std::array<Field, 3> dxi{dw[0] - f.z[0], dw[1] - f.z[1], dw[2] - f.z[2]};
    const Field jw = apply_J(w);
    for (int j = 0; j < 8; ++j) {
        for (int k = 0; k < 3; ++k) jac(j, k) = symplectic_form(dw[k], f.z[j]);
        jac(j, 6) = symplectic_form(jw, f.z[j]);
        for (int k = 0; k < 3; ++k) jac(j, 3 + k) = -symplectic_form(s.tangent[k], f.z[j]);
        jac(j, 7) = -symplectic_form(s.tangent[3], f.z[j]);
    }
    // Frame motion: d z_j / d zeta_k paired with xi. Tangents depend on v3
    // and mu only; d_x and J commute with the parameter derivatives.
    for (int k = 0; k < 4; ++k) {
        const int col = k < 3 ? 3 + k : 7;
        for (int i = 0; i < 3; ++i) jac(i, col) += -symplectic_form(dxi[i], s.tangent[k]);
        jac(6, col) += inner(xi, s.tangent[k]);
    }
    if (s.has_derivatives)
        for (int i = 0; i < 4; ++i) {
            const int row = i < 3 ? 3 + i : 7;
            jac(row, 5) += symplectic_form(xi, s.d_speed[i]);
            jac(row, 7) += symplectic_form(xi, s.d_frequency[i]);
        }
    return jac;
}

} // namespace

Decomposition skew_decompose(const Field& psi, const SolitonParams& guess, FamilyTable& table,
                             const DecompositionOptions& opts, double time) {
    psi.require_finite("skew_decompose");
    const double scale = opts.tol * inner(psi, psi);
    Decomposition out(psi.grid());
    Vector8d zeta = to_vector(guess);
    for (int it = 0;; ++it) {
        SolitonParams p = from_vector(zeta);
        FamilySample s(psi.grid());
        try {
            s = table.sample(p.v, p.mu, true);
        } catch (const DomainExit& e) {
            throw DecompositionLost(std::string("skew_decompose: ") + e.what(), time);
        }
        const TangentFrame f = frame_from_sample(s);
        const Field w = to_soliton_frame(psi, p);
        Field xi = w - s.phi;
        const Vector8d g = constraints(xi, f);
        const double gmax = g.cwiseAbs().maxCoeff();
        out.history.push_back(gmax);
        if (gmax < scale) {
            p.theta = wrap_phase(p.theta);
            out.params = p;
            out.residual_field = std::move(xi);
            out.constraint_norm = gmax;
            out.iterations = it;
            return out;
        }
        if (it >= opts.max_steps || !std::isfinite(gmax)) {
            std::ostringstream ss;
            ss << "skew_decompose: no convergence after " << it << " Newton steps, max |G| = " << gmax
               << " (tolerance " << scale << ")";
            throw DecompositionLost(ss.str(), time);
        }
        const Matrix8d jac = jacobian(w, xi, s, f);
        const Vector8d step = jac.fullPivLu().solve(-g);
        zeta += (it < opts.damped_steps ? opts.damping : 1.0) * step;
    }
}

Field skew_orthogonal_perturbation(FamilyTable& table, const Vec3& v, double mu, std::uint64_t seed, double x_norm,
                                   double eps) {
    const FamilySample s = table.sample(v, mu);
    const Field noise = smooth_random_field(s.phi.grid(), seed, false);
    double peak = 0.0;
    for (std::size_t i = 0; i < s.phi.size(); ++i) peak = std::max(peak, std::abs(s.phi[i]));
    Field raw(s.phi.grid());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = noise[i] * (std::abs(s.phi[i]) / peak);
    project_band(raw);
    const TangentFrame f = frame_from_sample(s);
    Field xi = skew_project(raw, f, omega_matrix(f).inverse);
    xi *= x_norm / norms(xi, eps).x_weight;
    return xi;
}

Vec3 circular_centroid(const Field& u) {
    const Grid& g = u.grid();
    const int n = g.n();
    const double L = g.length();
    std::array<cplx, 3> acc{};
    std::vector<cplx> ph(n);
    for (int i = 0; i < n; ++i) ph[i] = std::polar(1.0, 2.0 * std::numbers::pi * g.coord(i) / L);
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double r = std::norm(u[idx]);
                acc[0] += r * ph[ix];
                acc[1] += r * ph[iy];
                acc[2] += r * ph[iz];
            }
    Vec3 c;
    for (int j = 0; j < 3; ++j) c[j] = L / (2.0 * std::numbers::pi) * std::arg(acc[j]);
    return c;
}

Projection orthogonal_project(const Field& psi, FamilyTable& table, const ProjectionOptions& opts) {
    psi.require_finite("orthogonal_project");
    const Grid& g = psi.grid();
    const FamilyTableOptions& to = table.options();
    SolitonParams p;
    p.y = circular_centroid(psi);
    p.mu = std::clamp(opts.mu_hint.value_or(0.5 * (to.mu_min + to.mu_max)), to.mu_min, to.mu_max);
    if (opts.v_hint) {
        p.v = *opts.v_hint;
    } else {
        const double gamma0 = table.scalars({0.0, 0.0, 0.0}, p.mu).gamma(0, 0);
        const Vec3 P = momentum(psi);
        const double N = mass(psi);
        const double cap = std::max(0.0, to.max_speed - to.speed_step);
        for (int j = 0; j < 3; ++j) p.v[j] = P[j] / (gamma0 * N);
        p.v[0] = std::clamp(p.v[0], -to.transverse_limit, to.transverse_limit);
        p.v[1] = std::clamp(p.v[1], -to.transverse_limit, to.transverse_limit);
        p.v[2] = std::clamp(p.v[2], -cap, cap);
    }
    {
        const Field phi = translate(table.sample(p.v, p.mu).phi, p.y);
        cplx ov(0.0, 0.0);
        for (std::size_t i = 0; i < psi.size(); ++i) ov += std::conj(phi[i]) * psi[i];
        p.theta = std::arg(ov);
    }

    // X metric: (1 + k^2)^(1/2) plus eps |x| about the origin.
    const Multiplier half = make_multiplier(g, [](double kx, double ky, double kz) {
        return std::sqrt(1.0 + kx * kx + ky * ky + kz * kz);
    });
    RVec radius(g.size());
    {
        std::size_t idx = 0;
        const int n = g.n();
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix, ++idx) {
                    const Vec3 d = g.displacement(ix, iy, iz, {0.0, 0.0, 0.0});
                    radius[idx] = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
                }
    }
    auto metric = [&](const Field& u) {
        Field r = half.apply(u);
        for (std::size_t i = 0; i < u.size(); ++i) r[i] += opts.eps * radius[i] * u[i];
        return r;
    };
    const double psi_x = std::sqrt(inner(psi, metric(psi)));

    Projection out;
    Vector8d zeta = to_vector(p);
    double dist = 0.0;
    for (int it = 0; it < opts.max_steps; ++it) {
        p = from_vector(zeta);
        const FamilySample s = table.sample(p.v, p.mu);
        const Field w = to_soliton_frame(psi, p);
        const Field r = w - s.phi;
        const Field wr = metric(r);
        dist = std::sqrt(std::max(0.0, inner(r, wr))) / psi_x;
        const auto dw = gradient(w);
        std::array<Field, 8> cols{dw[0], dw[1], dw[2], (-1.0) * s.tangent[0], (-1.0) * s.tangent[1],
                                  (-1.0) * s.tangent[2], apply_J(w), (-1.0) * s.tangent[3]};
        std::array<Field, 8> wcols{metric(cols[0]), metric(cols[1]), metric(cols[2]), metric(cols[3]),
                                   metric(cols[4]), metric(cols[5]), metric(cols[6]), metric(cols[7])};
        Matrix8d A;
        Vector8d b;
        for (int k = 0; k < 8; ++k) {
            b(k) = inner(cols[k], wr);
            for (int l = 0; l < 8; ++l) A(k, l) = inner(cols[k], wcols[l]);
        }
        Vector8d step = A.ldlt().solve(-b);
        // Keep the velocity and frequency updates inside one node spacing.
        double shrink = 1.0;
        for (int k = 3; k < 6; ++k) shrink = std::min(shrink, to.speed_step / std::max(std::abs(step(k)), 1e-300));
        shrink = std::min(shrink, to.frequency_step / std::max(std::abs(step(7)), 1e-300));
        zeta += std::min(1.0, shrink) * step;
        const SolitonParams trial = from_vector(zeta);
        if (!table.inside(trial.v, trial.mu)) {
            zeta(7) = std::clamp(zeta(7), to.mu_min, to.mu_max);
            zeta(5) = std::clamp(zeta(5), -to.max_speed, to.max_speed);
        }
        out.iterations = it + 1;
        if (step.cwiseAbs().maxCoeff() < 1e-10) break;
    }
    p = from_vector(zeta);
    {
        const Field r = to_soliton_frame(psi, p) - table.sample(p.v, p.mu).phi;
        dist = std::sqrt(std::max(0.0, inner(r, metric(r)))) / psi_x;
    }
    p.theta = wrap_phase(p.theta);
    out.params = p;
    out.distance = dist;
    if (!(dist <= opts.threshold)) {
        std::ostringstream ss;
        ss << "orthogonal_project: relative X distance " << dist << " above threshold " << opts.threshold;
        throw NotNearManifold(ss.str());
    }
    return out;
}

} // namespace hartree
