#include "hartree/groundstate.hpp"
#include "hartree/errors.hpp"
#include "hartree/fft.hpp"
#include "hartree/functionals.hpp"
#include "hartree/linear_solvers.hpp"
#include "hartree/spectral.hpp"
#include "hartree/symmetry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hartree {

double mu_lower_bound(const Vec3& v, double m) {
    require_subluminal(v, "mu_lower_bound");
    const double s = speed(v);
    // 1 - sqrt(1 - s^2) written to avoid cancellation
    return s * s / (1.0 + std::sqrt(1.0 - s * s)) * m;
}

void require_frequency_window(const Vec3& v, double mu, double m, double margin) {
    if (!(m > 0.0)) throw ParameterDomain("mass parameter m must be positive");
    const double lo = mu_lower_bound(v, m);
    if (!(mu > lo + margin)) {
        std::ostringstream ss;
        ss << "frequency mu=" << mu << " must exceed mu_l(|v|)+margin=" << lo + margin;
        throw ParameterDomain(ss.str());
    }
}

double boundary_ratio(const Field& u) {
    const Grid& g = u.grid();
    const int n = g.n();
    const double peak = u.max_abs();
    if (peak == 0.0) return 0.0;
    double edge = 0.0;
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx)
                if (ix == 0 || iy == 0 || iz == 0) edge = std::max(edge, std::abs(u[idx]));
    return edge / peak;
}

namespace {

Field gaussian_seed(const Grid& g, double width) {
    Field u(g);
    const int n = g.n();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double r2 = g.coord(ix) * g.coord(ix) + g.coord(iy) * g.coord(iy) + g.coord(iz) * g.coord(iz);
                u[idx] = std::exp(-0.5 * r2 / (width * width));
            }
    return u;
}

// Density centroid by minimum image around the peak.
Vec3 centroid(const Field& u) {
    const Grid& g = u.grid();
    const int n = g.n();
    std::size_t ipk = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (std::norm(u[i]) > best) best = std::norm(u[i]), ipk = i;
    const Vec3 pk{g.coord(static_cast<int>(ipk % n)), g.coord(static_cast<int>((ipk / n) % n)),
                  g.coord(static_cast<int>(ipk / (static_cast<std::size_t>(n) * n)))};
    Vec3 c{0.0, 0.0, 0.0};
    double w = 0.0;
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double r = std::norm(u[idx]);
                const Vec3 d = g.displacement(ix, iy, iz, pk);
                for (int j = 0; j < 3; ++j) c[j] += r * d[j];
                w += r;
            }
    for (int j = 0; j < 3; ++j) c[j] = pk[j] + c[j] / w;
    return c;
}

// Translation and phase gauge fixing for directions without a lattice
// symmetry: centroid at the origin, zero overlap with J * reference.
Field fix_gauge(const Field& u, const Field& reference) {
    const Vec3 c = centroid(u);
    Field r = translate(u, {-c[0], -c[1], -c[2]});
    cplx ov(0.0, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) ov += std::conj(reference[i]) * r[i];
    return rotate_phase(r, -std::arg(ov));
}

struct Symmetrizer {
    std::vector<LatticeSymmetry> group;
    bool make_real = false;
    bool gauge = false;
    Field reference;

    Field operator()(const Field& u) const {
        if (make_real) return real_part(group_average(u, group));
        if (!group.empty()) return group_average(u, group);
        if (gauge) return fix_gauge(u, reference);
        return u;
    }
};

Symmetrizer make_symmetrizer(const Vec3& v, const Field& reference) {
    Symmetrizer s{{}, false, false, reference};
    if (speed(v) == 0.0) {
        s.group = octahedral_group();
        s.make_real = true;
    } else if (int a = aligned_axis(v); a >= 0) {
        s.group = axial_group(a);
    } else {
        s.gauge = true;
    }
    return s;
}

Field apply_inverse_symbol(const Multiplier& S, const Field& u) {
    Field r = u;
    fft_forward(u.grid(), r.data());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] /= S.symbol[i];
    fft_inverse(u.grid(), r.data());
    return r;
}

// Newton step E''(phi) d = -E'(phi) restricted to the complement of the
// kernel directions.
Field newton_correction(const Field& phi, const Vec3& v, double mu, double m, const Field& grad, const Multiplier& S) {
    HessianOperator L(phi, v, mu, m);
    std::vector<Field> kern = {derivative(phi, 0), derivative(phi, 1), derivative(phi, 2), apply_J(phi)};
    auto Q = orthonormalize(kern);
    LinearOp A = [&](const Field& x) { return project_out(L.apply(project_out(x, Q)), Q); };
    LinearOp M = [&](const Field& x) { return project_out(apply_inverse_symbol(S, project_out(x, Q)), Q); };
    SolveReport rep;
    Field rhs = project_out((-1.0) * grad, Q);
    return minres(A, rhs, M, 1e-6, 400, &rep);
}

} // namespace

GroundState refine(const Field& start, const Vec3& v, double mu, double m, const GroundStateOptions& opts,
                   const std::string& seed) {
    require_subluminal(v, "ground state");
    require_frequency_window(v, mu, m, 0.0);
    const Grid& g = start.grid();
    const Multiplier S = linear_part(g, v, mu, m);
    for (double s : S.symbol)
        if (!(s > 0.0)) throw ParameterDomain("ground state: boosted resolvent symbol is not positive");

    Symmetrizer sym = make_symmetrizer(v, start);
    const int period = std::max(1, opts.symmetrize_every);

    Field phi = sym(band_limited(start));
    double res = 0.0, nphi = 1.0;
    int it = 0;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (; it < opts.max_iter; ++it) {
        Field nl = nonlinear_term(phi);
        Field sphi = S.apply(phi);
        Field grad = sphi - nl;
        res = norm(grad);
        nphi = norm(phi);
        if (res < opts.tol * nphi) break;
        if (res < 0.9 * best) {
            best = res;
            since_best = 0;
        } else if (++since_best > 60) {
            break;
        }
        const double num = inner(phi, sphi);
        const double den = inner(phi, nl);
        if (!(num > 0.0) || !(den > 0.0))
            throw SolverFailure("ground state: renormalization factor lost positivity", res);
        const double factor = std::pow(num / den, 1.5);
        phi = factor * apply_inverse_symbol(S, nl);
        if ((it + 1) % period == 0) phi = sym(phi);
        if (!phi.all_finite()) throw SolverFailure("ground state: iteration produced non-finite values", res);
    }

    // Newton refinement if the renormalized iteration stalled above tolerance.
    for (int k = 0; k < opts.newton_steps && !(res < opts.tol * nphi); ++k) {
        Field grad = action_gradient(phi, v, mu, m);
        phi += newton_correction(phi, v, mu, m, grad, S);
        phi = sym(phi);
        res = norm(action_gradient(phi, v, mu, m));
        nphi = norm(phi);
        ++it;
    }
    if (!(res < opts.tol * nphi)) {
        std::ostringstream ss;
        ss << "ground state did not converge: relative residual " << res / nphi << " after " << it << " iterations";
        throw SolverFailure(ss.str(), res);
    }

    GroundState gs{phi};
    gs.v = v;
    gs.mu = mu;
    gs.m = m;
    gs.residual = res;
    gs.relative_residual = res / nphi;
    gs.mass_n = mass(phi);
    gs.boundary_ratio = boundary_ratio(phi);
    gs.iterations = it;
    gs.seed = seed;
    if (opts.check_boundary && gs.boundary_ratio > opts.boundary_tol) {
        std::ostringstream ss;
        ss << "box too small: boundary amplitude " << gs.boundary_ratio << " of peak exceeds " << opts.boundary_tol;
        throw BoxTooSmall(ss.str());
    }
    return gs;
}

GroundState solve_unboosted(double mu, double m, const Grid& grid, const GroundStateOptions& opts) {
    if (!(mu > 0.0)) throw ParameterDomain("solve_unboosted: mu must be positive");
    std::ostringstream seed;
    seed << "gaussian width " << opts.seed_width;
    return refine(gaussian_seed(grid, opts.seed_width), {0.0, 0.0, 0.0}, mu, m, opts, seed.str());
}

GroundState solve_boosted(const Vec3& v, double mu, double m, const Grid& grid, const GroundStateOptions& opts,
                          const GroundState* warm) {
    require_subluminal(v, "solve_boosted");
    if (speed(v) > 0.6 + 1e-12) throw ParameterDomain("solve_boosted: |v| above the supported limit 0.6");
    require_frequency_window(v, mu, m, opts.mu_margin * m);
    if (warm && warm->field.grid() == grid) {
        const Vec3& w = warm->v;
        const double dv = std::sqrt((w[0] - v[0]) * (w[0] - v[0]) + (w[1] - v[1]) * (w[1] - v[1]) + (w[2] - v[2]) * (w[2] - v[2]));
        if (dv <= opts.continuation_step + 1e-12) return refine(warm->field, v, mu, m, opts, warm->seed + "; warm start");
    }
    GroundState cur = solve_unboosted(mu, m, grid, opts);
    const double s = speed(v);
    if (s == 0.0) return cur;
    const int steps = static_cast<int>(std::ceil(s / opts.continuation_step - 1e-12));
    GroundStateOptions loose = opts;
    loose.check_boundary = false;
    loose.tol = std::max(opts.tol, 1e-7);
    for (int k = 1; k <= steps; ++k) {
        const double f = static_cast<double>(k) / steps;
        const Vec3 vk{v[0] * f, v[1] * f, v[2] * f};
        cur = refine(cur.field, vk, mu, m, k == steps ? opts : loose, cur.seed + "; continued in v");
    }
    return cur;
}

TangentFrame tangent_frame(const GroundState& gs, double rtol) {
    const Field& phi = gs.field;
    HessianOperator L(phi, gs.v, gs.mu, gs.m);
    const Multiplier S = linear_part(phi.grid(), gs.v, gs.mu, gs.m);
    TangentFrame f{{derivative(phi, 0), derivative(phi, 1), derivative(phi, 2), Field(phi.grid()), Field(phi.grid()),
                    Field(phi.grid()), apply_J(phi), Field(phi.grid())}};
    auto Q = orthonormalize({f.z[0], f.z[1], f.z[2], f.z[6]});
    LinearOp A = [&](const Field& x) { return project_out(L.apply(project_out(x, Q)), Q); };
    LinearOp M = [&](const Field& x) { return project_out(apply_inverse_symbol(S, project_out(x, Q)), Q); };

    auto solve = [&](const Field& rhs) {
        SolveReport rep;
        Field u = minres(A, project_out(rhs, Q), M, rtol, 3000, &rep);
        f.solver_iterations += rep.iterations;
        if (!rep.converged) throw SolverFailure("tangent frame: MINRES stagnated", rep.relative_residual);
        return project_out(u, Q);
    };

    const Field mphi = (-1.0) * phi;
    f.z[7] = solve(mphi);
    f.frequency_residual = norm(L.apply(f.z[7]) - mphi);
    for (int j = 0; j < 3; ++j) {
        const Field rhs = apply_J(f.z[j]);
        f.z[3 + j] = solve(rhs);
        f.velocity_residual[j] = norm(L.apply(f.z[3 + j]) - rhs);
        f.kernel_residual[j] = norm(L.apply(f.z[j]));
    }
    f.kernel_residual[3] = norm(L.apply(f.z[6]));
    return f;
}

TangentFrame finite_difference_frame(const GroundState& gs, double step, const GroundStateOptions& opts) {
    TangentFrame f = tangent_frame(gs);
    GroundStateOptions o = opts;
    o.check_boundary = false;
    o.tol = std::min(opts.tol, 1e-11);
    auto at = [&](const Vec3& v, double mu) { return refine(gs.field, v, mu, gs.m, o, "finite difference").field; };
    f.z[7] = (0.5 / step) * (at(gs.v, gs.mu + step) - at(gs.v, gs.mu - step));
    for (int j = 0; j < 3; ++j) {
        Vec3 vp = gs.v, vm = gs.v;
        vp[j] += step;
        vm[j] -= step;
        f.z[3 + j] = (0.5 / step) * (at(vp, gs.mu) - at(vm, gs.mu));
    }
    return f;
}

FamilyScalars family_scalars(const GroundState& gs, const TangentFrame& fr, bool require_stable) {
    FamilyScalars s;
    const Field& phi = gs.field;
    s.n = mass(phi);
    s.n_mu = inner(fr.z[7], phi);
    HessianOperator L(phi, gs.v, gs.mu, gs.m);
    std::array<Field, 3> Lv = {L.apply(fr.z[3]), L.apply(fr.z[4]), L.apply(fr.z[5])};
    for (int j = 0; j < 3; ++j) {
        s.n_v(j) = inner(fr.z[3 + j], phi);
        for (int k = 0; k < 3; ++k) {
            // omega(u, w) = -<u, J w>
            s.tau(j, k) = -inner(fr.z[j], apply_J(fr.z[3 + k]));
            s.tau_hessian(j, k) = inner(Lv[j], fr.z[3 + k]);
        }
    }
    if (require_stable && !(s.n_mu > 0.0)) {
        std::ostringstream ss;
        ss << "stability condition violated: d_mu N = " << s.n_mu << " at mu=" << gs.mu;
        throw StabilityViolation(ss.str());
    }
    s.gamma = (s.tau + s.n_v * s.n_v.transpose() / s.n_mu) / s.n;
    return s;
}

double distance_modulo_kernel(const Field& a, const Field& b, const TangentFrame& frame) {
    auto Q = orthonormalize({frame.z[0], frame.z[1], frame.z[2], frame.z[6]});
    return norm(project_out(a - b, Q)) / norm(a);
}

namespace {

// Slope of log(r <|u|>) against r, where <|u|> averages |u| over radial bins
// of width h restricted to a cone of half-angle 30 degrees about `dir`
// (both senses) or, for the transverse fit, to a band within 30 degrees of
// the plane orthogonal to `dir`. Cone averages keep the fit away from the
// lattice axis lines, where band truncation rings at the tail level.
double cone_decay(const Field& u, const Vec3& dir, bool transverse) {
    const Grid& g = u.grid();
    const int n = g.n();
    const double L = g.length(), h = g.spacing();
    const double r0 = 0.25 * L, r1 = 0.4 * L;
    const int bins = static_cast<int>((r1 - r0) / h);
    std::vector<double> sum(bins, 0.0), cnt(bins, 0.0);
    const double c30 = std::cos(std::numbers::pi / 6.0), s30 = 0.5;
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                const double r = std::sqrt(x * x + y * y + z * z);
                if (r < r0 || r >= r0 + bins * h) continue;
                const double c = std::abs(x * dir[0] + y * dir[1] + z * dir[2]) / r;
                if (transverse ? c > s30 : c < c30) continue;
                const int b = static_cast<int>((r - r0) / h);
                sum[b] += std::abs(u[idx]);
                cnt[b] += 1.0;
            }
    std::vector<double> rs, ys;
    double prev = std::numeric_limits<double>::infinity();
    for (int b = 0; b < bins; ++b) {
        if (cnt[b] == 0.0) continue;
        const double a = sum[b] / cnt[b];
        if (!(a > 0.0) || a >= prev) throw FitFailure("decay fit: tail is not monotone");
        prev = a;
        const double r = r0 + (b + 0.5) * h;
        rs.push_back(r);
        ys.push_back(std::log(r * a));
    }
    if (rs.size() < 4) throw FitFailure("decay fit: too few tail samples");
    double mr = 0.0, my = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i) mr += rs[i], my += ys[i];
    mr /= rs.size();
    my /= rs.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i) sxy += (rs[i] - mr) * (ys[i] - my), sxx += (rs[i] - mr) * (rs[i] - mr);
    return -sxy / sxx;
}

} // namespace

DecayFit decay_rate(const GroundState& gs) {
    const double s0 = speed(gs.v);
    const Vec3 dir = s0 > 0.0 ? Vec3{gs.v[0] / s0, gs.v[1] / s0, gs.v[2] / s0} : Vec3{0.0, 0.0, 1.0};
    DecayFit f;
    f.along = cone_decay(gs.field, dir, false);
    f.across = cone_decay(gs.field, dir, true);
    f.rate = std::min(f.along, f.across);
    const double s = speed(gs.v);
    f.bound = std::min(gs.m, (gs.mu - mu_lower_bound(gs.v, gs.m)) / std::sqrt(1.0 - s * s));
    if (!(f.rate > 0.0)) throw FitFailure("decay fit: non-positive rate");
    return f;
}

} // namespace hartree
