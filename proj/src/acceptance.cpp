#include "hartree/acceptance.hpp"

#include "hartree/decomposition.hpp"
#include "hartree/errors.hpp"
#include "hartree/evolution.hpp"
#include "hartree/family.hpp"
#include "hartree/functionals.hpp"
#include "hartree/io.hpp"
#include "hartree/lanczos.hpp"
#include "hartree/modulation.hpp"
#include "hartree/prhf.hpp"
#include "hartree/spectral.hpp"
#include "hartree/spectral_analysis.hpp"
#include "hartree/symplectic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace hartree {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double x, int digits = 2) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*e", digits, x);
    return buf;
}

std::string fixed(double x, int digits = 2) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

CriterionResult named(int id, const std::string& name) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    return r;
}

std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

double vmax(const Vec3& a) { return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])}); }

std::string grid_tag(const Grid& g) {
    std::ostringstream s;
    s << "n" << g.n() << "_L" << g.length();
    return s.str();
}

// Shared, lazily built states. Everything expensive is computed once per
// run and, where it is a solved profile, kept in the cache directory.
class Context {
public:
    explicit Context(const AcceptanceOptions& o) : opts(o), cfg(o.config) {
        if (!opts.cache_dir.empty()) fs::create_directories(opts.cache_dir);
        if (!opts.out_dir.empty()) fs::create_directories(opts.out_dir);
    }

    void log(const std::string& s) const {
        if (opts.log) opts.log(s);
    }

    Grid reference_grid() const { return Grid(cfg.n, cfg.box_length); }
    Grid spectral_grid() const { return Grid(cfg.spectral_n, cfg.box_length); }
    Grid scaling_grid() const { return Grid(cfg.scaling_n, cfg.box_length); }

    std::string cache_path(const std::string& name) const {
        return opts.cache_dir.empty() ? std::string() : (fs::path(opts.cache_dir) / name).string();
    }

    // Completes a state read back from disk.
    GroundState rebuild(Field f, const Vec3& v, double mu, const std::string& seed) const {
        GroundState gs(std::move(f));
        gs.v = v;
        gs.mu = mu;
        gs.m = cfg.m;
        gs.residual = norm(action_gradient(gs.field, v, mu, cfg.m));
        gs.relative_residual = gs.residual / norm(gs.field);
        gs.mass_n = mass(gs.field);
        gs.boundary_ratio = boundary_ratio(gs.field);
        gs.seed = seed;
        return gs;
    }

    void remember(const std::string& name, const GroundState& gs) const {
        const std::string p = cache_path(name);
        if (!p.empty()) write_prhf(p, gs.field, cfg.m);
    }

    std::optional<GroundState> recall(const std::string& name, const Grid& g, const Vec3& v, double mu) const {
        const std::string p = cache_path(name);
        if (p.empty() || !fs::exists(p)) return std::nullopt;
        PrhfFile f = read_prhf(p);
        if (f.field.grid() != g || f.mass_parameter != cfg.m) return std::nullopt;
        return rebuild(std::move(f.field), v, mu, "cache " + p);
    }

    std::string unboosted_name(const Grid& g) const {
        return "unboosted_" + grid_tag(g) + "_mu" + format_double(cfg.soliton_mu) + ".prhf";
    }

    // Unboosted ground state at the reference frequency on grid g.
    const GroundState& unboosted(const Grid& g) {
        auto it = unboosted_.find(g.n());
        if (it != unboosted_.end()) return it->second;
        const std::string name = unboosted_name(g);
        std::optional<GroundState> gs = recall(name, g, {0.0, 0.0, 0.0}, cfg.soliton_mu);
        if (!gs || gs->relative_residual > 10.0 * cfg.solver_tol) {
            log("solving unboosted ground state on " + grid_tag(g));
            gs = solve_unboosted(cfg.soliton_mu, cfg.m, g, cfg.solver_options());
            remember(name, *gs);
        }
        return unboosted_.emplace(g.n(), std::move(*gs)).first->second;
    }

    void adopt_unboosted(const GroundState& gs) {
        unboosted_.erase(gs.field.grid().n());
        unboosted_.emplace(gs.field.grid().n(), gs);
        remember(unboosted_name(gs.field.grid()), gs);
    }

    FamilyTable& table(const Grid& g) {
        auto it = tables_.find(g.n());
        if (it != tables_.end()) return *it->second;
        FamilyTableOptions o = cfg.family_options();
        if (o.cache_dir.empty() && !opts.cache_dir.empty())
            o.cache_dir = (fs::path(opts.cache_dir) / ("family_" + grid_tag(g))).string();
        if (!o.cache_dir.empty()) fs::create_directories(o.cache_dir);
        auto t = std::make_unique<FamilyTable>(g, cfg.m, o);
        return *tables_.emplace(g.n(), std::move(t)).first->second;
    }

    // Profile from the family table as a ground state with fresh residuals.
    GroundState family_state(FamilyTable& t, const Vec3& v, double mu) {
        FamilySample s = t.sample(v, mu);
        return rebuild(std::move(s.phi), v, mu, "family table");
    }

    ScalingConfig scaling_config(double xi0_fraction) const {
        ScalingConfig sc;
        sc.epsilons = cfg.epsilons;
        sc.track.evolution.dt = cfg.dt;
        sc.track.evolution.monitor_stride = cfg.monitor_stride;
        sc.track.evolution.m = cfg.m;
        sc.track.decomposition = cfg.decomposition_options();
        sc.track.projection.threshold = cfg.manifold_threshold;
        sc.potential = cfg.potential;
        sc.initial = cfg.soliton();
        sc.xi0_fraction = xi0_fraction;
        sc.xi0_seed = cfg.seed_perturbation;
        sc.t_budget = cfg.t_budget;
        sc.exponent_lo = cfg.exponent_lo;
        sc.exponent_hi = cfg.exponent_hi;
        return sc;
    }

    const ScalingReport& scaling(bool perturbed) {
        auto& slot = perturbed ? perturbed_ : unperturbed_;
        if (slot) return *slot;
        FamilyTable& t = table(scaling_grid());
        const double frac = perturbed ? cfg.xi0_fraction : 0.0;
        log(std::string("scaling study (") + (perturbed ? "xi0 = " + short_num(frac) + " eps" : "xi0 = 0") + ")");
        slot = scaling_study(scaling_config(frac), t, [&](const ScalingRun& r) {
            log("  eps " + short_num(r.epsilon) + ": t " + fixed(r.t_reached, 1) + "/" + fixed(r.t_target, 1) +
                " " + r.status + " in " + fixed(r.seconds, 0) + " s");
        });
        return *slot;
    }

    void write_artifact(const std::string& name, const std::string& contents) const {
        if (!opts.out_dir.empty()) write_file_atomic((fs::path(opts.out_dir) / name).string(), contents);
    }

    const AcceptanceOptions& opts;
    const ExperimentConfig& cfg;

private:
    std::map<int, GroundState> unboosted_;
    std::map<int, std::unique_ptr<FamilyTable>> tables_;
    std::optional<ScalingReport> perturbed_, unperturbed_;
};

Vec3 along_axis(double s) { return {0.0, 0.0, s}; }

// 1. Residual and runtime of the unboosted and boosted solves.
CriterionResult ground_state_residual(Context& ctx) {
    CriterionResult r = named(1, "ground-state residual");
    const Grid g = ctx.reference_grid();
    const auto opts = ctx.cfg.solver_options();
    const double mu = ctx.cfg.soliton_mu;

    auto t0 = Clock::now();
    GroundState gs0 = solve_unboosted(mu, ctx.cfg.m, g, opts);
    const double sec0 = since(t0);
    ctx.adopt_unboosted(gs0);

    const Vec3 vb = along_axis(0.3);
    t0 = Clock::now();
    GroundState gsb = solve_boosted(vb, mu, ctx.cfg.m, g, opts);
    const double secb = since(t0);
    ctx.remember("boosted_" + grid_tag(g) + "_v0.3_mu" + format_double(mu) + ".prhf", gsb);

    const bool ok0 = gs0.relative_residual < 1e-8 && sec0 < 300.0;
    const bool okb = gsb.relative_residual < 1e-8 && secb < 900.0;
    r.pass = ok0 && okb;
    r.summary = "v=0: " + sci(gs0.relative_residual) + " in " + fixed(sec0, 0) + " s; v=0.3 e3: " +
                sci(gsb.relative_residual) + " in " + fixed(secb, 0) + " s (limits 1e-8, 300 s / 900 s)";
    r.details = {{"grid", grid_tag(g)},
                 {"unboosted", {{"relative_residual", gs0.relative_residual}, {"seconds", sec0},
                                {"iterations", gs0.iterations}, {"mass", gs0.mass_n},
                                {"boundary_ratio", gs0.boundary_ratio}}},
                 {"boosted", {{"v", vb}, {"relative_residual", gsb.relative_residual}, {"seconds", secb},
                              {"iterations", gsb.iterations}, {"mass", gsb.mass_n},
                              {"boundary_ratio", gsb.boundary_ratio}}}};
    return r;
}

// 2. Pairing the Euler-Lagrange equation with phi:
// E(N) - 1/4 <Phi(|phi|^2), |phi|^2> + mu N = 0.
CriterionResult energy_identity(Context& ctx) {
    CriterionResult r = named(2, "energy identity");
    const GroundState& gs = ctx.unboosted(ctx.reference_grid());
    const double e = energy(gs.field, RVec(), ctx.cfg.m);
    const double quarter = interaction_energy(gs.field);
    const double n = mass(gs.field);
    const double defect = std::abs(e - quarter + gs.mu * n) / std::abs(gs.mu * n);
    r.pass = defect < 1e-6;
    r.summary = "|E - I + mu N| / |mu N| = " + sci(defect) + " (limit 1e-6)";
    r.details = {{"energy", e}, {"quarter_interaction", quarter}, {"mass", n}, {"mu", gs.mu},
                 {"relative_defect", defect}, {"state_relative_residual", gs.relative_residual}};
    return r;
}

// 3. Kernel of L11 spanned by translations, L22 with a simple zero along phi.
CriterionResult kernel_assumption(Context& ctx) {
    CriterionResult r = named(3, "kernel assumption");
    const auto t0 = Clock::now();
    const Grid g = ctx.spectral_grid();
    const GroundState& gs = ctx.unboosted(g);
    const SpectralOptions so = ctx.cfg.spectral_options();
    const SpectralReport l11 = verify_kernel_assumption(gs, so);
    const SpectralReport l22 = l22_report(gs, so);
    const double sec = since(t0);
    const double max_angle = l11.kernel_angles.empty()
                                 ? 1.0
                                 : *std::max_element(l11.kernel_angles.begin(), l11.kernel_angles.end());
    const double phi_angle = l22.kernel_angles.empty() ? 1.0 : l22.kernel_angles.front();
    const bool gap_ok = l11.gap > 10.0 * l11.kernel_tol;
    r.pass = l11.pass && gap_ok && max_angle < 1e-3 && l22.pass && phi_angle < 1e-3 && sec < 1200.0;
    r.summary = "L11 kernel_dim " + std::to_string(l11.kernel_dim) + ", gap " + sci(l11.gap) + " vs 10 tol " +
                sci(10.0 * l11.kernel_tol) + ", angle " + sci(max_angle) + "; L22 lowest " +
                sci(l22.eigenvalues.empty() ? NAN : l22.eigenvalues.front()) + ", angle to phi " + sci(phi_angle) +
                "; " + fixed(sec, 0) + " s on " + grid_tag(g);
    r.details = {{"L11", nlohmann::json::parse(to_json(l11))},
                 {"L22", nlohmann::json::parse(to_json(l22))},
                 {"seconds", sec},
                 {"grid", grid_tag(g)}};
    return r;
}

// Sweep node (v along e3, mu) from the reference table.
std::shared_ptr<const FamilyNode> sweep_node(FamilyTable& t, double s, double mu) {
    const auto& o = t.options();
    return t.node(static_cast<int>(std::lround(s / o.speed_step)), static_cast<int>(std::lround(mu / o.frequency_step)));
}

// 4. One negative eigenvalue and a four dimensional kernel for the boosted
// Hessian; d_mu N > 0 across the sweep.
CriterionResult boosted_spectrum(Context& ctx) {
    CriterionResult r = named(4, "boosted spectrum and stability");
    FamilyTable& t = ctx.table(ctx.reference_grid());
    const Vec3 v = along_axis(0.2);
    const GroundState gs = ctx.family_state(t, v, ctx.cfg.soliton_mu);
    const SpectralReport rep = full_spectrum_report(gs, ctx.cfg.spectral_options());

    bool stable = true;
    nlohmann::json sweep = nlohmann::json::array();
    std::string worst;
    double min_slope = INFINITY;
    for (double s : ctx.cfg.speeds)
        for (double mu : ctx.cfg.frequencies) {
            const auto nd = sweep_node(t, s, mu);
            const double slope = nd->scalars.n_mu;
            stable = stable && slope > 0.0;
            if (slope < min_slope) {
                min_slope = slope;
                worst = "v=" + short_num(s) + ", mu=" + short_num(mu);
            }
            sweep.push_back({{"v", s}, {"mu", mu}, {"n_mu", slope}, {"n", nd->scalars.n}});
        }
    r.pass = rep.pass && rep.negative_count == 1 && rep.kernel_dim == 4 && stable;
    r.summary = "negative " + std::to_string(rep.negative_count) + ", kernel_dim " + std::to_string(rep.kernel_dim) +
                " (gap " + sci(rep.gap) + "); min d_mu N " + sci(min_slope) + " at " + worst;
    r.details = {{"spectrum", nlohmann::json::parse(to_json(rep))},
                 {"state_relative_residual", gs.relative_residual},
                 {"sweep", sweep}};
    return r;
}

// 5. Structure of Omega at (0.2 e3, mu).
CriterionResult symplectic_structure(Context& ctx) {
    CriterionResult r = named(5, "symplectic structure");
    FamilyTable& t = ctx.table(ctx.reference_grid());
    const auto nd = sweep_node(t, 0.2, ctx.cfg.soliton_mu);
    FamilySample s = t.sample(along_axis(nd->s), nd->mu);
    const TangentFrame frame = frame_from_sample(s);
    const OmegaMatrix om = omega_matrix(frame);
    const double scale = om.entries.cwiseAbs().maxCoeff();
    const double antisym = om.antisymmetry_defect / scale;
    const double pattern = omega_pattern_defect(om.entries);

    const Matrix8d& e = om.entries;
    // Omega = [0 tau 0 -n_v; -tau 0 n_v 0; 0 -n_v^T 0 -n_mu; n_v^T 0 n_mu 0]
    const double tau11 = e(0, 3), tau22 = e(1, 4), tau33 = e(2, 5), n_v3 = e(7, 2), n_mu = e(7, 6);
    const double formula = std::pow(tau11 * tau22, 2) * std::pow(tau33 * n_mu + n_v3 * n_v3, 2);
    const double det_rel = std::abs(om.det - formula) / std::abs(formula);
    const double inv_scale = om.inverse.cwiseAbs().maxCoeff();
    const double blocks = om.block_formula_defect / inv_scale;

    const auto cont = t.det_continuity();
    r.pass = antisym < 1e-10 && pattern < 1e-6 && det_rel < 1e-6 && blocks < 1e-8;
    r.summary = "antisymmetry " + sci(antisym) + ", pattern " + sci(pattern) + ", det vs formula " + sci(det_rel) +
                ", block inverse " + sci(blocks) + " (limits 1e-10, 1e-6, 1e-6, 1e-8)";
    nlohmann::json rows = nlohmann::json::array();
    for (int j = 0; j < 8; ++j) {
        std::vector<double> row(8);
        for (int k = 0; k < 8; ++k) row[k] = e(j, k);
        rows.push_back(row);
    }
    r.details = {{"omega", rows},
                 {"det", om.det},
                 {"det_formula", formula},
                 {"antisymmetry_relative", antisym},
                 {"pattern_defect", pattern},
                 {"det_relative_error", det_rel},
                 {"block_inverse_relative", blocks},
                 {"inverse_defect", om.inverse_defect},
                 {"det_continuity",
                  {{"along_speed", cont.along_speed},
                   {"along_frequency", cont.along_frequency},
                   {"frequency_curvature", cont.frequency_curvature}}}};
    return r;
}

double param_error(const SolitonParams& a, const SolitonParams& b) {
    double e = 0.0;
    for (int k = 0; k < 3; ++k) {
        e = std::max(e, std::abs(a.y[k] - b.y[k]));
        e = std::max(e, std::abs(a.v[k] - b.v[k]));
    }
    const double dth = std::remainder(a.theta - b.theta, 2.0 * std::numbers::pi);
    return std::max({e, std::abs(dth), std::abs(a.mu - b.mu)});
}

// 6. Round trip through skew_decompose and its equivariance.
CriterionResult decomposition_round_trip(Context& ctx) {
    CriterionResult r = named(6, "decomposition round trip");
    FamilyTable& t = ctx.table(ctx.reference_grid());
    SolitonParams zeta;
    zeta.y = {0.3, -0.2, 0.5};
    zeta.v = {0.02, -0.01, 0.21};
    zeta.theta = 0.7;
    zeta.mu = ctx.cfg.soliton_mu + 0.01;
    SolitonParams guess = zeta;
    guess.y = {0.35, -0.25, 0.45};
    guess.v = {0.025, -0.005, 0.205};
    guess.theta = 0.75;
    guess.mu = zeta.mu - 0.005;
    const DecompositionOptions dopt = ctx.cfg.decomposition_options();
    const Field phi = soliton_field(t, zeta);

    bool ok = true;
    nlohmann::json fixtures = nlohmann::json::array();
    double worst_zeta = 0.0, worst_xi = 0.0, worst_constraint = 0.0, worst_equiv = 0.0;
    int k = 0;
    for (double size : {1e-4, 1e-3, 1e-2}) {
        const Field xi0 = skew_orthogonal_perturbation(t, zeta.v, zeta.mu, ctx.cfg.seed_perturbation + k++, size,
                                                       ctx.cfg.potential.epsilon);
        const Field psi = phi + to_lab_frame(xi0, zeta);
        const double psi2 = inner(psi, psi);
        const Decomposition d = skew_decompose(psi, guess, t, dopt);
        const double ez = param_error(d.params, zeta);
        const double ex = norm(d.residual_field - xi0) / norm(xi0);
        const double ec = d.constraint_norm / psi2;

        // Shifted and rotated copy: parameters move by the same amounts and
        // xi is unchanged in the soliton frame.
        const Vec3 shift{0.7, -0.4, 1.1};
        const double turn = 0.9;
        const Field psi_moved = rotate_phase(translate(psi, shift), turn);
        SolitonParams expect = d.params;
        SolitonParams guess_moved = guess;
        for (int a = 0; a < 3; ++a) {
            expect.y[a] += shift[a];
            guess_moved.y[a] += shift[a];
        }
        expect.theta += turn;
        guess_moved.theta += turn;
        const Decomposition dm = skew_decompose(psi_moved, guess_moved, t, dopt);
        const double eq = std::max(param_error(dm.params, expect), norm(dm.residual_field - d.residual_field) / norm(xi0));

        ok = ok && ez < 1e-8 && ex < 1e-6 && ec < 1e-9 && dm.constraint_norm / psi2 < 1e-9 && eq < 1e-8;
        worst_zeta = std::max(worst_zeta, ez);
        worst_xi = std::max(worst_xi, ex);
        worst_constraint = std::max({worst_constraint, ec, dm.constraint_norm / psi2});
        worst_equiv = std::max(worst_equiv, eq);
        fixtures.push_back({{"xi0_x_norm", size},
                            {"zeta_error", ez},
                            {"xi_relative_error", ex},
                            {"constraint_over_psi2", ec},
                            {"iterations", d.iterations},
                            {"equivariance_error", eq}});
    }
    r.pass = ok;
    r.summary = "zeta error " + sci(worst_zeta) + ", xi error " + sci(worst_xi) + ", constraints " +
                sci(worst_constraint) + " ||psi||^2, equivariance " + sci(worst_equiv) +
                " (limits 1e-8, 1e-6, 1e-9, 1e-8)";
    r.details = {{"fixtures", fixtures}};
    return r;
}

// 7. Conservation laws and Ehrenfest's identity along the PDE flow.
CriterionResult conservation(Context& ctx) {
    CriterionResult r = named(7, "conservation");
    const Grid g = ctx.reference_grid();
    const GroundState& gs0 = ctx.unboosted(g);
    PotentialSpec well = ctx.cfg.potential;
    well.preset = PotentialPreset::gaussian_well;
    well.epsilon = 0.05;
    if (!(well.amplitude > 0.0)) well.amplitude = 0.1;

    EvolutionConfig ec = ctx.cfg.evolution_config();
    ec.t_end = 20.0;
    ec.x_weight_eps = well.epsilon;
    ec.checkpoint_every = 0;
    ctx.log("conservation: well run to t = 20");
    const EvolutionResult run = evolve(gs0.field, ec, &well);
    const double dn = run.trace.max_relative_mass_drift();
    const double dh = run.trace.max_relative_energy_drift();
    const double ehr = ehrenfest_residual(run.trace);
    ctx.write_artifact("conservation_well.csv", run.trace.csv());

    ctx.log("conservation: free run to t = 20");
    FamilyTable& t = ctx.table(g);
    const Field boosted = t.sample(along_axis(0.2), ctx.cfg.soliton_mu).phi;
    const EvolutionResult free = evolve(boosted, ec, nullptr);
    const double dp = free.trace.max_momentum_drift();
    ctx.write_artifact("conservation_free.csv", free.trace.csv());

    // Refinement with a fixed number of steps between samples, so both the
    // splitting error and the differencing error scale with dt.
    std::vector<double> dts{4.0 * ctx.cfg.dt, 2.0 * ctx.cfg.dt, ctx.cfg.dt};
    std::vector<double> residuals;
    for (double dt : dts) {
        EvolutionConfig rc = ec;
        rc.dt = dt;
        rc.t_end = 2.0;
        rc.monitor_stride = 5;
        residuals.push_back(ehrenfest_residual(evolve(gs0.field, rc, &well).trace));
    }
    const double order = std::log2(residuals[1] / residuals[2]);
    const double order_coarse = std::log2(residuals[0] / residuals[1]);
    r.pass = dn < 1e-8 && dh < 1e-7 && dp < 1e-7 && ehr < 1e-4 && order > 1.7 && order < 2.3;
    r.summary = "dN " + sci(dn) + ", dH " + sci(dh) + ", dP (V=0) " + sci(dp) + ", Ehrenfest " + sci(ehr) +
                ", order " + fixed(order, 2) + " (limits 1e-8, 1e-7, 1e-7, 1e-4, order in (1.7, 2.3))";
    r.details = {{"mass_drift", dn},
                 {"energy_drift", dh},
                 {"momentum_drift_free", dp},
                 {"ehrenfest_residual", ehr},
                 {"refinement", {{"dt", dts}, {"residual", residuals}, {"order_fine", order},
                                 {"order_coarse", order_coarse}}},
                 {"dt", ec.dt},
                 {"warnings", run.trace.warnings}};
    return r;
}

// 8. A boosted soliton in free space moves along y = v t.
CriterionResult free_transport(Context& ctx) {
    CriterionResult r = named(8, "free soliton transport");
    FamilyTable& t = ctx.table(ctx.reference_grid());
    SolitonParams zeta0;
    zeta0.v = along_axis(0.2);
    zeta0.mu = ctx.cfg.soliton_mu;
    const Field psi0 = soliton_field(t, zeta0);
    TrackConfig tc;
    tc.evolution = ctx.cfg.evolution_config();
    tc.evolution.t_end = 10.0;
    tc.evolution.checkpoint_every = 0;
    tc.decomposition = ctx.cfg.decomposition_options();
    tc.lyapunov = false;
    ctx.log("free transport: tracking to t = 10");
    const ModulationTrace tr = track(psi0, tc, t, nullptr, zeta0);
    ctx.write_artifact("free_transport.csv", tr.csv());
    if (tr.samples.empty()) throw DecompositionLost("free transport: no samples", 0.0);
    const ModulationSample& last = tr.samples.back();
    double off = 0.0, xi_max = 0.0;
    for (const auto& s : tr.samples) {
        Vec3 d{s.zeta.y[0] - zeta0.v[0] * s.t, s.zeta.y[1] - zeta0.v[1] * s.t, s.zeta.y[2] - zeta0.v[2] * s.t};
        off = std::max(off, vmax(d));
        xi_max = std::max(xi_max, s.xi_hhalf);
    }
    Vec3 d_end{last.zeta.y[0] - zeta0.v[0] * last.t, last.zeta.y[1] - zeta0.v[1] * last.t,
               last.zeta.y[2] - zeta0.v[2] * last.t};
    const double dist = std::sqrt(d_end[0] * d_end[0] + d_end[1] * d_end[1] + d_end[2] * d_end[2]);
    const bool reached = tr.status == "complete" && std::abs(last.t - 10.0) < 1e-9;
    r.pass = reached && dist < 1e-3 && last.xi_hhalf < 1e-4;
    r.summary = "t = " + fixed(last.t, 2) + ": |y - v t| = " + sci(dist) + ", ||xi||_H1/2 = " + sci(last.xi_hhalf) +
                " (limits 1e-3, 1e-4); max over run " + sci(off) + ", " + sci(xi_max);
    r.details = {{"status", tr.status},
                 {"t_end", last.t},
                 {"center_offset", dist},
                 {"xi_hhalf", last.xi_hhalf},
                 {"max_center_offset_component", off},
                 {"max_xi_hhalf", xi_max},
                 {"max_alpha_velocity", tr.max_alpha(3, 6)},
                 {"samples", tr.samples.size()}};
    return r;
}

// 9. Exponents of the O(eps^2) quantities.
CriterionResult theorem_scaling(Context& ctx) {
    CriterionResult r = named(9, "scaling exponents");
    const ScalingReport& rep = ctx.scaling(true);
    bool complete = true;
    for (const auto& run : rep.runs) complete = complete && run.status == "complete" && run.t_reached + 1e-9 >= run.t_target - ctx.cfg.dt * ctx.cfg.monitor_stride;
    const ScalingReport& plain = ctx.scaling(false);
    std::string fits;
    for (const auto& f : rep.fits) fits += (fits.empty() ? "" : ", ") + f.quantity + " " + fixed(f.exponent, 2);
    std::string plain_fits;
    for (const auto& f : plain.fits)
        plain_fits += (plain_fits.empty() ? "" : ", ") + f.quantity + " " + fixed(f.exponent, 2);
    r.pass = rep.pass && complete && std::isfinite(rep.xi_over_eps);
    r.summary = fits + " (range [" + fixed(ctx.cfg.exponent_lo, 1) + ", " + fixed(ctx.cfg.exponent_hi, 1) +
                "]); sup ||xi||_X / eps = " + fixed(rep.xi_over_eps, 3) + "; unperturbed path: " + plain_fits;
    r.details = {{"perturbed", rep.to_json()}, {"unperturbed", plain.to_json()}, {"xi0_fraction", ctx.cfg.xi0_fraction}};
    for (std::size_t i = 0; i < rep.traces.size(); ++i)
        ctx.write_artifact("scaling_eps" + short_num(rep.runs[i].epsilon) + ".csv", rep.traces[i].csv());
    return r;
}

double alpha_size(const ModulationSample& s) {
    double a = 0.0;
    for (int k = 0; k < 8; ++k)
        if (std::isfinite(s.alpha(k))) a += s.alpha(k) * s.alpha(k);
    return std::sqrt(a);
}

// Lower-bound shape: S >= 7/8 rho ||xi||^2 - C (eps Q + eps^2 + ||xi||^4).
// Returns the smallest C that makes it hold on the trace.
double lower_constant(const ModulationTrace& tr, double eps, double rho) {
    double c = 0.0;
    for (const auto& s : tr.samples) {
        if (!s.ok) continue;
        const double x2 = s.xi_hhalf * s.xi_hhalf;
        const double deficit = 0.875 * rho * x2 - s.lyapunov;
        const double shape = eps * s.weighted + eps * eps + x2 * x2;
        c = std::max(c, deficit / shape);
    }
    return c;
}

// Upper-bound shape: |S(t)| <= |S(0)| + C t sup_{s <= t} f(s) with
// f = (eps + |alpha|)(eps^2 + ||xi||^2) + ||xi||^3 (1 + ||xi||^2).
double upper_constant(const ModulationTrace& tr, double eps) {
    if (tr.samples.empty()) return 0.0;
    const double s0 = std::abs(tr.samples.front().lyapunov);
    double sup_f = 0.0, c = 0.0;
    for (const auto& s : tr.samples) {
        if (!s.ok) continue;
        const double x = s.xi_hhalf;
        const double f = (eps + alpha_size(s)) * (eps * eps + x * x) + x * x * x * (1.0 + x * x);
        sup_f = std::max(sup_f, f);
        if (s.t > 0.0) c = std::max(c, (std::abs(s.lyapunov) - s0) / (s.t * sup_f));
    }
    return c;
}

// 10. Lyapunov functional between the two proposition shapes, with the
// constants fitted on the outer epsilon runs and checked on the middle one.
CriterionResult lyapunov_sandwich(Context& ctx) {
    CriterionResult r = named(10, "Lyapunov sandwich");
    const ScalingReport& rep = ctx.scaling(true);
    FamilyTable& t = ctx.table(ctx.scaling_grid());
    const SolitonParams z0 = ctx.cfg.soliton();
    FamilySample smp = t.sample(z0.v, z0.mu);
    const TangentFrame frame = frame_from_sample(smp);
    const GroundState gs = ctx.rebuild(smp.phi, z0.v, z0.mu, "family table");
    const OmegaMatrix om = omega_matrix(frame);
    ctx.log("coercivity: " + std::to_string(ctx.cfg.coercivity_samples) + " probes");
    const CoercivityResult coer = coercivity_estimate(gs, frame, om.entries, ctx.cfg.coercivity_samples,
                                                      ctx.cfg.seed_coercivity);
    const double rho = coer.rho;

    int check = -1;
    for (std::size_t i = 0; i < rep.runs.size(); ++i)
        if (std::abs(rep.runs[i].epsilon - 0.05) < 1e-12) check = static_cast<int>(i);
    if (check < 0) throw ConfigError("Lyapunov sandwich needs an eps = 0.05 run in scaling.epsilons");

    double c_low = 0.0, c_up = 0.0;
    nlohmann::json fitted = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        if (static_cast<int>(i) == check) continue;
        const double e = rep.runs[i].epsilon;
        const double cl = lower_constant(rep.traces[i], e, rho), cu = upper_constant(rep.traces[i], e);
        c_low = std::max(c_low, cl);
        c_up = std::max(c_up, cu);
        fitted.push_back({{"epsilon", e}, {"lower_constant", cl}, {"upper_constant", cu}});
    }

    const ModulationTrace& tr = rep.traces[check];
    const double eps = rep.runs[check].epsilon;
    int lower_bad = 0, upper_bad = 0, n = 0;
    double worst_lower = INFINITY, worst_upper = INFINITY, min_ratio = INFINITY;
    const double s0 = tr.samples.empty() ? 0.0 : std::abs(tr.samples.front().lyapunov);
    double sup_f = 0.0;
    for (const auto& s : tr.samples) {
        if (!s.ok) continue;
        ++n;
        const double x2 = s.xi_hhalf * s.xi_hhalf;
        const double low = 0.875 * rho * x2 - c_low * (eps * s.weighted + eps * eps + x2 * x2);
        const double x = s.xi_hhalf;
        sup_f = std::max(sup_f, (eps + alpha_size(s)) * (eps * eps + x2) + x * x2 * (1.0 + x2));
        const double up = s0 + c_up * s.t * sup_f;
        if (s.lyapunov < low) ++lower_bad;
        if (std::abs(s.lyapunov) > up) ++upper_bad;
        worst_lower = std::min(worst_lower, s.lyapunov - low);
        worst_upper = std::min(worst_upper, up - std::abs(s.lyapunov));
        if (x2 > 0.0) min_ratio = std::min(min_ratio, s.lyapunov / (rho * x2));
    }
    const double cl_self = lower_constant(tr, eps, rho), cu_self = upper_constant(tr, eps);
    r.pass = rho > 0.0 && coer.samples >= ctx.cfg.coercivity_samples && n > 0 && lower_bad == 0 && upper_bad == 0;
    r.summary = "rho_hat " + sci(rho) + " over " + std::to_string(coer.samples) + " probes; eps 0.05 samples " +
                std::to_string(n) + ": lower violations " + std::to_string(lower_bad) + " (C " + sci(c_low) +
                ", own fit " + sci(cl_self) + "), upper violations " + std::to_string(upper_bad) + " (C " +
                sci(c_up) + ", own fit " + sci(cu_self) + ")";
    r.details = {{"rho_hat", rho},
                 {"rho_mean", coer.mean},
                 {"probes", coer.samples},
                 {"probe_max_constraint", coer.max_constraint},
                 {"fitted_on", fitted},
                 {"lower_constant", c_low},
                 {"upper_constant", c_up},
                 {"lower_constant_own_run", cl_self},
                 {"upper_constant_own_run", cu_self},
                 {"lower_violations", lower_bad},
                 {"upper_violations", upper_bad},
                 {"min_lower_margin", worst_lower},
                 {"min_upper_margin", worst_upper},
                 {"min_S_over_rho_xi2", min_ratio},
                 {"samples", n}};
    return r;
}

// 11. Toy-grid oracles.
CriterionResult toy_oracles(Context& ctx) {
    CriterionResult r = named(11, "toy-grid oracles");
    const auto mult = oracle::multiplier_comparisons(ctx.cfg.seed_eigen);
    double worst_mult = 0.0;
    std::string worst_name;
    nlohmann::json mj = nlohmann::json::object();
    for (const auto& c : mult) {
        mj[c.name] = c.max_relative_error;
        if (c.max_relative_error >= worst_mult) {
            worst_mult = c.max_relative_error;
            worst_name = c.name;
        }
    }
    const auto dense = oracle::dense_eigen_comparison(8, ctx.cfg.seed_eigen);
    r.pass = worst_mult < 1e-12 && dense.max_error < 1e-8;
    r.summary = "dense vs Lanczos " + sci(dense.max_error) + " (limit 1e-8); multipliers worst " + sci(worst_mult) +
                " (" + worst_name + ", limit 1e-12)";
    r.details = {{"multipliers", mj}, {"dense", dense.dense}, {"lanczos", dense.lanczos}, {"dense_error", dense.max_error}};
    return r;
}

using CriterionFn = CriterionResult (*)(Context&);

struct CriterionEntry {
    int id;
    const char* name;
    CriterionFn fn;
};

const CriterionEntry kCriteria[] = {
    {1, "ground-state residual", ground_state_residual},
    {2, "energy identity", energy_identity},
    {3, "kernel assumption", kernel_assumption},
    {4, "boosted spectrum and stability", boosted_spectrum},
    {5, "symplectic structure", symplectic_structure},
    {6, "decomposition round trip", decomposition_round_trip},
    {7, "conservation", conservation},
    {8, "free soliton transport", free_transport},
    {9, "scaling exponents", theorem_scaling},
    {10, "Lyapunov sandwich", lyapunov_sandwich},
    {11, "toy-grid oracles", toy_oracles},
};

} // namespace

std::string format_result(const CriterionResult& r) {
    return std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.name + ": " + r.summary +
           " (" + fixed(r.seconds, 1) + " s)";
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_result) {
    Context ctx(opts);
    std::vector<CriterionResult> out;
    nlohmann::json report;
    report["manifest"] = manifest(opts.config, "verify", opts.config.seed_perturbation);
    for (const auto& c : kCriteria) {
        if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), c.id) == opts.only.end()) continue;
        ctx.log("criterion " + std::to_string(c.id) + ": " + c.name);
        const auto t0 = Clock::now();
        CriterionResult r;
        try {
            r = c.fn(ctx);
        } catch (const std::exception& e) {
            r = named(c.id, c.name);
            r.pass = false;
            r.summary = std::string("error: ") + e.what();
        }
        r.seconds = since(t0);
        out.push_back(r);
        report["criteria"].push_back({{"id", r.id},
                                      {"name", r.name},
                                      {"pass", r.pass},
                                      {"seconds", r.seconds},
                                      {"summary", r.summary},
                                      {"details", r.details}});
        if (!opts.out_dir.empty()) write_json((fs::path(opts.out_dir) / "acceptance.json").string(), report);
        if (on_result) on_result(r);
    }
    return out;
}

namespace oracle {

namespace {

// Lattice wavenumber of bin i and whether it is the unpaired Nyquist bin.
double bin_k(const Grid& g, int i) { return g.k(i); }
bool nyquist(const Grid& g, int i) { return i == g.n() / 2; }

} // namespace

CVec slow_dft(const Grid& g, const CVec& u) {
    const int n = g.n();
    const double h = g.spacing();
    CVec out(g.size());
    for (int kz = 0; kz < n; ++kz)
        for (int ky = 0; ky < n; ++ky)
            for (int kx = 0; kx < n; ++kx) {
                cplx acc(0.0, 0.0);
                for (int z = 0; z < n; ++z)
                    for (int y = 0; y < n; ++y)
                        for (int x = 0; x < n; ++x) {
                            const double arg = bin_k(g, kx) * x * h + bin_k(g, ky) * y * h + bin_k(g, kz) * z * h;
                            acc += u[g.index(x, y, z)] * std::polar(1.0, -arg);
                        }
                out[g.index(kx, ky, kz)] = acc;
            }
    return out;
}

CVec slow_idft(const Grid& g, const CVec& u_hat) {
    const int n = g.n();
    const double h = g.spacing();
    CVec out(g.size());
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                cplx acc(0.0, 0.0);
                for (int kz = 0; kz < n; ++kz)
                    for (int ky = 0; ky < n; ++ky)
                        for (int kx = 0; kx < n; ++kx) {
                            const double arg = bin_k(g, kx) * x * h + bin_k(g, ky) * y * h + bin_k(g, kz) * z * h;
                            acc += u_hat[g.index(kx, ky, kz)] * std::polar(1.0, arg);
                        }
                out[g.index(x, y, z)] = acc / static_cast<double>(g.size());
            }
    return out;
}

Field slow_multiplier(const Field& u, const std::function<cplx(double, double, double)>& symbol, bool drop_nyquist) {
    const Grid& g = u.grid();
    const int n = g.n();
    CVec s = slow_dft(g, u.values());
    for (int kz = 0; kz < n; ++kz)
        for (int ky = 0; ky < n; ++ky)
            for (int kx = 0; kx < n; ++kx) {
                cplx& c = s[g.index(kx, ky, kz)];
                if (drop_nyquist && (nyquist(g, kx) || nyquist(g, ky) || nyquist(g, kz)))
                    c = 0.0;
                else
                    c *= symbol(bin_k(g, kx), bin_k(g, ky), bin_k(g, kz));
            }
    return Field(g, slow_idft(g, s));
}

namespace {

Field white_noise(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = cplx(gauss(rng), gauss(rng));
    return band_limited(u);
}

double relative_error(const Field& a, const Field& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / std::max(den, 1e-300);
}

double relative_error(const RVec& a, const RVec& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / std::max(den, 1e-300);
}

} // namespace

std::vector<ToyComparison> multiplier_comparisons(std::uint64_t seed) {
    const Grid g(8, 8.0);
    const double m = 1.0, mu = 0.5;
    const Vec3 v{0.1, -0.05, 0.2};
    const Field u = white_noise(g, seed);
    std::vector<ToyComparison> out;

    auto kinetic = [m](double kx, double ky, double kz) {
        return cplx(std::sqrt(kx * kx + ky * ky + kz * kz + m * m) - m, 0.0);
    };
    out.push_back({"kinetic", relative_error(apply_kinetic(u, m), slow_multiplier(u, kinetic, true))});

    auto boost = [&v](double kx, double ky, double kz) { return cplx(-(v[0] * kx + v[1] * ky + v[2] * kz), 0.0); };
    out.push_back({"boost", relative_error(apply_boost(u, v), slow_multiplier(u, boost, true))});

    const Multiplier lin = linear_part(g, v, mu, m);
    auto linear = [&](double kx, double ky, double kz) { return kinetic(kx, ky, kz) + mu + boost(kx, ky, kz); };
    out.push_back({"linear_part", relative_error(lin.apply(u), slow_multiplier(u, linear, true))});

    for (int a = 0; a < 3; ++a) {
        auto d = [a](double kx, double ky, double kz) { return cplx(0.0, a == 0 ? kx : a == 1 ? ky : kz); };
        out.push_back({"derivative_" + std::to_string(a), relative_error(derivative(u, a), slow_multiplier(u, d, true))});
    }

    const Vec3 shift{0.37, -1.21, 2.5};
    auto tr = [&shift](double kx, double ky, double kz) {
        return std::polar(1.0, -(kx * shift[0] + ky * shift[1] + kz * shift[2]));
    };
    out.push_back({"translate", relative_error(translate(u, shift), slow_multiplier(u, tr, true))});

    // Truncated Coulomb kernel 8 pi sin^2(|k| R / 2) / |k|^2, R = L/2.
    const RVec rho = density(u);
    Field rho_field(g);
    for (std::size_t i = 0; i < rho.size(); ++i) rho_field[i] = rho[i];
    const double R = 0.5 * g.length();
    auto coulomb = [R](double kx, double ky, double kz) {
        const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
        if (k == 0.0) return cplx(2.0 * std::numbers::pi * R * R, 0.0);
        const double s = std::sin(0.5 * k * R);
        return cplx(8.0 * std::numbers::pi * s * s / (k * k), 0.0);
    };
    const Field phi_slow = slow_multiplier(rho_field, coulomb, false);
    RVec phi_ref(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) phi_ref[i] = phi_slow[i].real();
    out.push_back({"hartree", relative_error(hartree_potential(g, rho), phi_ref)});

    {
        const CVec s = slow_dft(g, u.values());
        double acc = 0.0;
        for (int kz = 0; kz < g.n(); ++kz)
            for (int ky = 0; ky < g.n(); ++ky)
                for (int kx = 0; kx < g.n(); ++kx) {
                    const double k2 = g.k(kx) * g.k(kx) + g.k(ky) * g.k(ky) + g.k(kz) * g.k(kz);
                    acc += std::sqrt(1.0 + k2) * std::norm(s[g.index(kx, ky, kz)]);
                }
        const double ref = std::sqrt(acc * g.cell_volume() / static_cast<double>(g.size()));
        out.push_back({"h_half_norm", std::abs(h_half_norm(u) - ref) / ref});
    }

    {
        // Band-limited interpolant evaluated directly at the fine points.
        const Dealiaser d(g);
        const CVec fine = d.upsample(u);
        const Grid& fg = d.fine();
        const CVec s = slow_dft(g, u.values());
        Field ref(fg), got(fg, fine);
        const double hf = fg.spacing();
        for (int z = 0; z < fg.n(); ++z)
            for (int y = 0; y < fg.n(); ++y)
                for (int x = 0; x < fg.n(); ++x) {
                    cplx acc(0.0, 0.0);
                    for (int kz = 0; kz < g.n(); ++kz)
                        for (int ky = 0; ky < g.n(); ++ky)
                            for (int kx = 0; kx < g.n(); ++kx) {
                                if (nyquist(g, kx) || nyquist(g, ky) || nyquist(g, kz)) continue;
                                const double arg = (g.k(kx) * x + g.k(ky) * y + g.k(kz) * z) * hf;
                                acc += s[g.index(kx, ky, kz)] * std::polar(1.0, arg);
                            }
                    ref[fg.index(x, y, z)] = acc / static_cast<double>(g.size());
                }
        out.push_back({"upsample", relative_error(got, ref)});
    }
    return out;
}

DenseComparison dense_eigen_comparison(int count, std::uint64_t seed) {
    const Grid g(8, 8.0);
    const double mu = 0.5, m = 1.0;
    const Vec3 v{0.0, 0.0, 0.2};
    Field profile(g);
    for (int z = 0; z < g.n(); ++z)
        for (int y = 0; y < g.n(); ++y)
            for (int x = 0; x < g.n(); ++x) {
                const double px = g.coord(x), py = g.coord(y), pz = g.coord(z);
                const double r2 = px * px + py * py + pz * pz;
                profile[g.index(x, y, z)] = 0.8 * std::exp(-r2 / 4.5) * cplx(1.0, 0.3 * pz);
            }
    project_band(profile);
    const HessianOperator L(profile, v, mu, m);

    // Real coordinates (Re u, Im u); the pairing is h^3 times the dot product.
    const std::size_t N = g.size();
    const int dim = static_cast<int>(2 * N);
    Eigen::MatrixXd A(dim, dim);
    for (int j = 0; j < dim; ++j) {
        Field e(g);
        e[j % N] = j < static_cast<int>(N) ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
        const Field col = L.apply(e);
        for (std::size_t i = 0; i < N; ++i) {
            A(static_cast<int>(i), j) = col[i].real();
            A(static_cast<int>(i + N), j) = col[i].imag();
        }
    }
    // Band projector by direct sums; it is real, so it acts on both halves.
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t j = 0; j < N; ++j) {
        Field e(g);
        e[j] = 1.0;
        const Field col = slow_multiplier(e, [](double, double, double) { return cplx(1.0, 0.0); }, true);
        for (std::size_t i = 0; i < N; ++i) {
            P(static_cast<int>(i), static_cast<int>(j)) = col[i].real();
            P(static_cast<int>(i + N), static_cast<int>(j + N)) = col[i].real();
        }
    }
    // Directions outside the band are pushed above the spectrum of interest.
    const double lift = 10.0 * (A.cwiseAbs().rowwise().sum().maxCoeff() + 1.0);
    Eigen::MatrixXd B = P * A * P + lift * (Eigen::MatrixXd::Identity(dim, dim) - P);
    B = 0.5 * (B + B.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);

    EigenOptions eo;
    eo.tol = 1e-11;
    eo.seed = seed;
    const EigenResult er = lowest_eigenpairs([&](const Field& x) { return L.apply(x); }, g, count, eo);

    DenseComparison out;
    for (int k = 0; k < count; ++k) {
        out.dense.push_back(es.eigenvalues()(k));
        out.lanczos.push_back(er.values[k]);
        out.max_error = std::max(out.max_error, std::abs(es.eigenvalues()(k) - er.values[k]) /
                                                    std::max(1.0, std::abs(es.eigenvalues()(k))));
    }
    return out;
}

} // namespace oracle

} // namespace hartree
