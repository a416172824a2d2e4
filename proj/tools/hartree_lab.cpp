// hartree_lab: command-line driver for the soliton lab.
//
//   hartree_lab <command> --config PATH [--out DIR] [--workers N] [--seed U64] [--resume CHECKPOINT]
//
// Commands: groundstate, spectrum, omega, evolve, track, effective, scaling,
// verify. Exit status 2 for configuration errors, 1 for solver failures.

#include "hartree/acceptance.hpp"
#include "hartree/config.hpp"
#include "hartree/decomposition.hpp"
#include "hartree/errors.hpp"
#include "hartree/evolution.hpp"
#include "hartree/family.hpp"
#include "hartree/functionals.hpp"
#include "hartree/groundstate.hpp"
#include "hartree/io.hpp"
#include "hartree/modulation.hpp"
#include "hartree/prhf.hpp"
#include "hartree/spectral_analysis.hpp"
#include "hartree/symplectic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace hartree;

namespace {

struct Options {
    std::string config_path;
    std::string out;
    int workers = 0;
    std::optional<std::uint64_t> seed;
    std::string resume;
};

struct Run {
    ExperimentConfig cfg;
    std::string out;
    int workers = 1;
    std::uint64_t seed = 0;
    std::string command;

    std::string path(const std::string& name) const { return (fs::path(out) / name).string(); }
    nlohmann::json manifest_json() const { return manifest(cfg, command, seed); }
    std::string cache_dir(const std::string& tag) const {
        return cfg.cache_dir.empty() ? path("family_" + tag) : (fs::path(cfg.cache_dir) / tag).string();
    }
};

std::mutex log_mutex;

void note(const std::string& s) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::fprintf(stderr, "%s\n", s.c_str());
}

// %g, for file names and log lines
std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

int default_workers() {
    if (const char* env = std::getenv("HARTREE_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

Run prepare(const Options& o, const std::string& command) {
    Run r;
    r.command = command;
    r.cfg = load_config(o.config_path);
    if (o.seed) r.cfg.seed_perturbation = *o.seed;
    validate(r.cfg);
    r.seed = r.cfg.seed_perturbation;
    r.out = o.out.empty() ? r.cfg.output_dir : o.out;
    r.workers = o.workers > 0 ? o.workers : default_workers();
    fs::create_directories(r.out);
    const LengthScales ls = length_scales(r.cfg);
    note("config " + r.cfg.source + " (fingerprint " + fingerprint(r.cfg.to_text()) + ")");
    note("l_exp = " + short_num(ls.exp_length) + ", l_sol = " + short_num(ls.soliton_length) +
         ", epsilon_effective = " + short_num(ls.effective_epsilon));
    fs::remove(r.path("failure.json"));
    write_json(r.path("manifest.json"), r.manifest_json());
    return r;
}

// Runs task(i) for i in [0, count) on `workers` threads; rethrows the first
// failure.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(workers, static_cast<int>(count)); ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string state_name(double s, double mu) { return "groundstate_v" + short_num(s) + "_mu" + short_num(mu) + ".prhf"; }

struct SweepState {
    double s = 0.0;
    double mu = 0.0;
    std::optional<GroundState> gs;
};

// Sweep states along e3, read back from `out` when present and solved
// otherwise; each frequency is a continuation chain in speed.
std::vector<SweepState> sweep_states(const Run& r, bool write) {
    const Grid g = r.cfg.grid();
    std::vector<double> speeds = r.cfg.speeds;
    for (double& s : speeds) s = std::abs(s);
    std::sort(speeds.begin(), speeds.end());
    speeds.erase(std::unique(speeds.begin(), speeds.end()), speeds.end());
    const auto& mus = r.cfg.frequencies;
    std::vector<SweepState> states;
    for (double mu : mus)
        for (double s : speeds) states.push_back({s, mu, std::nullopt});

    parallel_for(mus.size(), r.workers, [&](std::size_t j) {
        const GroundState* prev = nullptr;
        for (std::size_t i = 0; i < speeds.size(); ++i) {
            SweepState& st = states[j * speeds.size() + i];
            const Vec3 v{0.0, 0.0, st.s};
            const std::string file = r.path(state_name(st.s, st.mu));
            if (fs::exists(file)) {
                PrhfFile f = read_prhf(file);
                if (f.field.grid() == g) {
                    GroundState gs(std::move(f.field));
                    gs.v = v;
                    gs.mu = st.mu;
                    gs.m = r.cfg.m;
                    gs.residual = norm(action_gradient(gs.field, v, st.mu, r.cfg.m));
                    gs.relative_residual = gs.residual / norm(gs.field);
                    gs.mass_n = mass(gs.field);
                    gs.boundary_ratio = boundary_ratio(gs.field);
                    gs.seed = "file " + file;
                    st.gs = std::move(gs);
                }
            }
            if (!st.gs) {
                note("solving v = " + short_num(st.s) + ", mu = " + short_num(st.mu));
                st.gs = solve_boosted(v, st.mu, r.cfg.m, g, r.cfg.solver_options(), prev);
                if (write) write_prhf(file, st.gs->field, r.cfg.m);
            }
            prev = &*st.gs;
        }
    });
    return states;
}

nlohmann::json scalars_json(const FamilyScalars& sc) {
    std::vector<double> tau(sc.tau.data(), sc.tau.data() + 9);
    return {{"n", sc.n}, {"n_mu", sc.n_mu}, {"n_v", {sc.n_v(0), sc.n_v(1), sc.n_v(2)}}, {"tau", tau}};
}

FamilyTable make_table(const Run& r, const Grid& g);

// Sweep points on the table lattice are solved as table nodes (cached with
// their tangents for later commands); the others are solved directly.
int cmd_groundstate(const Run& r) {
    FamilyTable table = make_table(r, r.cfg.grid());
    std::map<std::pair<double, double>, FamilyScalars> node_scalars;
    for (double signed_s : r.cfg.speeds)
        for (double mu : r.cfg.frequencies) {
            const double s = std::abs(signed_s);
            const double fi = s / r.cfg.speed_step, fj = mu / r.cfg.frequency_step;
            const long i = std::lround(fi), j = std::lround(fj);
            if (std::abs(fi - i) > 1e-9 || std::abs(fj - j) > 1e-9 || !table.inside({0.0, 0.0, s}, mu)) {
                note("v = " + short_num(s) + ", mu = " + short_num(mu) + " is off the table lattice");
                continue;
            }
            note("table node v = " + short_num(s) + ", mu = " + short_num(mu));
            const auto nd = table.node(static_cast<int>(i), static_cast<int>(j));
            node_scalars.emplace(std::make_pair(s, mu), nd->scalars);
            const std::string file = r.path(state_name(s, mu));
            if (!fs::exists(file)) write_prhf(file, nd->phi, r.cfg.m);
        }
    write_jsonl(r.path("family.jsonl"), table.records());

    auto states = sweep_states(r, true);
    nlohmann::json out;
    out["manifest"] = r.manifest_json();
    std::vector<nlohmann::json> points(states.size());
    parallel_for(states.size(), r.workers, [&](std::size_t i) {
        const auto& st = states[i];
        const auto it = node_scalars.find({st.s, st.mu});
        const FamilyScalars sc =
            it != node_scalars.end() ? it->second : family_scalars(*st.gs, tangent_frame(*st.gs), false);
        nlohmann::json rate, bound;
        try {
            const DecayFit decay = decay_rate(*st.gs);
            rate = decay.rate;
            bound = decay.bound;
        } catch (const FitFailure& e) {
            note("decay fit skipped: " + std::string(e.what()));
        }
        points[i] = {{"v", st.s},
                     {"mu", st.mu},
                     {"file", state_name(st.s, st.mu)},
                     {"relative_residual", st.gs->relative_residual},
                     {"boundary_ratio", st.gs->boundary_ratio},
                     {"decay_rate", rate},
                     {"decay_bound", bound},
                     {"scalars", scalars_json(sc)},
                     {"stable", sc.n_mu > 0.0}};
        note("v = " + short_num(st.s) + ", mu = " + short_num(st.mu) + ": residual " +
             short_num(st.gs->relative_residual) + ", d_mu N = " + short_num(sc.n_mu));
    });
    out["points"] = points;
    write_json(r.path("groundstate.json"), out);
    return 0;
}

int cmd_spectrum(const Run& r) {
    auto states = sweep_states(r, true);
    nlohmann::json out;
    out["manifest"] = r.manifest_json();
    bool all = true;
    for (const auto& st : states) {
        nlohmann::json e{{"v", st.s}, {"mu", st.mu}};
        const SpectralOptions so = r.cfg.spectral_options();
        const SpectralReport full = full_spectrum_report(*st.gs, so);
        e["full"] = nlohmann::json::parse(to_json(full));
        all = all && full.pass;
        if (st.s == 0.0) {
            const SpectralReport l11 = verify_kernel_assumption(*st.gs, so);
            const SpectralReport l22 = l22_report(*st.gs, so);
            e["L11"] = nlohmann::json::parse(to_json(l11));
            e["L22"] = nlohmann::json::parse(to_json(l22));
            e["kernel_assumption"] = l11.pass && l22.pass;
            all = all && l11.pass && l22.pass;
            std::printf("v = %g, mu = %g: L11 kernel_dim %d, L22 kernel_dim %d, kernel assumption %s\n", st.s, st.mu,
                        l11.kernel_dim, l22.kernel_dim, l11.pass && l22.pass ? "holds" : "FAILS");
        }
        std::printf("v = %g, mu = %g: negative %d, kernel_dim %d, gap %.3e\n", st.s, st.mu, full.negative_count,
                    full.kernel_dim, full.gap);
        out["points"].push_back(e);
    }
    out["pass"] = all;
    write_json(r.path("spectrum.json"), out);
    return 0;
}

int cmd_omega(const Run& r) {
    auto states = sweep_states(r, true);
    nlohmann::json out;
    out["manifest"] = r.manifest_json();
    for (const auto& st : states) {
        const TangentFrame fr = tangent_frame(*st.gs);
        const OmegaMatrix om = omega_matrix(fr);
        const Matrix8d& e = om.entries;
        // v along e3 makes tau diagonal
        const FamilyScalars sc = family_scalars(*st.gs, fr, false);
        const double formula = std::pow(sc.tau(0, 0) * sc.tau(1, 1), 2) *
                               std::pow(sc.tau(2, 2) * sc.n_mu + sc.n_v(2) * sc.n_v(2), 2);
        nlohmann::json rows = nlohmann::json::array();
        for (int j = 0; j < 8; ++j) {
            std::vector<double> row(8);
            for (int k = 0; k < 8; ++k) row[k] = e(j, k);
            rows.push_back(row);
        }
        out["points"].push_back({{"v", st.s},
                                 {"mu", st.mu},
                                 {"omega", rows},
                                 {"det", om.det},
                                 {"det_formula", formula},
                                 {"antisymmetry_defect", om.antisymmetry_defect},
                                 {"pattern_defect", omega_pattern_defect(e)},
                                 {"inverse_defect", om.inverse_defect},
                                 {"block_formula_defect", om.block_formula_defect}});
        std::printf("v = %g, mu = %g: det %.6e, formula %.6e\n", st.s, st.mu, om.det, formula);
    }
    write_json(r.path("omega.json"), out);
    return 0;
}

FamilyTable make_table(const Run& r, const Grid& g) {
    FamilyTableOptions o = r.cfg.family_options();
    o.cache_dir = r.cache_dir("n" + std::to_string(g.n()));
    fs::create_directories(o.cache_dir);
    return FamilyTable(g, r.cfg.m, o);
}

const PotentialSpec* potential_or_null(const ExperimentConfig& cfg) {
    return cfg.potential.preset == PotentialPreset::zero || cfg.potential.amplitude == 0.0 ? nullptr : &cfg.potential;
}

// Soliton at the configured parameters plus the optional perturbation, in
// the lab frame.
Field initial_field(const Run& r, FamilyTable& t) {
    const SolitonParams z = r.cfg.soliton();
    Field u = t.sample(z.v, z.mu).phi;
    if (r.cfg.xi0_norm > 0.0)
        u += skew_orthogonal_perturbation(t, z.v, z.mu, r.cfg.seed_perturbation, r.cfg.xi0_norm, r.cfg.potential.epsilon);
    return to_lab_frame(u, z);
}

int cmd_evolve(const Run& r, const std::string& resume) {
    EvolutionConfig ec = r.cfg.evolution_config();
    if (ec.checkpoint_every > 0) ec.checkpoint_path = r.path("checkpoint.prhf");
    EvolutionResult res = [&] {
        if (!resume.empty()) {
            PrhfFile f = read_prhf(resume);
            const double t0 = checkpoint_time(resume);
            note("resuming from " + resume + " at t = " + short_num(t0));
            return evolve(f.field, ec, potential_or_null(r.cfg), {}, true, t0);
        }
        FamilyTable t = make_table(r, r.cfg.grid());
        return evolve(initial_field(r, t), ec, potential_or_null(r.cfg));
    }();
    write_file_atomic(r.path("monitor.csv"), res.trace.csv());
    write_checkpoint(r.path("final.prhf"), res.psi_sim, r.cfg.m, res.t);
    write_json(r.path("evolve.json"), {{"manifest", r.manifest_json()},
                                       {"t", res.t},
                                       {"steps", res.steps},
                                       {"mass_drift", res.trace.max_relative_mass_drift()},
                                       {"energy_drift", res.trace.max_relative_energy_drift()},
                                       {"momentum_drift", res.trace.max_momentum_drift()},
                                       {"warnings", res.trace.warnings}});
    std::printf("t = %g: mass drift %.3e, energy drift %.3e\n", res.t, res.trace.max_relative_mass_drift(),
                res.trace.max_relative_energy_drift());
    return 0;
}

int cmd_track(const Run& r) {
    FamilyTable t = make_table(r, r.cfg.grid());
    TrackConfig tc;
    tc.evolution = r.cfg.evolution_config();
    tc.decomposition = r.cfg.decomposition_options();
    tc.projection.threshold = r.cfg.manifold_threshold;
    tc.projection.eps = r.cfg.potential.epsilon;
    const ModulationTrace tr = track(initial_field(r, t), tc, t, potential_or_null(r.cfg), r.cfg.soliton());
    write_file_atomic(r.path("modulation.csv"), tr.csv());
    write_file_atomic(r.path("monitor.csv"), tr.monitor.csv());
    write_json(r.path("track.json"), {{"manifest", r.manifest_json()},
                                      {"status", tr.status},
                                      {"t_end", tr.t_end},
                                      {"lost_time", std::isfinite(tr.lost_time) ? nlohmann::json(tr.lost_time)
                                                                                : nlohmann::json()},
                                      {"samples", tr.samples.size()},
                                      {"max_center_drift", tr.max_alpha(0, 3)},
                                      {"max_phase_drift", tr.max_alpha(6, 7)},
                                      {"max_soliton_mass_rate", tr.max_soliton_mass_rate()},
                                      {"max_momentum_balance", tr.max_momentum_balance()},
                                      {"max_xi_x", tr.max_xi_x()}});
    std::printf("%s at t = %g, %zu samples\n", tr.status.c_str(), tr.t_end, tr.samples.size());
    return tr.status == "complete" ? 0 : 1;
}

int cmd_effective(const Run& r) {
    FamilyTable t = make_table(r, r.cfg.grid());
    const SolitonParams z = r.cfg.soliton();
    EffectiveState s0;
    s0.y = z.y;
    s0.v = z.v;
    s0.theta = z.theta;
    s0.mu = z.mu;
    const auto path = effective_integrate(s0, t, potential_or_null(r.cfg), r.cfg.t_end, r.cfg.dt * r.cfg.monitor_stride);
    CsvTable csv({"t", "y1", "y2", "y3", "v1", "v2", "v3", "theta", "mu"});
    for (const auto& s : path) csv.add_row({s.t, s.y[0], s.y[1], s.y[2], s.v[0], s.v[1], s.v[2], s.theta, s.mu});
    csv.write(r.path("effective.csv"));
    std::printf("integrated to t = %g in %zu samples\n", path.back().t, path.size());
    return 0;
}

ScalingConfig scaling_config(const Run& r, double xi0_fraction) {
    ScalingConfig sc;
    sc.epsilons = r.cfg.epsilons;
    sc.track.evolution = r.cfg.evolution_config();
    sc.track.decomposition = r.cfg.decomposition_options();
    sc.track.projection.threshold = r.cfg.manifold_threshold;
    sc.potential = r.cfg.potential;
    sc.initial = r.cfg.soliton();
    sc.xi0_fraction = xi0_fraction;
    sc.xi0_seed = r.cfg.seed_perturbation;
    sc.t_budget = r.cfg.t_budget;
    sc.exponent_lo = r.cfg.exponent_lo;
    sc.exponent_hi = r.cfg.exponent_hi;
    return sc;
}

int cmd_scaling(const Run& r) {
    FamilyTable t = make_table(r, Grid(r.cfg.scaling_n, r.cfg.box_length));
    nlohmann::json out;
    out["manifest"] = r.manifest_json();
    bool pass = true;
    std::vector<double> fractions{r.cfg.xi0_fraction};
    if (r.cfg.xi0_fraction > 0.0) fractions.push_back(0.0);
    for (double frac : fractions) {
        const std::string tag = frac > 0.0 ? "perturbed" : "unperturbed";
        note("scaling study, " + tag);
        const ScalingReport rep = scaling_study(scaling_config(r, frac), t, [&](const ScalingRun& run) {
            note("  eps " + short_num(run.epsilon) + ": " + run.status + " at t = " + short_num(run.t_reached));
        }, r.workers);
        for (std::size_t i = 0; i < rep.runs.size(); ++i)
            write_file_atomic(r.path("scaling_" + tag + "_eps" + short_num(rep.runs[i].epsilon) + ".csv"),
                              rep.traces[i].csv());
        out[tag] = rep.to_json();
        for (const auto& f : rep.fits)
            std::printf("%s %s: exponent %.3f %s\n", tag.c_str(), f.quantity.c_str(), f.exponent,
                        f.pass ? "PASS" : "FAIL");
        std::printf("%s sup ||xi||_X / eps = %.4f\n", tag.c_str(), rep.xi_over_eps);
        if (frac == r.cfg.xi0_fraction) pass = rep.pass;
    }
    write_json(r.path("scaling.json"), out);
    return pass ? 0 : 1;
}

int cmd_verify(const Run& r) {
    AcceptanceOptions opts;
    opts.config = r.cfg;
    opts.cache_dir = r.cfg.cache_dir.empty() ? r.path("acceptance_cache") : r.cfg.cache_dir;
    opts.out_dir = r.out;
    opts.log = [](const std::string& s) { note(s); };
    int failed = 0;
    const auto results = run_acceptance(opts, [&](const CriterionResult& c) {
        std::printf("%s\n", format_result(c).c_str());
        std::fflush(stdout);
        if (!c.pass) ++failed;
    });
    std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 1;
}

void write_failure(const Options& o, const std::string& command, const std::string& kind, const std::string& what) {
    try {
        if (o.out.empty()) return;
        fs::create_directories(o.out);
        write_json((fs::path(o.out) / "failure.json").string(), {{"command", command}, {"error", kind}, {"message", what}});
    } catch (...) {
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier-spectral lab for the pseudo-relativistic Hartree equation"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    app.add_option("--config", o.config_path, "Experiment config (section.key = value)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "Output directory (overrides output.dir)");
    app.add_option("--workers", o.workers, "Worker threads (default HARTREE_LAB_THREADS or 1)")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for the initial perturbation (overrides seeds.perturbation)");
    app.add_option("--resume", o.resume, "Simulation-grid PRHF checkpoint to continue (evolve)")->check(CLI::ExistingFile);
    app.fallthrough();

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"groundstate", "Solve the sweep of boosted ground states; PRHF states and family.jsonl"},
        {"spectrum", "Hessian spectra and the kernel assumption verdict"},
        {"omega", "Symplectic matrices over the sweep"},
        {"evolve", "Raw PDE run with monitors"},
        {"track", "PDE run with modulation tracking"},
        {"effective", "Effective ODE for the soliton parameters"},
        {"scaling", "Epsilon study with exponent fits"},
        {"verify", "Full acceptance suite; exit 0 iff every criterion passes"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (*seed_opt) o.seed = seed;
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const Run r = prepare(o, command);
        if (command == "groundstate") return cmd_groundstate(r);
        if (command == "spectrum") return cmd_spectrum(r);
        if (command == "omega") return cmd_omega(r);
        if (command == "evolve") return cmd_evolve(r, o.resume);
        if (command == "track") return cmd_track(r);
        if (command == "effective") return cmd_effective(r);
        if (command == "scaling") return cmd_scaling(r);
        if (command == "verify") return cmd_verify(r);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const SolverFailure& e) {
        std::fprintf(stderr, "solver failure: %s (last residual %g)\n", e.what(), e.residual());
        write_failure(o, command, "solver failure", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        write_failure(o, command, "failure", e.what());
        return 1;
    }
    return 1;
}
