#include "hartree/modulation.hpp"

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/io.hpp"
#include "hartree/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

namespace hartree {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Vector3d as_eigen(const Vec3& a) { return Eigen::Vector3d(a[0], a[1], a[2]); }

struct PotentialProbe {
    std::unique_ptr<Potential> pot;
    double value(const Vec3& y) const { return pot ? pot->value(y) : 0.0; }
    Vec3 gradient(const Vec3& y) const { return pot ? pot->gradient(y) : Vec3{0.0, 0.0, 0.0}; }
    const RVec& samples() const {
        static const RVec empty;
        return pot ? pot->samples() : empty;
    }
};

PotentialProbe make_probe(const PotentialSpec* V, const Grid& g) {
    PotentialProbe p;
    if (V && V->preset != PotentialPreset::zero && V->amplitude != 0.0) p.pot = std::make_unique<Potential>(*V, g, false);
    return p;
}

double lyapunov_with_profile(const Field& psi, const Field& phi_lab, const SolitonParams& zeta, double m,
                             const RVec& V, double V_at_center) {
    const Vec3 dp = [&] {
        const Vec3 a = momentum(psi), b = momentum(phi_lab);
        return Vec3{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
    }();
    return (zeta.mu - V_at_center) * (mass(psi) - mass(phi_lab)) -
           (zeta.v[0] * dp[0] + zeta.v[1] * dp[1] + zeta.v[2] * dp[2]) + energy(psi, V, m) - energy(phi_lab, V, m);
}

// Signals the end of tracking from inside the evolution hook.
struct TrackingStopped {
    std::string reason;
    double time;
};

} // namespace

std::vector<double> five_point_derivative(const std::vector<double>& f, double spacing) {
    std::vector<double> d(f.size(), kNaN);
    for (std::size_t i = 2; i + 2 < f.size(); ++i)
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * spacing);
    return d;
}

std::vector<double> unwrap_phase(const std::vector<double>& theta) {
    std::vector<double> out(theta.size());
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (i == 0) {
            out[i] = theta[i];
            continue;
        }
        out[i] = theta[i] + two_pi * std::round((out[i - 1] - theta[i]) / two_pi);
    }
    return out;
}

Vector8d modulation_residual(const Vector8d& alpha, const FamilyScalars& sc, const Vec3& grad_v) {
    Eigen::Matrix3d g;
    Eigen::Vector3d q;
    double gamma_scalar = 0.0;
    inverse_blocks(sc.tau, sc.n_v, sc.n_mu, g, q, gamma_scalar);
    const Matrix8d inv = omega_inverse_from_blocks(g, q, gamma_scalar);
    const Eigen::Vector3d f = as_eigen(grad_v);
    return alpha + sc.n * inv.leftCols<3>() * f;
}

double lyapunov(const Field& psi, const SolitonParams& zeta, FamilyTable& table, const RVec& V_samples,
                double V_at_center) {
    const Field phi = soliton_field(table, zeta);
    return lyapunov_with_profile(psi, phi, zeta, table.mass_parameter(), V_samples, V_at_center);
}

ModulationTrace track(const Field& psi0, const TrackConfig& cfg, FamilyTable& table, const PotentialSpec* V,
                      const std::optional<SolitonParams>& guess) {
    const Grid& g = psi0.grid();
    if (g != table.grid()) throw ContractViolation("track: psi0 and the family table live on different grids");
    const PotentialProbe probe = make_probe(V, g);
    const double m = table.mass_parameter();
    const double eps = cfg.evolution.x_weight_eps;

    ModulationTrace trace;
    SolitonParams start;
    if (guess) {
        start = *guess;
    } else {
        start = orthogonal_project(psi0, table, cfg.projection).params;
    }
    std::vector<double> unwrapped;

    auto record = [&](double t, const Field& psi) {
        SolitonParams warm = start;
        const std::size_t k = trace.samples.size();
        if (k >= 2) {
            // Linear extrapolation from the last two samples.
            const Vector8d a = to_vector(trace.samples[k - 1].zeta), b = to_vector(trace.samples[k - 2].zeta);
            Vector8d x = 2.0 * a - b;
            x(6) = 2.0 * unwrapped[k - 1] - unwrapped[k - 2];
            warm = from_vector(x);
        } else if (k == 1) {
            warm = trace.samples[0].zeta;
        }
        Decomposition d(g);
        try {
            d = skew_decompose(psi, warm, table, cfg.decomposition, t);
        } catch (const DecompositionLost& e) {
            throw TrackingStopped{e.what(), t};
        }
        ModulationSample s;
        s.t = t;
        s.zeta = d.params;
        s.constraint_norm = d.constraint_norm;
        s.newton_steps = d.iterations;
        const Field& xi = d.residual_field;
        const Norms nx = norms(xi, eps);
        s.xi_l2 = nx.l2;
        s.xi_hhalf = nx.h_half;
        s.xi_x = nx.x_weight;
        s.weighted = weighted_moment(xi, {0.0, 0.0, 0.0});
        const Field phi = to_soliton_frame(psi, d.params) - xi;
        s.soliton_mass = mass(phi);
        s.soliton_momentum = momentum(phi);
        s.potential_at_center = probe.value(d.params.y);
        s.force = probe.gradient(d.params.y);
        if (cfg.lyapunov)
            s.lyapunov = lyapunov_with_profile(psi, to_lab_frame(phi, d.params), d.params, m, probe.samples(),
                                               s.potential_at_center);
        const double th = d.params.theta;
        unwrapped.push_back(k == 0 ? th
                                   : th + 2.0 * std::numbers::pi *
                                              std::round((unwrapped.back() - th) / (2.0 * std::numbers::pi)));
        s.theta_unwrapped = unwrapped.back();
        trace.samples.push_back(std::move(s));
        start = d.params;
    };

    try {
        EvolutionResult res = evolve(psi0, cfg.evolution, V, record);
        trace.monitor = std::move(res.trace);
        trace.t_end = res.t;
    } catch (const TrackingStopped& stop) {
        trace.status = "decomposition lost: " + stop.reason;
        trace.lost_time = stop.time;
        trace.t_end = stop.time;
    }

    // Derivatives over windows of equally spaced samples.
    const std::size_t n = trace.samples.size();
    if (n < 5) return trace;
    const double spacing = cfg.evolution.dt * cfg.evolution.monitor_stride;
    std::vector<std::vector<double>> series(12, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = trace.samples[i];
        for (int j = 0; j < 3; ++j) {
            series[j][i] = s.zeta.y[j];
            series[3 + j][i] = s.zeta.v[j];
            series[8 + j][i] = s.soliton_momentum[j];
        }
        series[6][i] = s.theta_unwrapped;
        series[7][i] = s.zeta.mu;
        series[11][i] = s.soliton_mass;
    }
    std::vector<std::vector<double>> rate(12);
    for (int c = 0; c < 12; ++c) rate[c] = five_point_derivative(series[c], spacing);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        bool uniform = true;
        for (std::size_t j = i - 2; j < i + 2; ++j)
            uniform = uniform &&
                      std::abs(trace.samples[j + 1].t - trace.samples[j].t - spacing) < 1e-9 * std::max(1.0, spacing);
        if (!uniform) continue;
        auto& s = trace.samples[i];
        Vector8d a;
        for (int j = 0; j < 3; ++j) {
            a(j) = s.zeta.v[j] - rate[j][i];
            a(3 + j) = rate[3 + j][i];
        }
        a(6) = s.zeta.mu - rate[6][i] - s.potential_at_center;
        a(7) = rate[7][i];
        s.alpha = a;
        const FamilyScalars sc = table.scalars(s.zeta.v, s.zeta.mu);
        s.residual = modulation_residual(a, sc, s.force);
        s.omega_residual = omega_from_scalars(sc.tau, sc.n_v, sc.n_mu) * s.residual;
        for (int j = 0; j < 3; ++j) s.momentum_balance[j] = rate[8 + j][i] + sc.n * s.force[j];
        s.soliton_mass_rate = sc.n_mu * a(7) + sc.n_v.dot(Eigen::Vector3d(a(3), a(4), a(5)));
        s.soliton_mass_rate_fd = rate[11][i];
    }
    return trace;
}

std::string ModulationTrace::csv() const {
    std::vector<std::string> header{"t", "y1", "y2", "y3", "v1", "v2", "v3", "theta", "mu"};
    for (int j = 1; j <= 8; ++j) header.push_back("alpha" + std::to_string(j));
    for (const char* h : {"Ynorm", "xi_hhalf", "Q", "S", "dN_soliton", "ok"}) header.push_back(h);
    CsvTable tab(header);
    for (const auto& s : samples) {
        std::vector<double> row{s.t, s.zeta.y[0], s.zeta.y[1], s.zeta.y[2], s.zeta.v[0], s.zeta.v[1], s.zeta.v[2],
                                s.zeta.theta, s.zeta.mu};
        for (int j = 0; j < 8; ++j) row.push_back(s.alpha(j));
        row.push_back(s.residual.norm());
        row.push_back(s.xi_hhalf);
        row.push_back(s.weighted);
        row.push_back(s.lyapunov);
        row.push_back(s.soliton_mass_rate);
        row.push_back(s.ok ? 1.0 : 0.0);
        tab.add_row(row);
    }
    return tab.str();
}

double ModulationTrace::max_alpha(int first, int last) const {
    double r = 0.0;
    for (const auto& s : samples)
        for (int j = first; j < last; ++j)
            if (std::isfinite(s.alpha(j))) r = std::max(r, std::abs(s.alpha(j)));
    return r;
}

double ModulationTrace::max_momentum_balance() const {
    double r = 0.0;
    for (const auto& s : samples)
        for (double x : s.momentum_balance)
            if (std::isfinite(x)) r = std::max(r, std::abs(x));
    return r;
}

double ModulationTrace::max_soliton_mass_rate() const {
    double r = 0.0;
    for (const auto& s : samples)
        if (std::isfinite(s.soliton_mass_rate)) r = std::max(r, std::abs(s.soliton_mass_rate));
    return r;
}

double ModulationTrace::max_xi_x() const {
    double r = 0.0;
    for (const auto& s : samples) r = std::max(r, s.xi_x);
    return r;
}

std::vector<EffectiveState> effective_integrate(const EffectiveState& z0, FamilyTable& table,
                                                const PotentialSpec* V, double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw ConfigError("effective_integrate: dt and t_end must be positive");
    const PotentialProbe probe = make_probe(V, table.grid());
    using State = Eigen::Matrix<double, 8, 1>;  // y, v, theta, mu
    auto rhs = [&](const State& x, double t) {
        const Vec3 y{x(0), x(1), x(2)}, v{x(3), x(4), x(5)};
        FamilyScalars sc;
        try {
            sc = table.scalars(v, x(7));
        } catch (const DomainExit& e) {
            throw DomainExit(e.what(), t);
        }
        const Eigen::Vector3d f = as_eigen(probe.gradient(y));
        const Eigen::Vector3d gf = sc.gamma.ldlt().solve(f);
        State d;
        d.segment<3>(0) = Eigen::Vector3d(v[0], v[1], v[2]);
        d.segment<3>(3) = -gf;
        d(6) = x(7) - probe.value(y);
        d(7) = sc.n_v.dot(gf) / sc.n_mu;
        return d;
    };
    State x;
    x << z0.y[0], z0.y[1], z0.y[2], z0.v[0], z0.v[1], z0.v[2], z0.theta, z0.mu;
    std::vector<EffectiveState> out;
    auto push = [&](double t) {
        EffectiveState e;
        e.t = t;
        e.y = {x(0), x(1), x(2)};
        e.v = {x(3), x(4), x(5)};
        e.theta = wrap_phase(x(6));
        e.mu = x(7);
        out.push_back(e);
    };
    const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
    double t = 0.0;
    push(t);
    for (int k = 0; k < steps; ++k) {
        const double h = std::min(dt, t_end - t);
        const State k1 = rhs(x, t);
        const State k2 = rhs(x + 0.5 * h * k1, t);
        const State k3 = rhs(x + 0.5 * h * k2, t);
        const State k4 = rhs(x + h * k3, t);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = k + 1 == steps ? t_end : t + h;
        push(t);
    }
    return out;
}

ExponentFit fit_exponent(const std::string& name, const std::vector<double>& eps, const std::vector<double>& values,
                         double lo, double hi) {
    ExponentFit f;
    f.quantity = name;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps.size() && i < values.size(); ++i)
        if (eps[i] > 0.0 && values[i] > 0.0 && std::isfinite(values[i])) {
            lx.push_back(std::log(eps[i]));
            ly.push_back(std::log(values[i]));
        }
    if (lx.size() < 2) {
        f.exponent = kNaN;
        f.constant = kNaN;
        return f;
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / n, my += ly[i] / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxx += (lx[i] - mx) * (lx[i] - mx), sxy += (lx[i] - mx) * (ly[i] - my);
    f.exponent = sxy / sxx;
    f.constant = std::exp(my - f.exponent * mx);
    f.pass = f.exponent >= lo && f.exponent <= hi;
    return f;
}

ScalingReport scaling_study(const ScalingConfig& cfg, FamilyTable& table, const ScalingProgress& progress,
                            int workers) {
    for (double e : cfg.epsilons)
        if (!(e > 0.0)) throw ConfigError("scaling_study: epsilon must be positive");
    const Field phi0 = table.sample(cfg.initial.v, cfg.initial.mu).phi;
    std::mutex progress_mutex;

    auto one_run = [&](double e) {
        const auto t0 = std::chrono::steady_clock::now();
        ScalingRun run;
        run.epsilon = e;
        TrackConfig tc = cfg.track;
        tc.evolution.x_weight_eps = e;
        const double block = tc.evolution.dt * tc.evolution.monitor_stride;
        run.t_target = std::min(1.0 / e, cfg.t_budget);
        tc.evolution.t_end = std::max(block, std::round(run.t_target / block) * block);
        PotentialSpec V = cfg.potential;
        V.epsilon = e;
        Field psi0 = phi0;
        if (cfg.xi0_fraction > 0.0)
            psi0 += skew_orthogonal_perturbation(table, cfg.initial.v, cfg.initial.mu, cfg.xi0_seed,
                                                 cfg.xi0_fraction * e, e);
        ModulationTrace tr = track(to_lab_frame(psi0, cfg.initial), tc, table, &V, cfg.initial);
        run.t_reached = tr.t_end;
        run.status = tr.status;
        run.max_center_drift = tr.max_alpha(0, 3);
        run.max_mass_rate = tr.max_soliton_mass_rate();
        run.max_phase_drift = tr.max_alpha(6, 7);
        run.max_momentum_balance = tr.max_momentum_balance();
        run.max_xi_x = tr.max_xi_x();
        run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(run);
        }
        return std::make_pair(run, std::move(tr));
    };

    const std::size_t count = cfg.epsilons.size();
    std::vector<std::optional<std::pair<ScalingRun, ModulationTrace>>> results(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = one_run(cfg.epsilons[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min<int>(workers, static_cast<int>(count)); ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        results[i] = one_run(cfg.epsilons[i]);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    ScalingReport rep;
    std::vector<double> eps, drift, mass_rate, phase, balance;
    for (auto& r : results) {
        const ScalingRun& run = r->first;
        rep.runs.push_back(run);
        rep.traces.push_back(std::move(r->second));
        eps.push_back(run.epsilon);
        drift.push_back(run.max_center_drift);
        mass_rate.push_back(run.max_mass_rate);
        phase.push_back(run.max_phase_drift);
        balance.push_back(run.max_momentum_balance);
        rep.xi_over_eps = std::max(rep.xi_over_eps, run.max_xi_x / run.epsilon);
    }
    rep.fits = {fit_exponent("center_drift", eps, drift, cfg.exponent_lo, cfg.exponent_hi),
                fit_exponent("soliton_mass_rate", eps, mass_rate, cfg.exponent_lo, cfg.exponent_hi),
                fit_exponent("phase_drift", eps, phase, cfg.exponent_lo, cfg.exponent_hi),
                fit_exponent("momentum_balance", eps, balance, cfg.exponent_lo, cfg.exponent_hi)};
    rep.pass = true;
    for (const auto& f : rep.fits) rep.pass = rep.pass && f.pass;
    return rep;
}

nlohmann::json ScalingReport::to_json() const {
    nlohmann::json j;
    for (const auto& r : runs)
        j["runs"].push_back({{"epsilon", r.epsilon},
                             {"t_target", r.t_target},
                             {"t_reached", r.t_reached},
                             {"fraction_of_horizon", r.t_reached * r.epsilon},
                             {"status", r.status},
                             {"max_center_drift", r.max_center_drift},
                             {"max_soliton_mass_rate", r.max_mass_rate},
                             {"max_phase_drift", r.max_phase_drift},
                             {"max_momentum_balance", r.max_momentum_balance},
                             {"max_xi_x", r.max_xi_x},
                             {"seconds", r.seconds}});
    for (const auto& f : fits)
        j["fits"].push_back({{"quantity", f.quantity}, {"exponent", f.exponent}, {"constant", f.constant}, {"pass", f.pass}});
    j["xi_x_over_eps"] = xi_over_eps;
    j["pass"] = pass;
    return j;
}

} // namespace hartree
