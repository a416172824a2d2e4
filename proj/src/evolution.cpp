#include "hartree/evolution.hpp"
#include "hartree/errors.hpp"
#include "hartree/fft.hpp"
#include "hartree/functionals.hpp"
#include "hartree/io.hpp"
#include "hartree/prhf.hpp"
#include "hartree/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hartree {

Grid simulation_grid(const Grid& analysis) { return dealiaser(analysis)->fine(); }

Field to_simulation(const Field& u) {
    const auto d = dealiaser(u.grid());
    return Field(d->fine(), d->upsample(u));
}

Field to_analysis(const Field& u_sim, const Grid& analysis) {
    const auto d = dealiaser(analysis);
    if (!(u_sim.grid() == d->fine())) throw InvalidField("to_analysis: field is not on the simulation grid");
    return d->downsample(u_sim.values());
}

Propagator::Propagator(const Grid& sim, double dt, const PotentialSpec* V, double m, bool nonlinear)
    : grid_(sim), dt_(dt), m_(m), nonlinear_(nonlinear) {
    if (!(dt != 0.0) || !std::isfinite(dt)) throw ParameterDomain("propagator: dt must be finite and nonzero");
    if (!(m > 0.0)) throw ParameterDomain("propagator: mass parameter must be positive");
    if (V && V->preset != PotentialPreset::zero && V->amplitude != 0.0)
        potential_ = std::make_unique<Potential>(*V, sim, false);
    const auto T = kinetic_multiplier(sim, m);
    kinetic_phase_.resize(sim.size());
    for (std::size_t i = 0; i < sim.size(); ++i) {
        stiffness_ = std::max(stiffness_, std::abs(dt) * T->symbol[i]);
        kinetic_phase_[i] = std::polar(1.0, -dt * T->symbol[i]);
    }
}

void Propagator::kinetic_substep(Field& psi, double tau) const {
    fft_forward(grid_, psi.data());
    if (tau == dt_) {
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= kinetic_phase_[i];
    } else {
        const auto T = kinetic_multiplier(grid_, m_);
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -tau * T->symbol[i]);
    }
    fft_inverse(grid_, psi.data());
}

void Propagator::potential_substep(Field& psi, double tau) const {
    if (!nonlinear_ && !potential_) return;
    RVec chi;
    if (nonlinear_) {
        chi = hartree_potential(grid_, density(psi));
        for (auto& x : chi) x = -x;
    } else {
        chi.assign(psi.size(), 0.0);
    }
    if (potential_) {
        const RVec& v = potential_->samples();
        for (std::size_t i = 0; i < chi.size(); ++i) chi[i] += v[i];
    }
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -tau * chi[i]);
}

void Propagator::step(Field& psi) const {
    if (!(psi.grid() == grid_)) throw InvalidField("propagator: field is not on the simulation grid");
    potential_substep(psi, 0.5 * dt_);
    kinetic_substep(psi, dt_);
    potential_substep(psi, 0.5 * dt_);
}

void Propagator::advance(Field& psi, int steps) const {
    if (!(psi.grid() == grid_)) throw InvalidField("propagator: field is not on the simulation grid");
    if (steps <= 0) return;
    // The phase leaves |psi| unchanged, so the closing half step of one
    // step and the opening half step of the next share one potential.
    potential_substep(psi, 0.5 * dt_);
    for (int s = 0; s < steps; ++s) {
        kinetic_substep(psi, dt_);
        potential_substep(psi, s + 1 < steps ? dt_ : 0.5 * dt_);
    }
}

Field step(const Field& psi, double dt, const PotentialSpec* V, double m, bool nonlinear) {
    const Propagator p(simulation_grid(psi.grid()), dt, V, m, nonlinear);
    Field u = to_simulation(psi);
    p.step(u);
    if (!u.all_finite()) throw BlowUp("step produced a non-finite field", dt);
    return to_analysis(u, psi.grid());
}

double collocated_energy(const Field& psi, const RVec& V, double m) {
    const Grid& g = psi.grid();
    const RVec rho = density(psi);
    const RVec Phi = hartree_potential(g, rho);
    double pot = 0.0, inter = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!V.empty()) pot += V[i] * rho[i];
        inter += Phi[i] * rho[i];
    }
    const double h3 = g.cell_volume();
    return 0.5 * inner(psi, apply_kinetic(psi, m)) + 0.5 * pot * h3 - 0.25 * inter * h3;
}

MonitorSample monitor(const Field& psi, double t, const Propagator& prop, const PotentialSpec* V, double x_weight_eps) {
    (void)V;
    MonitorSample s;
    s.t = t;
    s.mass = mass(psi);
    const Potential* pot = prop.potential();
    s.energy = collocated_energy(psi, pot ? pot->samples() : RVec{}, prop.mass_parameter());
    s.momentum = momentum(psi);
    s.x_norm = norms(psi, x_weight_eps).x_weight;
    if (pot) {
        const RVec rho = density(psi);
        const double h3 = psi.grid().cell_volume();
        for (int a = 0; a < 3; ++a) {
            double acc = 0.0;
            const RVec& dV = pot->gradient_samples()[a];
            for (std::size_t i = 0; i < rho.size(); ++i) acc += dV[i] * rho[i];
            s.force[a] = -0.5 * acc * h3;
        }
    }
    return s;
}

std::string MonitorTrace::csv() const {
    CsvTable t({"t", "N", "H", "Px", "Py", "Pz", "Xnorm"});
    for (const auto& s : samples) t.add_row({s.t, s.mass, s.energy, s.momentum[0], s.momentum[1], s.momentum[2], s.x_norm});
    return t.str();
}

double MonitorTrace::max_relative_mass_drift() const {
    double d = 0.0;
    for (const auto& s : samples) d = std::max(d, std::abs(s.mass - samples.front().mass) / samples.front().mass);
    return d;
}

double MonitorTrace::max_relative_energy_drift() const {
    double d = 0.0;
    const double ref = std::max(std::abs(samples.front().energy), 1e-300);
    for (const auto& s : samples) d = std::max(d, std::abs(s.energy - samples.front().energy) / ref);
    return d;
}

double MonitorTrace::max_momentum_drift() const {
    double d = 0.0;
    for (const auto& s : samples)
        for (int a = 0; a < 3; ++a) d = std::max(d, std::abs(s.momentum[a] - samples.front().momentum[a]));
    return d;
}

void write_checkpoint(const std::string& path, const Field& psi_sim, double m, double t) {
    write_prhf(path, psi_sim, m);
    write_json(path + ".json", {{"t", t}, {"n", psi_sim.grid().n()}, {"L", psi_sim.grid().length()}});
}

double checkpoint_time(const std::string& path) {
    const auto j = nlohmann::json::parse(read_file(path + ".json"));
    return j.at("t").get<double>();
}

EvolutionResult evolve(const Field& psi0, const EvolutionConfig& cfg, const PotentialSpec* V, const EvolutionHook& hook,
                       bool resume_sim, double t0) {
    psi0.require_finite("evolve");
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0) || cfg.monitor_stride < 1)
        throw ConfigError("evolve: dt, t_end and monitor_stride must be positive");
    if (resume_sim && psi0.grid().n() % 4 != 0)
        throw InvalidField("evolve: resumed field does not live on a simulation grid");
    const Grid analysis = resume_sim ? Grid(psi0.grid().n() / 2, psi0.grid().length()) : psi0.grid();
    const Grid sim = simulation_grid(analysis);
    if (V) Potential(*V, analysis);  // derivative-hierarchy check
    Field psi = resume_sim ? psi0 : to_simulation(psi0);
    const double N0 = mass(psi);
    if (N0 >= 1.4) {
        std::ostringstream ss;
        ss << "evolve: mass " << N0 << " is not below the critical-mass bound 1.4";
        throw ParameterDomain(ss.str());
    }
    EvolutionResult res{to_analysis(psi, analysis), psi, {}, t0, 0};
    if (N0 > 2.0 / std::numbers::pi) {
        std::ostringstream ss;
        ss << "mass " << N0 << " lies in the window (2/pi, 1.4) where the critical mass is not known";
        res.trace.warnings.push_back(ss.str());
    }
    const Propagator prop(sim, cfg.dt, V, cfg.m, cfg.nonlinear);
    if (prop.stiffness() >= 0.5) {
        std::ostringstream ss;
        ss << "dt * max kinetic symbol = " << prop.stiffness() << " exceeds 0.5; splitting error may dominate";
        res.trace.warnings.push_back(ss.str());
    }
    const int total = static_cast<int>(std::llround((cfg.t_end - t0) / cfg.dt));
    Field last_good = psi;
    double last_good_t = t0;
    res.trace.samples.push_back(monitor(psi, t0, prop, V, cfg.x_weight_eps));
    if (hook) hook(t0, res.psi);
    int done = 0;
    while (done < total) {
        int chunk = std::min(cfg.monitor_stride - done % cfg.monitor_stride, total - done);
        if (cfg.checkpoint_every > 0) chunk = std::min(chunk, cfg.checkpoint_every - done % cfg.checkpoint_every);
        prop.advance(psi, chunk);
        done += chunk;
        const double t = t0 + done * cfg.dt;
        if (!psi.all_finite()) {
            if (!cfg.checkpoint_path.empty()) write_checkpoint(cfg.checkpoint_path, last_good, cfg.m, last_good_t);
            std::ostringstream ss;
            ss << "evolution blew up between t = " << last_good_t << " and t = " << t;
            throw BlowUp(ss.str(), t);
        }
        last_good = psi;
        last_good_t = t;
        if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && !cfg.checkpoint_path.empty())
            write_checkpoint(cfg.checkpoint_path, psi, cfg.m, t);
        res.t = t;
        res.steps = done;
        if (done % cfg.monitor_stride == 0 || done == total) {
            res.trace.samples.push_back(monitor(psi, t, prop, V, cfg.x_weight_eps));
            const auto& tr = res.trace.samples;
            const double prev = tr[tr.size() - 2].x_norm;
            if (std::abs(tr.back().x_norm - prev) > 0.1 * prev) {
                std::ostringstream ss;
                ss << "X-norm jumped by more than 10% at t = " << t;
                res.trace.warnings.push_back(ss.str());
            }
            if (hook) hook(t, to_analysis(psi, analysis));
        }
    }
    res.psi_sim = psi;
    res.psi = to_analysis(psi, analysis);
    return res;
}

double ehrenfest_residual(const MonitorTrace& trace) {
    const auto& s = trace.samples;
    if (s.size() < 5) throw ContractViolation("ehrenfest_residual: need at least five monitor samples");
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double h = s[i + 1].t - s[i - 1].t;
        for (int a = 0; a < 3; ++a) {
            const double dP = (s[i + 1].momentum[a] - s[i - 1].momentum[a]) / h;
            worst = std::max(worst, std::abs(dP - s[i].force[a]));
        }
    }
    return worst;
}

} // namespace hartree
