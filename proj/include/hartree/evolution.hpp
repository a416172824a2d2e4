#pragma once

#include "hartree/field.hpp"
#include "hartree/potential.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hartree {

struct EvolutionConfig {
    double dt = 0.01;
    double t_end = 1.0;
    int monitor_stride = 10;
    double m = 1.0;
    // Weight of the |x| term in the monitored X-norm.
    double x_weight_eps = 0.05;
    // Off for linear-dispersion tests.
    bool nonlinear = true;
    // PRHF checkpoint every this many steps (0 disables); written to
    // checkpoint_path.
    int checkpoint_every = 0;
    std::string checkpoint_path;
};


struct MonitorSample {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    Vec3 momentum{0.0, 0.0, 0.0};
    double x_norm = 0.0;
    // -1/2 <psi, grad V psi>
    Vec3 force{0.0, 0.0, 0.0};
};

struct MonitorTrace {
    std::vector<MonitorSample> samples;
    std::vector<std::string> warnings;

    // Header (t, N, H, Px, Py, Pz, Xnorm).
    std::string csv() const;
    double max_relative_mass_drift() const;
    double max_relative_energy_drift() const;
    double max_momentum_drift() const;
};

// Strang splitting for i psi_t = T psi + V psi - (1/|x| * |psi|^2) psi on
// the simulation grid: half step of the potential phase, exact kinetic step,
// half step with the refreshed potential. The phase is pointwise, so |psi|
// and hence the Hartree potential are unchanged by it; mass is conserved to
// round-off and the step is exactly reversible.
//
// Fields handed to evolve() live on the analysis grid as band-limited
// trigonometric polynomials; the simulation grid has twice the points per
// axis, so the initial cubic term is resolved without aliasing.
class Propagator {
public:
    // `sim` is the grid the field is stepped on; V is sampled there.
    Propagator(const Grid& sim, double dt, const PotentialSpec* V, double m, bool nonlinear = true);

    void step(Field& psi) const;
    // `steps` Strang steps with adjacent potential half steps merged.
    void advance(Field& psi, int steps) const;
    void potential_substep(Field& psi, double tau) const;
    void kinetic_substep(Field& psi, double tau) const;
    double dt() const { return dt_; }
    double mass_parameter() const { return m_; }
    const Grid& grid() const { return grid_; }
    // dt * max kinetic symbol
    double stiffness() const { return stiffness_; }
    // null for the zero potential
    const Potential* potential() const { return potential_.get(); }

private:
    Grid grid_;
    double dt_;
    double m_;
    bool nonlinear_;
    std::unique_ptr<Potential> potential_;
    CVec kinetic_phase_;  // exp(-i dt T(k))
    double stiffness_ = 0.0;
};

// Analysis grid <-> simulation grid (twice the points per axis).
Grid simulation_grid(const Grid& analysis);
Field to_simulation(const Field& u);
Field to_analysis(const Field& u_sim, const Grid& analysis);

// One Strang step on the simulation grid of psi's grid; the result is
// projected back onto psi's grid.
Field step(const Field& psi, double dt, const PotentialSpec* V, double m, bool nonlinear = true);

// Collocated energy on the grid of psi: kinetic + potential - Hartree term.
double collocated_energy(const Field& psi, const RVec& V, double m);

// Monitors evaluated on the simulation grid with collocated functionals.
MonitorSample monitor(const Field& psi_sim, double t, const Propagator& prop, const PotentialSpec* V,
                      double x_weight_eps);

// Hook called at t = 0 and after every monitor_stride steps with the field
// projected onto the analysis grid.
using EvolutionHook = std::function<void(double t, const Field& psi)>;

struct EvolutionResult {
    Field psi;      // analysis grid
    Field psi_sim;  // simulation grid
    MonitorTrace trace;
    double t = 0.0;
    int steps = 0;
};

// Simulation-grid field as PRHF plus `path.json` holding the time.
void write_checkpoint(const std::string& path, const Field& psi_sim, double m, double t);
double checkpoint_time(const std::string& path);

// Refuses mass >= 1.4 (above the printed critical-mass bound) and warns
// above 2/pi. Throws BlowUp (after writing the last good checkpoint when
// configured) if the field stops being finite.
// psi0 may be given on the analysis grid (it is embedded exactly) or, when
// resuming, already on a simulation grid (`resume_sim` true, t0 the start
// time).
EvolutionResult evolve(const Field& psi0, const EvolutionConfig& cfg, const PotentialSpec* V,
                       const EvolutionHook& hook = {}, bool resume_sim = false, double t0 = 0.0);

// Max over interior samples and components of |dP/dt - force| with dP/dt by
// central differences; needs at least five samples.
double ehrenfest_residual(const MonitorTrace& trace);

} // namespace hartree
