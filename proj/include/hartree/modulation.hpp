#pragma once

#include "hartree/decomposition.hpp"
#include "hartree/evolution.hpp"
#include "hartree/potential.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hartree {

struct TrackConfig {
    EvolutionConfig evolution;  // decompositions run every monitor_stride steps
    DecompositionOptions decomposition;
    ProjectionOptions projection;
    bool lyapunov = true;
};

// alpha = (v - y', v', mu - theta' - V(y), mu'); entries are NaN where the
// five-point stencil does not fit.
struct ModulationSample {
    double t = 0.0;
    SolitonParams zeta;
    double theta_unwrapped = 0.0;
    Vector8d alpha = Vector8d::Constant(std::numeric_limits<double>::quiet_NaN());
    Vector8d residual = Vector8d::Constant(std::numeric_limits<double>::quiet_NaN());  // Y
    Vector8d omega_residual = Vector8d::Constant(std::numeric_limits<double>::quiet_NaN());  // X = Omega Y
    // d_t P(phi_zeta) + N(phi) grad V(y) from differences of P(phi_zeta)
    Vec3 momentum_balance{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN()};
    double xi_l2 = 0.0;
    double xi_hhalf = 0.0;
    double xi_x = 0.0;
    double weighted = 0.0;  // Q = <xi, |x| xi> about the soliton center
    double lyapunov = 0.0;  // S
    double soliton_mass = 0.0;
    Vec3 soliton_momentum{0.0, 0.0, 0.0};
    double soliton_mass_rate = std::numeric_limits<double>::quiet_NaN();     // chain rule
    double soliton_mass_rate_fd = std::numeric_limits<double>::quiet_NaN();  // differences of N(phi_zeta)
    double potential_at_center = 0.0;
    Vec3 force{0.0, 0.0, 0.0};  // grad V(y)
    double constraint_norm = 0.0;
    int newton_steps = 0;
    bool ok = true;
};

struct ModulationTrace {
    std::vector<ModulationSample> samples;
    MonitorTrace monitor;
    std::string status = "complete";
    double lost_time = std::numeric_limits<double>::quiet_NaN();
    double t_end = 0.0;

    // Header (t, y1..y3, v1..v3, theta, mu, alpha1..alpha8, Ynorm, xi_hhalf,
    // Q, S, dN_soliton, ok).
    std::string csv() const;
    // max over samples with finite alpha of |alpha_k| for k in [first, last)
    double max_alpha(int first, int last) const;
    double max_momentum_balance() const;
    double max_soliton_mass_rate() const;
    double max_xi_x() const;
};

// Y_j = alpha_j + N(phi) sum_{nu <= 3} (Omega^{-1})_{j nu} d_nu V(y).
Vector8d modulation_residual(const Vector8d& alpha, const FamilyScalars& sc, const Vec3& grad_v);

// S = (mu - V(y))(N(psi) - N(phi)) - v.(P(psi) - P(phi)) + H_V(psi) - H_V(phi)
// with P = 1/2 <psi, J grad psi>. V samples on psi's grid; empty for V = 0.
double lyapunov(const Field& psi, const SolitonParams& zeta, FamilyTable& table, const RVec& V_samples,
                double V_at_center);

// Evolves psi0, decomposing every monitor_stride steps (warm started), and
// fills alpha, Y, X by five-point differences. A lost decomposition ends
// the run with status "decomposition lost".
ModulationTrace track(const Field& psi0, const TrackConfig& cfg, FamilyTable& table, const PotentialSpec* V,
                      const std::optional<SolitonParams>& guess = std::nullopt);

// Five-point centered derivative of equally spaced samples; NaN within two
// samples of either end.
std::vector<double> five_point_derivative(const std::vector<double>& f, double spacing);
// Continues a phase sequence across 2 pi jumps by the nearest branch.
std::vector<double> unwrap_phase(const std::vector<double>& theta);

struct EffectiveState {
    double t = 0.0;
    Vec3 y{0.0, 0.0, 0.0};
    Vec3 v{0.0, 0.0, 0.0};
    double theta = 0.0;
    double mu = 0.0;
};

// Classical RK4 on y' = v, gamma v' = -grad V(y), mu' = n_mu^{-1} n_v^T
// gamma^{-1} grad V(y), theta' = mu - V(y), with family scalars from the
// table. Throws DomainExit carrying the time when the state leaves it.
std::vector<EffectiveState> effective_integrate(const EffectiveState& z0, FamilyTable& table,
                                                const PotentialSpec* V, double t_end, double dt);

struct ScalingRun {
    double epsilon = 0.0;
    double t_target = 0.0;
    double t_reached = 0.0;
    std::string status;
    double max_center_drift = 0.0;     // |y' - v|
    double max_mass_rate = 0.0;        // |d_t N(phi)|
    double max_phase_drift = 0.0;      // |theta' - mu + V(y)|
    double max_momentum_balance = 0.0; // |d_t P(phi) + N grad V|
    double max_xi_x = 0.0;
    double seconds = 0.0;
};

struct ExponentFit {
    std::string quantity;
    double exponent = 0.0;
    double constant = 0.0;  // max value ~ constant * eps^exponent
    bool pass = false;
};

struct ScalingReport {
    std::vector<ScalingRun> runs;
    std::vector<ExponentFit> fits;
    std::vector<ModulationTrace> traces;  // one per run, in epsilon order
    double xi_over_eps = 0.0;  // max over runs of max ||xi||_X / eps
    bool pass = false;
    nlohmann::json to_json() const;
};

struct ScalingConfig {
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    TrackConfig track;
    PotentialSpec potential;   // epsilon overwritten per run
    SolitonParams initial;     // psi0 = phi_zeta + xi0
    // ||xi0||_X = xi0_fraction * eps (zero for the unperturbed path)
    double xi0_fraction = 0.0;
    std::uint64_t xi0_seed = 11;
    double t_budget = 40.0;    // runs stop at min(1/eps, t_budget)
    double exponent_lo = 1.6;
    double exponent_hi = 2.4;
};

// Least-squares slope and intercept of log(value) against log(eps).
ExponentFit fit_exponent(const std::string& name, const std::vector<double>& eps, const std::vector<double>& values,
                         double lo, double hi);

using ScalingProgress = std::function<void(const ScalingRun&)>;
// Epsilon runs are independent; `workers` > 1 runs them on that many
// threads. Results are ordered as cfg.epsilons either way.
ScalingReport scaling_study(const ScalingConfig& cfg, FamilyTable& table, const ScalingProgress& progress = {},
                            int workers = 1);

} // namespace hartree
