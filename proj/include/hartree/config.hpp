#pragma once

#include "hartree/decomposition.hpp"
#include "hartree/evolution.hpp"
#include "hartree/family.hpp"
#include "hartree/groundstate.hpp"
#include "hartree/potential.hpp"
#include "hartree/spectral_analysis.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hartree {

inline constexpr const char* kVersion = "0.1.0";

// One `section.key = value` line.
struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

// Flat key-value text: `#` starts a comment, one dot per key, lists are
// comma separated. Throws ConfigError naming the line.
std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source = "config");

struct ExperimentConfig {
    std::string source = "defaults";
    // line of each key that was set from text, for diagnostics
    std::map<std::string, int> lines;

    // grid
    int n = 64;
    double box_length = 40.0;
    // physics
    double m = 1.0;
    // family: sweep points and table lattice
    std::vector<double> speeds{0.0, 0.2};
    std::vector<double> frequencies{0.4, 0.5, 0.6};
    double mu_margin = 0.05;
    double speed_step = 0.05;
    double frequency_step = 0.025;
    int stencil = 4;
    std::string cache_dir;
    // potential
    PotentialSpec potential{PotentialPreset::gaussian_well, 0.05, 0.1, {0.0, 0.0, -3.0}, 20.0};
    // solver
    double solver_tol = 1e-10;
    int solver_max_iter = 3000;
    double boundary_tol = 1e-4;
    double continuation_step = 0.05;
    // eigen
    double eig_tol = 1e-8;
    int block_size = 4;
    int max_basis = 48;
    // decomposition
    double decomposition_tol = 1e-9;
    int decomposition_max_steps = 25;
    double manifold_threshold = 0.25;
    // evolution
    double dt = 0.01;
    double t_end = 10.0;
    int monitor_stride = 10;
    int checkpoint_every = 0;
    // soliton initial data
    Vec3 soliton_y{0.0, 0.0, 0.0};
    Vec3 soliton_v{0.0, 0.0, 0.1};
    double soliton_theta = 0.0;
    double soliton_mu = 0.5;
    double xi0_norm = 0.0;  // ||xi0||_X of the initial perturbation
    // scaling study
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    double t_budget = 40.0;
    double xi0_fraction = 0.5;
    double exponent_lo = 1.6;
    double exponent_hi = 2.4;
    int scaling_n = 48;
    // spectral checks at their own resolution
    int spectral_n = 48;
    // seeds
    std::uint64_t seed_perturbation = 11;
    std::uint64_t seed_eigen = 2024;
    std::uint64_t seed_coercivity = 7;
    // coercivity
    int coercivity_samples = 500;
    // output
    std::string output_dir = "out";

    Grid grid() const { return Grid(n, box_length); }
    GroundStateOptions solver_options() const;
    SpectralOptions spectral_options() const;
    FamilyTableOptions family_options() const;
    DecompositionOptions decomposition_options() const;
    EvolutionConfig evolution_config() const;
    SolitonParams soliton() const;

    // Canonical `section.key = value` text; parsing it gives back this config.
    std::string to_text() const;
};

// Applies entries over the defaults. Unknown keys and malformed values
// throw ConfigError with the line and key.
ExperimentConfig config_from_entries(const std::vector<ConfigEntry>& entries, const std::string& source);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");

// Length scales: l_exp = 1 / sup|grad V|, l_sol = 1 / delta with delta the
// decay-rate bound of the soliton, and their ratio.
struct LengthScales {
    double exp_length = 0.0;
    double soliton_length = 0.0;
    double effective_epsilon = 0.0;
};
LengthScales length_scales(const ExperimentConfig& cfg);

// Throws ConfigError naming the violated bound: mu > mu_l(|v|) + margin for
// every sweep and soliton point, |v| < 0.6, eps > 0, and the grid, time step
// and tolerance ranges.
void validate(const ExperimentConfig& cfg);

// Config fingerprint, version, seed and tolerances.
nlohmann::json manifest(const ExperimentConfig& cfg, const std::string& command, std::uint64_t seed);

} // namespace hartree
