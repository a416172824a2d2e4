#include "hartree/config.hpp"

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/io.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace hartree {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string where(const std::string& source, int line) { return source + ":" + std::to_string(line); }

struct ValueError {
    std::string what;
};

double to_double(const std::string& s) {
    double x = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || p != end || !std::isfinite(x)) throw ValueError{"expected a finite number, got '" + s + "'"};
    return x;
}

long long to_integer(const std::string& s) {
    long long x = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || p != end) throw ValueError{"expected an integer, got '" + s + "'"};
    return x;
}

std::uint64_t to_unsigned(const std::string& s) {
    std::uint64_t x = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || p != end) throw ValueError{"expected an unsigned integer, got '" + s + "'"};
    return x;
}

std::vector<double> to_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(to_double(trim(item)));
    if (out.empty()) throw ValueError{"expected a comma-separated list"};
    return out;
}

Vec3 to_vec3(const std::string& s) {
    const auto l = to_list(s);
    if (l.size() != 3) throw ValueError{"expected three comma-separated numbers, got '" + s + "'"};
    return {l[0], l[1], l[2]};
}

std::string show(double x) { return format_double(x); }
std::string show(const std::vector<double>& l) {
    std::string s;
    for (std::size_t i = 0; i < l.size(); ++i) s += (i ? ", " : "") + show(l[i]);
    return s;
}
std::string show(const Vec3& v) { return show(std::vector<double>{v[0], v[1], v[2]}); }

struct Key {
    std::string name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Key real_key(const std::string& name, T ExperimentConfig::*field) {
    return {name, [field](ExperimentConfig& c, const std::string& v) { c.*field = to_double(v); },
            [field](const ExperimentConfig& c) { return show(c.*field); }};
}

Key int_key(const std::string& name, int ExperimentConfig::*field) {
    return {name,
            [field, name](ExperimentConfig& c, const std::string& v) {
                const long long x = to_integer(v);
                if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
                    throw ValueError{"integer out of range"};
                c.*field = static_cast<int>(x);
            },
            [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

Key seed_key(const std::string& name, std::uint64_t ExperimentConfig::*field) {
    return {name, [field](ExperimentConfig& c, const std::string& v) { c.*field = to_unsigned(v); },
            [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

Key list_key(const std::string& name, std::vector<double> ExperimentConfig::*field) {
    return {name, [field](ExperimentConfig& c, const std::string& v) { c.*field = to_list(v); },
            [field](const ExperimentConfig& c) { return show(c.*field); }};
}

Key vec_key(const std::string& name, Vec3 ExperimentConfig::*field) {
    return {name, [field](ExperimentConfig& c, const std::string& v) { c.*field = to_vec3(v); },
            [field](const ExperimentConfig& c) { return show(c.*field); }};
}

Key text_key(const std::string& name, std::string ExperimentConfig::*field) {
    return {name, [field](ExperimentConfig& c, const std::string& v) { c.*field = v; },
            [field](const ExperimentConfig& c) { return c.*field; }};
}

const std::vector<Key>& keys() {
    using C = ExperimentConfig;
    static const std::vector<Key> table = {
        int_key("grid.n", &C::n),
        real_key("grid.L", &C::box_length),
        real_key("physics.m", &C::m),
        list_key("family.v", &C::speeds),
        list_key("family.mu", &C::frequencies),
        real_key("family.mu_margin", &C::mu_margin),
        real_key("family.speed_step", &C::speed_step),
        real_key("family.frequency_step", &C::frequency_step),
        int_key("family.stencil", &C::stencil),
        text_key("family.cache_dir", &C::cache_dir),
        {"potential.preset",
         [](C& c, const std::string& v) {
             try {
                 c.potential.preset = parse_preset(v);
             } catch (const std::exception&) {
                 throw ValueError{"unknown preset '" + v + "' (zero, gaussian_well, smooth_ramp, cosine_bump)"};
             }
         },
         [](const C& c) { return preset_name(c.potential.preset); }},
        {"potential.epsilon", [](C& c, const std::string& v) { c.potential.epsilon = to_double(v); },
         [](const C& c) { return show(c.potential.epsilon); }},
        {"potential.amplitude", [](C& c, const std::string& v) { c.potential.amplitude = to_double(v); },
         [](const C& c) { return show(c.potential.amplitude); }},
        {"potential.center", [](C& c, const std::string& v) { c.potential.center = to_vec3(v); },
         [](const C& c) { return show(c.potential.center); }},
        {"potential.derivative_constant",
         [](C& c, const std::string& v) { c.potential.derivative_constant = to_double(v); },
         [](const C& c) { return show(c.potential.derivative_constant); }},
        real_key("solver.tol", &C::solver_tol),
        int_key("solver.max_iter", &C::solver_max_iter),
        real_key("solver.boundary_tol", &C::boundary_tol),
        real_key("solver.continuation_step", &C::continuation_step),
        real_key("eigen.tol", &C::eig_tol),
        int_key("eigen.block_size", &C::block_size),
        int_key("eigen.max_basis", &C::max_basis),
        int_key("eigen.n", &C::spectral_n),
        real_key("decomposition.tol", &C::decomposition_tol),
        int_key("decomposition.max_steps", &C::decomposition_max_steps),
        real_key("decomposition.threshold", &C::manifold_threshold),
        real_key("evolution.dt", &C::dt),
        real_key("evolution.t_end", &C::t_end),
        int_key("evolution.monitor_stride", &C::monitor_stride),
        int_key("evolution.checkpoint_every", &C::checkpoint_every),
        vec_key("soliton.y", &C::soliton_y),
        vec_key("soliton.v", &C::soliton_v),
        real_key("soliton.theta", &C::soliton_theta),
        real_key("soliton.mu", &C::soliton_mu),
        real_key("soliton.xi0", &C::xi0_norm),
        list_key("scaling.epsilons", &C::epsilons),
        real_key("scaling.t_budget", &C::t_budget),
        real_key("scaling.xi0_fraction", &C::xi0_fraction),
        real_key("scaling.exponent_lo", &C::exponent_lo),
        real_key("scaling.exponent_hi", &C::exponent_hi),
        int_key("scaling.n", &C::scaling_n),
        seed_key("seeds.perturbation", &C::seed_perturbation),
        seed_key("seeds.eigen", &C::seed_eigen),
        seed_key("seeds.coercivity", &C::seed_coercivity),
        int_key("coercivity.samples", &C::coercivity_samples),
        text_key("output.dir", &C::output_dir),
    };
    return table;
}

// Names the key and, when it came from text, its line.
[[noreturn]] void fail(const ExperimentConfig& c, const std::string& key, const std::string& what) {
    auto it = c.lines.find(key);
    const std::string loc = it == c.lines.end() ? c.source : where(c.source, it->second);
    throw ConfigError(loc + ": " + key + ": " + what);
}

} // namespace

std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source) {
    std::vector<ConfigEntry> out;
    std::set<std::string> seen;
    std::stringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where(source, line) + ": expected 'section.key = value'");
        const std::string name = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const auto dot = name.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == name.size() || name.find('.', dot + 1) != std::string::npos)
            throw ConfigError(where(source, line) + ": key '" + name + "' must have the form section.key");
        if (value.empty()) throw ConfigError(where(source, line) + ": " + name + ": empty value");
        if (!seen.insert(name).second) throw ConfigError(where(source, line) + ": " + name + ": duplicate key");
        out.push_back({name.substr(0, dot), name.substr(dot + 1), value, line});
    }
    return out;
}

ExperimentConfig config_from_entries(const std::vector<ConfigEntry>& entries, const std::string& source) {
    ExperimentConfig c;
    c.source = source;
    for (const auto& e : entries) {
        const std::string name = e.section + "." + e.key;
        const Key* k = nullptr;
        for (const auto& cand : keys())
            if (cand.name == name) k = &cand;
        if (!k) throw ConfigError(where(source, e.line) + ": " + name + ": unknown key");
        try {
            k->set(c, e.value);
        } catch (const ValueError& err) {
            throw ConfigError(where(source, e.line) + ": " + name + ": " + err.what);
        }
        c.lines[name] = e.line;
    }
    validate(c);
    return c;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    return config_from_entries(parse_config_text(text, source), source);
}

ExperimentConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(path + ": cannot read config (" + e.what() + ")");
    }
    return parse_config(text, path);
}

std::string ExperimentConfig::to_text() const {
    std::string s;
    std::string section;
    for (const auto& k : keys()) {
        const std::string sec = k.name.substr(0, k.name.find('.'));
        if (sec != section && !section.empty()) s += '\n';
        section = sec;
        const std::string v = k.get(*this);
        if (v.empty()) continue;
        s += k.name + " = " + v + '\n';
    }
    return s;
}

void validate(const ExperimentConfig& c) {
    if (c.n < 8 || c.n % 2 != 0) fail(c, "grid.n", "must be an even number >= 8");
    if (!(c.box_length > 0.0)) fail(c, "grid.L", "must be positive");
    if (c.spectral_n < 8 || c.spectral_n % 2 != 0) fail(c, "eigen.n", "must be an even number >= 8");
    if (c.scaling_n < 8 || c.scaling_n % 2 != 0) fail(c, "scaling.n", "must be an even number >= 8");
    if (!(c.m > 0.0)) fail(c, "physics.m", "must be positive");
    if (c.mu_margin < 0.0) fail(c, "family.mu_margin", "must be non-negative");

    auto check_point = [&](const std::string& key, const Vec3& v, double mu) {
        const double s = speed(v);
        if (!(s < 0.6))
            fail(c, key, "|v| = " + show(s) + " violates the bound |v| < 0.6");
        const double bound = mu_lower_bound(v, c.m) + c.mu_margin * c.m;
        if (!(mu > bound))
            fail(c, key,
                 "mu = " + show(mu) + " violates the bound mu > mu_l(|v|) + margin = " + show(bound) + " at |v| = " +
                     show(s));
    };
    for (double s : c.speeds)
        if (!(std::abs(s) < 0.6)) fail(c, "family.v", "|v| = " + show(std::abs(s)) + " violates the bound |v| < 0.6");
    for (double s : c.speeds)
        for (double mu : c.frequencies) check_point("family.mu", {0.0, 0.0, s}, mu);
    check_point("soliton.mu", c.soliton_v, c.soliton_mu);

    if (!(c.speed_step > 0.0)) fail(c, "family.speed_step", "must be positive");
    if (!(c.frequency_step > 0.0)) fail(c, "family.frequency_step", "must be positive");
    if (c.stencil != 2 && c.stencil != 4) fail(c, "family.stencil", "must be 2 or 4");

    if (!(c.potential.epsilon > 0.0)) fail(c, "potential.epsilon", "violates the bound epsilon > 0");
    if (c.potential.amplitude < 0.0) fail(c, "potential.amplitude", "must be non-negative");
    for (double e : c.epsilons)
        if (!(e > 0.0)) fail(c, "scaling.epsilons", "violates the bound epsilon > 0");
    if (c.epsilons.size() < 2) fail(c, "scaling.epsilons", "an exponent fit needs at least two values");
    if (!(c.t_budget > 0.0)) fail(c, "scaling.t_budget", "must be positive");
    if (c.xi0_fraction < 0.0 || c.xi0_fraction > 1.0) fail(c, "scaling.xi0_fraction", "must lie in [0, 1]");
    if (!(c.exponent_lo < c.exponent_hi)) fail(c, "scaling.exponent_hi", "must exceed scaling.exponent_lo");

    if (!(c.solver_tol > 0.0)) fail(c, "solver.tol", "must be positive");
    if (c.solver_max_iter < 1) fail(c, "solver.max_iter", "must be at least 1");
    if (!(c.boundary_tol > 0.0)) fail(c, "solver.boundary_tol", "must be positive");
    if (!(c.continuation_step > 0.0) || c.continuation_step > 0.05)
        fail(c, "solver.continuation_step", "must lie in (0, 0.05]");
    if (!(c.eig_tol > 0.0)) fail(c, "eigen.tol", "must be positive");
    if (c.block_size < 1) fail(c, "eigen.block_size", "must be at least 1");
    if (c.max_basis < 2 * c.block_size) fail(c, "eigen.max_basis", "must be at least twice eigen.block_size");
    if (!(c.decomposition_tol > 0.0)) fail(c, "decomposition.tol", "must be positive");
    if (c.decomposition_max_steps < 1) fail(c, "decomposition.max_steps", "must be at least 1");
    if (!(c.manifold_threshold > 0.0)) fail(c, "decomposition.threshold", "must be positive");
    if (!(c.dt > 0.0)) fail(c, "evolution.dt", "must be positive");
    if (c.t_end < 0.0) fail(c, "evolution.t_end", "must be non-negative");
    if (c.monitor_stride < 1) fail(c, "evolution.monitor_stride", "must be at least 1");
    if (c.checkpoint_every < 0) fail(c, "evolution.checkpoint_every", "must be non-negative");
    if (c.xi0_norm < 0.0) fail(c, "soliton.xi0", "must be non-negative");
    if (c.coercivity_samples < 1) fail(c, "coercivity.samples", "must be at least 1");
}

GroundStateOptions ExperimentConfig::solver_options() const {
    GroundStateOptions o;
    o.tol = solver_tol;
    o.max_iter = solver_max_iter;
    o.boundary_tol = boundary_tol;
    o.continuation_step = continuation_step;
    o.mu_margin = mu_margin;
    return o;
}

SpectralOptions ExperimentConfig::spectral_options() const {
    SpectralOptions o;
    o.eig_tol = eig_tol;
    o.block_size = block_size;
    o.max_basis = max_basis;
    o.seed = seed_eigen;
    return o;
}

FamilyTableOptions ExperimentConfig::family_options() const {
    FamilyTableOptions o;
    o.speed_step = speed_step;
    o.frequency_step = frequency_step;
    o.stencil = stencil;
    o.solver = solver_options();
    o.cache_dir = cache_dir;
    return o;
}

DecompositionOptions ExperimentConfig::decomposition_options() const {
    DecompositionOptions o;
    o.tol = decomposition_tol;
    o.max_steps = decomposition_max_steps;
    return o;
}

EvolutionConfig ExperimentConfig::evolution_config() const {
    EvolutionConfig e;
    e.dt = dt;
    e.t_end = t_end;
    e.monitor_stride = monitor_stride;
    e.m = m;
    e.x_weight_eps = potential.epsilon;
    e.checkpoint_every = checkpoint_every;
    return e;
}

SolitonParams ExperimentConfig::soliton() const {
    SolitonParams p;
    p.y = soliton_y;
    p.v = soliton_v;
    p.theta = soliton_theta;
    p.mu = soliton_mu;
    return p;
}

LengthScales length_scales(const ExperimentConfig& c) {
    LengthScales out;
    const double s = speed(c.soliton_v);
    const double delta = std::min(c.m, (c.soliton_mu - mu_lower_bound(c.soliton_v, c.m)) / std::sqrt(1.0 - s * s));
    out.soliton_length = 1.0 / delta;
    double grad = 0.0;
    if (c.potential.preset != PotentialPreset::zero && c.potential.amplitude > 0.0)
        grad = Potential(c.potential, c.grid(), false).max_gradient();
    out.exp_length = grad > 0.0 ? 1.0 / grad : std::numeric_limits<double>::infinity();
    out.effective_epsilon = grad > 0.0 ? out.soliton_length / out.exp_length : 0.0;
    return out;
}

nlohmann::json manifest(const ExperimentConfig& c, const std::string& command, std::uint64_t seed) {
    const std::string text = c.to_text();
    const LengthScales ls = length_scales(c);
    nlohmann::json j;
    j["tool"] = "hartree_lab";
    j["version"] = kVersion;
    j["command"] = command;
    j["config_source"] = c.source;
    j["config_fingerprint"] = fingerprint(text);
    j["config"] = text;
    j["seed"] = seed;
    j["tolerances"] = {{"groundstate", c.solver_tol},
                       {"boundary", c.boundary_tol},
                       {"eigen", c.eig_tol},
                       {"decomposition", c.decomposition_tol},
                       {"dt", c.dt}};
    j["length_scales"] = {{"l_exp", std::isfinite(ls.exp_length) ? nlohmann::json(ls.exp_length) : nlohmann::json()},
                          {"l_sol", ls.soliton_length},
                          {"epsilon_effective", ls.effective_epsilon}};
    return j;
}

} // namespace hartree
