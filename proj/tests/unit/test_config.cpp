#include "hartree/config.hpp"
#include "hartree/errors.hpp"

#include <doctest.h>

#include <string>

using namespace hartree;

namespace {

std::string error_of(const std::string& text) {
    try {
        validate(parse_config(text, "test.cfg"));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

} // namespace

TEST_CASE("parsing sections, comments and lists") {
    const auto cfg = parse_config("# comment\ngrid.n = 32   # trailing\n\nfamily.mu = 0.45, 0.55\npotential.preset = smooth_ramp\n"
                                  "potential.center = 1, 2, 3\nseeds.perturbation = 18446744073709551615\n");
    CHECK(cfg.n == 32);
    CHECK(cfg.frequencies == std::vector<double>{0.45, 0.55});
    CHECK(cfg.potential.preset == PotentialPreset::smooth_ramp);
    CHECK(cfg.potential.center == Vec3{1.0, 2.0, 3.0});
    CHECK(cfg.seed_perturbation == 18446744073709551615ull);
    CHECK(cfg.lines.at("grid.n") == 2);
}

TEST_CASE("canonical text parses back to the same config") {
    ExperimentConfig a;
    a.n = 40;
    a.epsilons = {0.2, 0.1};
    a.soliton_v = {0.01, 0.0, 0.25};
    a.output_dir = "elsewhere";
    const ExperimentConfig b = parse_config(a.to_text());
    CHECK(b.to_text() == a.to_text());
    CHECK(b.n == 40);
    CHECK(b.soliton_v == a.soliton_v);
}

TEST_CASE("errors name the line and key") {
    CHECK(contains(error_of("grid.n = 32\ngrid.size = 3\n"), "test.cfg:2: grid.size"));
    CHECK(contains(error_of("grid.L = forty\n"), "grid.L"));
    CHECK(contains(error_of("grid.L = forty\n"), "forty"));
    CHECK(contains(error_of("grid.n = 32\ngrid.n = 48\n"), "test.cfg:2"));
    CHECK(contains(error_of("no equals sign\n"), "test.cfg:1"));
}

TEST_CASE("validation names the violated bound") {
    const std::string speed = error_of("soliton.v = 0, 0, 0.7\n");
    CHECK(contains(speed, "soliton.mu"));
    CHECK(contains(speed, "|v| < 0.6"));
    const std::string freq = error_of("family.mu = 0.01\n");
    CHECK(contains(freq, "family.mu"));
    CHECK(contains(freq, "mu > mu_l(|v|) + margin"));
    CHECK(contains(error_of("potential.epsilon = 0\n"), "epsilon > 0"));
    CHECK(contains(error_of("scaling.epsilons = 0.1, -0.05\n"), "epsilon > 0"));
    CHECK(error_of("") == "");
}

TEST_CASE("manifest carries version, seed and fingerprint") {
    const ExperimentConfig a;
    ExperimentConfig b;
    b.dt = 0.005;
    const auto ma = manifest(a, "evolve", 11);
    const auto mb = manifest(b, "evolve", 11);
    CHECK(ma["version"] == kVersion);
    CHECK(ma["seed"] == 11);
    CHECK(ma["config_fingerprint"] != mb["config_fingerprint"]);
    CHECK(ma["config_fingerprint"] == manifest(a, "track", 3)["config_fingerprint"]);
}

TEST_CASE("length scales") {
    // A tanh(eps x3) is steepest at its center, a grid point, with slope A eps
    const ExperimentConfig cfg =
        parse_config("potential.preset = smooth_ramp\npotential.center = 0, 0, 0\npotential.amplitude = 0.2\n"
                     "potential.epsilon = 0.05\nsoliton.v = 0, 0, 0.3\nsoliton.mu = 0.5\n");
    const LengthScales ls = length_scales(cfg);
    CHECK(ls.exp_length == doctest::Approx(1.0 / (0.2 * 0.05)).epsilon(1e-12));
    // decay rate (mu - 1 + sqrt(1 - s^2)) / sqrt(1 - s^2) below m = 1
    const double root = std::sqrt(1.0 - 0.09);
    CHECK(ls.soliton_length == doctest::Approx(root / (0.5 - 1.0 + root)).epsilon(1e-12));
    CHECK(ls.effective_epsilon == doctest::Approx(ls.soliton_length / ls.exp_length));
}
