#include "hartree/modulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace hartree;

TEST_CASE("five-point derivative is exact on quartics") {
    const double h = 0.1;
    std::vector<double> f;
    for (int i = 0; i < 12; ++i) {
        const double t = i * h;
        f.push_back(3.0 - t + 2.0 * t * t - 0.5 * t * t * t + 0.25 * t * t * t * t);
    }
    const auto d = five_point_derivative(f, h);
    REQUIRE(d.size() == f.size());
    CHECK(std::isnan(d[0]));
    CHECK(std::isnan(d[1]));
    CHECK(std::isnan(d[10]));
    CHECK(std::isnan(d[11]));
    for (int i = 2; i < 10; ++i) {
        const double t = i * h;
        CHECK(d[i] == doctest::Approx(-1.0 + 4.0 * t - 1.5 * t * t + t * t * t).epsilon(1e-12));
    }
}

TEST_CASE("five-point derivative converges at fourth order") {
    auto err = [](double h) {
        std::vector<double> f;
        for (int i = 0; i < 5; ++i) f.push_back(std::sin(1.0 + (i - 2) * h));
        return std::abs(five_point_derivative(f, h)[2] - std::cos(1.0));
    };
    CHECK(std::log2(err(0.1) / err(0.05)) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("exponent fit recovers a power law") {
    const std::vector<double> eps{0.1, 0.05, 0.025};
    std::vector<double> vals;
    for (double e : eps) vals.push_back(0.7 * e * e);
    const ExponentFit f = fit_exponent("q", eps, vals, 1.6, 2.4);
    CHECK(f.exponent == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.constant == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(f.pass);
    for (auto& v : vals) v = std::sqrt(v);
    CHECK_FALSE(fit_exponent("q", eps, vals, 1.6, 2.4).pass);
    CHECK(std::isnan(fit_exponent("q", {0.1}, {0.01}, 1.6, 2.4).exponent));
}

TEST_CASE("phase unwrapping follows the nearest branch") {
    const double tp = 2.0 * M_PI;
    std::vector<double> truth, wrapped;
    for (int i = 0; i < 40; ++i) {
        const double th = 0.7 * i;
        truth.push_back(th);
        wrapped.push_back(std::remainder(th, tp));
    }
    const auto back = unwrap_phase(wrapped);
    for (std::size_t i = 0; i < truth.size(); ++i) CHECK(back[i] == doctest::Approx(truth[i]).epsilon(1e-12));
}
