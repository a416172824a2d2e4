#pragma once

#include "hartree/config.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace hartree {

struct AcceptanceOptions {
    ExperimentConfig config;
    // Family tables and solved states persist here between runs.
    std::string cache_dir = "acceptance_cache";
    // acceptance.json and per-criterion artifacts; empty to skip writing.
    std::string out_dir;
    // Criteria to run (1..11); empty runs all of them.
    std::vector<int> only;
    std::function<void(const std::string&)> log;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string summary;
    nlohmann::json details;
};

// "[PASS] 3 kernel assumption: <summary> (12.3 s)"
std::string format_result(const CriterionResult& r);

// Runs the criteria in order. Each result is handed to `on_result` as soon
// as it is known. An exception inside a criterion marks it FAIL with the
// message as summary.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// Slow-transform oracles for the toy-grid comparison.
namespace oracle {

// Direct sums, unscaled forward and 1/n^3 inverse.
CVec slow_dft(const Grid& g, const CVec& u);
CVec slow_idft(const Grid& g, const CVec& u_hat);
// Applies the symbol(kx, ky, kz) by direct sums; bins with a Nyquist index
// are zeroed when `drop_nyquist` is set.
Field slow_multiplier(const Field& u, const std::function<cplx(double, double, double)>& symbol, bool drop_nyquist);

struct ToyComparison {
    std::string name;
    double max_relative_error = 0.0;
};

// Kinetic, boost, derivative, translation, Hartree, H^1/2 norm and
// upsampling against direct sums on an 8^3 grid.
std::vector<ToyComparison> multiplier_comparisons(std::uint64_t seed);

struct DenseComparison {
    std::vector<double> dense;
    std::vector<double> lanczos;
    double max_error = 0.0;  // max |dense - lanczos| / max(1, |dense|)
};

// Lowest `count` eigenvalues of the Hessian at a toy profile, from the dense
// matrix restricted to band-limited fields and from block Lanczos.
DenseComparison dense_eigen_comparison(int count, std::uint64_t seed);

} // namespace oracle

} // namespace hartree
