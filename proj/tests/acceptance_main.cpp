// Runs the acceptance criteria on the reference config and prints one
// PASS/FAIL line per criterion. Usage: acceptance [id ...]

#include "hartree/acceptance.hpp"
#include "hartree/errors.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    using namespace hartree;
    AcceptanceOptions opts;
    try {
        opts.config = load_config(HARTREE_REFERENCE_CONFIG);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    opts.cache_dir = HARTREE_ACCEPTANCE_CACHE;
    opts.out_dir = HARTREE_ACCEPTANCE_OUT;
    for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
    const auto start = std::chrono::steady_clock::now();
    opts.log = [start](const std::string& s) {
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "[%8.1f s] %s\n", t, s.c_str());
    };

    int failed = 0;
    const auto results = run_acceptance(opts, [&](const CriterionResult& r) {
        std::cout << format_result(r) << std::endl;
        if (!r.pass) ++failed;
    });
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
