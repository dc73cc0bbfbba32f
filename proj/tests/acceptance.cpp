#include <cstdio>
#include <string>
#include <vector>

#include "fracbdsde/checks.hpp"
#include "fracbdsde/config.hpp"

// Runs every acceptance criterion at the default configuration and prints one
// pass/fail line per criterion. Exit status is nonzero iff any criterion
// fails.
int main(int argc, char** argv) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (int i = 1; i + 1 < argc; i += 2) {
        std::string key = argv[i];
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        overrides.emplace_back(key, argv[i + 1]);
    }
    fracbdsde::RunConfig cfg;
    try {
        cfg = fracbdsde::parse_config("", overrides);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: %s\n", e.what());
        return 2;
    }

    using Check = fracbdsde::CriterionResult (*)(const fracbdsde::RunConfig&,
                                                 const std::string&);
    const Check checks[] = {
        fracbdsde::check_fbm_law,  fracbdsde::check_inversion,
        fracbdsde::check_transfer, fracbdsde::check_girsanov,
        fracbdsde::check_duality,  fracbdsde::check_anticipating,
        fracbdsde::check_bdsde,    fracbdsde::check_spde,
        fracbdsde::check_estimates,
    };
    int failures = 0, total = 0;
    for (Check check : checks) {
        const fracbdsde::CriterionResult r = check(cfg, "");
        std::printf("criterion %d (%s): %s [%.1fs] %s\n", r.index, r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.seconds, r.details.c_str());
        std::fflush(stdout);
        ++total;
        if (!r.pass) ++failures;
    }
    std::printf("%d/%d criteria passed\n", total - failures, total);
    return failures == 0 ? 0 : 1;
}
