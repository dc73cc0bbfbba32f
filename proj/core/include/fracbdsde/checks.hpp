#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace fracbdsde {

// One acceptance criterion, executable standalone; `out_dir` nonempty makes
// the check also emit its CSV artifacts there.
struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

CriterionResult check_fbm_law(const RunConfig& cfg, const std::string& out_dir = "");
CriterionResult check_inversion(const RunConfig& cfg, const std::string& out_dir = "");
CriterionResult check_transfer(const RunConfig& cfg, const std::string& out_dir = "");
CriterionResult check_girsanov(const RunConfig& cfg, const std::string& out_dir = "");
CriterionResult check_duality(const RunConfig& cfg, const std::string& out_dir = "");
CriterionResult check_anticipating(const RunConfig& cfg, const std::string& out_dir = "");
CriterionResult check_bdsde(const RunConfig& cfg, const std::string& out_dir = "");
CriterionResult check_spde(const RunConfig& cfg, const std::string& out_dir = "");
CriterionResult check_estimates(const RunConfig& cfg, const std::string& out_dir = "");

std::vector<CriterionResult> run_acceptance(const RunConfig& cfg,
                                            const std::string& out_dir = "");

// Experiment runner behind the CLI: executes one subcommand, writes CSVs and
// manifest.txt into cfg.out, returns 0 iff every in-scope assertion passed.
int run_subcommand(const std::string& sub, const RunConfig& cfg);

}  // namespace fracbdsde
