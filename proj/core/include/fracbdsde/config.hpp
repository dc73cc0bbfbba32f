#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anticipating.hpp"
#include "bdsde.hpp"
#include "girsanov.hpp"
#include "grid.hpp"
#include "hurst.hpp"
#include "spde.hpp"

namespace fracbdsde {

// Resolved run configuration. Every field maps to a key=value entry; flags
// override file entries.
struct RunConfig {
    double hurst = 0.3;
    double horizon = 1.0;
    int steps = 64;
    int paths = 100000;
    std::uint64_t seed = 42;
    std::vector<double> gamma_pieces{0.5};  // spread evenly over the grid cells
    double gamma_p = 4.0;
    std::string driver = "linear";
    std::string terminal = "x";
    std::string coeff = "linear";
    int degree = 2;
    int blocks = 16;       // outer B-path blocks for the doubly stochastic runs
    int inner_paths = 0;   // W paths per block; 0 = paths / blocks
    double x_max = 5.0;
    int lattice = 9;       // spatial evaluation points for the field
    double c_hp = 1.0;     // calibration constant of the moment bound
    std::string out;       // output directory (CLI only)

    int inner() const { return inner_paths > 0 ? inner_paths : std::max(paths / blocks, 8); }
};

// Parse "key=value" lines (UTF-8, '#' comments); throws naming the offending
// key on unknown keys, bad values, or out-of-range entries.
std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path);

// Apply entries onto cfg in order (later entries win, so flag overrides are
// appended after the file entries). Validates each value.
void apply_entries(RunConfig& cfg,
                   const std::vector<std::pair<std::string, std::string>>& entries);

RunConfig parse_config(const std::string& file_or_empty,
                       const std::vector<std::pair<std::string, std::string>>& flag_overrides);

// One-line echo of every resolved key (manifest form).
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg);

// Registered catalogs; unknown ids throw with the id named.
GammaSpec make_gamma(const RunConfig& cfg, const TimeGrid& grid);
BdsdeDriver make_driver(const std::string& id);
TerminalSpec make_terminal(const std::string& id, int n_steps);
CoefficientSet make_coefficients(const std::string& id);
DriftSpec make_drift(const std::string& id);

// The constants of the linear worked example (driver id "linear",
// coefficient id "linear").
LinearCoeffs linear_example();

extern const char* const kVersionString;

}  // namespace fracbdsde
