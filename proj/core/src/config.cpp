#include "fracbdsde/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracbdsde {

const char* const kVersionString = "fracbdsde 0.1.0";

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        bad_value(key, "not a number: '" + v + "'");
    }
    if (pos != v.size()) bad_value(key, "trailing characters in '" + v + "'");
    if (!std::isfinite(x)) bad_value(key, "non-finite value");
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        bad_value(key, "not an integer: '" + v + "'");
    }
    if (pos != v.size()) bad_value(key, "trailing characters in '" + v + "'");
    return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) bad_value(key, "empty list");
    return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " of '" + path + "' is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
        entries.emplace_back(key, val);
    }
    return entries;
}

void apply_entries(RunConfig& cfg,
                   const std::vector<std::pair<std::string, std::string>>& entries) {
    for (const auto& [key, v] : entries) {
        if (key == "hurst") {
            cfg.hurst = parse_double(key, v);
            if (!(cfg.hurst > 0.0 && cfg.hurst < 0.5))
                bad_value(key, "must lie in (0, 1/2)");
        } else if (key == "horizon") {
            cfg.horizon = parse_double(key, v);
            if (!(cfg.horizon > 0.0)) bad_value(key, "must be positive");
        } else if (key == "steps") {
            const long long n = parse_int(key, v);
            if (n < 2 || n > 1 << 20) bad_value(key, "must lie in [2, 2^20]");
            cfg.steps = int(n);
        } else if (key == "paths") {
            const long long n = parse_int(key, v);
            if (n < 1 || n > 100000000) bad_value(key, "must lie in [1, 1e8]");
            cfg.paths = int(n);
        } else if (key == "seed") {
            const long long n = parse_int(key, v);
            if (n < 0) bad_value(key, "must be nonnegative");
            cfg.seed = std::uint64_t(n);
        } else if (key == "gamma") {
            cfg.gamma_pieces = parse_list(key, v);
        } else if (key == "gamma_p") {
            cfg.gamma_p = parse_double(key, v);
            if (!(cfg.gamma_p > 1.0)) bad_value(key, "must exceed 1");
        } else if (key == "driver") {
            make_driver(v);  // membership check
            cfg.driver = v;
        } else if (key == "terminal") {
            make_terminal(v, cfg.steps);
            cfg.terminal = v;
        } else if (key == "coeff") {
            make_coefficients(v);
            cfg.coeff = v;
        } else if (key == "degree") {
            const long long n = parse_int(key, v);
            if (n < 1 || n > 4) bad_value(key, "must lie in [1, 4]");
            cfg.degree = int(n);
        } else if (key == "blocks") {
            const long long n = parse_int(key, v);
            if (n < 1 || n > 100000) bad_value(key, "must lie in [1, 1e5]");
            cfg.blocks = int(n);
        } else if (key == "inner_paths") {
            const long long n = parse_int(key, v);
            if (n < 0 || n > 10000000) bad_value(key, "must lie in [0, 1e7]");
            cfg.inner_paths = int(n);
        } else if (key == "x_max") {
            cfg.x_max = parse_double(key, v);
            if (!(cfg.x_max > 0.0)) bad_value(key, "must be positive");
        } else if (key == "lattice") {
            const long long n = parse_int(key, v);
            if (n < 3 || n > 100000) bad_value(key, "must lie in [3, 1e5]");
            cfg.lattice = int(n);
        } else if (key == "c_hp") {
            cfg.c_hp = parse_double(key, v);
            if (!(cfg.c_hp > 0.0)) bad_value(key, "must be positive");
        } else if (key == "out") {
            cfg.out = v;
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
}

RunConfig parse_config(const std::string& file_or_empty,
                       const std::vector<std::pair<std::string, std::string>>& flag_overrides) {
    RunConfig cfg;
    std::vector<std::pair<std::string, std::string>> entries;
    if (!file_or_empty.empty()) entries = read_kv_file(file_or_empty);
    entries.insert(entries.end(), flag_overrides.begin(), flag_overrides.end());
    apply_entries(cfg, entries);
    return cfg;
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    std::string gamma;
    for (std::size_t i = 0; i < cfg.gamma_pieces.size(); ++i)
        gamma += (i ? "," : "") + num(cfg.gamma_pieces[i]);
    return {
        {"hurst", num(cfg.hurst)},
        {"horizon", num(cfg.horizon)},
        {"steps", std::to_string(cfg.steps)},
        {"paths", std::to_string(cfg.paths)},
        {"seed", std::to_string(cfg.seed)},
        {"gamma", gamma},
        {"gamma_p", num(cfg.gamma_p)},
        {"driver", cfg.driver},
        {"terminal", cfg.terminal},
        {"coeff", cfg.coeff},
        {"degree", std::to_string(cfg.degree)},
        {"blocks", std::to_string(cfg.blocks)},
        {"inner_paths", std::to_string(cfg.inner_paths)},
        {"x_max", num(cfg.x_max)},
        {"lattice", std::to_string(cfg.lattice)},
        {"c_hp", num(cfg.c_hp)},
    };
}

GammaSpec make_gamma(const RunConfig& cfg, const TimeGrid& grid) {
    const int n = grid.n_steps();
    const std::size_t pieces = cfg.gamma_pieces.size();
    if (int(pieces) > n)
        throw std::invalid_argument("config: key 'gamma': more pieces than grid cells");
    std::vector<double> cells(std::size_t(n), 0.0);
    for (int i = 0; i < n; ++i)
        cells[std::size_t(i)] = cfg.gamma_pieces[std::size_t(i) * pieces / std::size_t(n)];
    return GammaSpec(grid, std::move(cells), cfg.gamma_p);
}

LinearCoeffs linear_example() {
    LinearCoeffs lc;
    lc.f1 = 0.5;
    lc.f2 = 0.4;
    lc.f3 = 0.3;
    lc.b = 0.25;
    lc.sigma = 1.0;
    return lc;
}

BdsdeDriver make_driver(const std::string& id) {
    BdsdeDriver d;
    if (id == "zero") {
        d.f = [](double, double, double, double) { return 0.0; };
        d.has_x = false;
        d.lipschitz = 0.0;
    } else if (id == "linear") {
        const LinearCoeffs lc = linear_example();
        d.f = [lc](double, double x, double y, double z) {
            return lc.f1 * x + lc.f2 * y + lc.f3 * z;
        };
        d.has_x = true;
        d.lipschitz = std::max(std::abs(lc.f2), std::abs(lc.f3));
    } else if (id == "linear_shifted") {
        // the linear driver raised by a constant; comparison partner
        const LinearCoeffs lc = linear_example();
        d.f = [lc](double, double x, double y, double z) {
            return lc.f1 * x + lc.f2 * y + lc.f3 * z + 0.25;
        };
        d.has_x = true;
        d.lipschitz = std::max(std::abs(lc.f2), std::abs(lc.f3));
    } else if (id == "smooth") {
        d.f = [](double, double x, double y, double z) {
            return 0.5 * std::sin(y) + 0.25 * std::cos(z) + 0.1 * std::tanh(x);
        };
        d.has_x = true;
        d.lipschitz = 0.5;
    } else {
        throw std::invalid_argument("config: key 'driver': unknown id '" + id + "'");
    }
    return d;
}

TerminalSpec make_terminal(const std::string& id, int n_steps) {
    if (id == "one") return TerminalSpec::constant(1.0);
    if (id == "x") return TerminalSpec::phi_of_x0([](double x) { return x; });
    if (id == "x2") return TerminalSpec::phi_of_x0([](double x) { return x * x; });
    if (id == "w") return TerminalSpec::w_poly({{1.0, {{n_steps, 1}}}});
    if (id == "w2") return TerminalSpec::w_poly({{1.0, {{n_steps, 2}}}});
    throw std::invalid_argument("config: key 'terminal': unknown id '" + id + "'");
}

CoefficientSet make_coefficients(const std::string& id) {
    CoefficientSet c;
    if (id == "heat") {
        c.sigma = [](double) { return 1.0; };
        c.b = [](double) { return 0.0; };
        c.phi = [](double x) { return x * x; };
        c.sigma_prime = [](double) { return 0.0; };
        c.b_prime = [](double) { return 0.0; };
        c.phi_prime = [](double x) { return 2.0 * x; };
        c.driver = make_driver("zero");
        c.fx = [](double, double, double, double) { return 0.0; };
        c.fy = c.fx;
        c.fz = c.fx;
        c.lip_sigma = 0.0;
        c.lip_b = 0.0;
        c.lip_phi = 30.0;  // envelope over the sampled range
    } else if (id == "linear") {
        const LinearCoeffs lc = linear_example();
        c.sigma = [lc](double) { return lc.sigma; };
        c.b = [lc](double) { return lc.b; };
        c.phi = [](double x) { return x; };
        c.sigma_prime = [](double) { return 0.0; };
        c.b_prime = [](double) { return 0.0; };
        c.phi_prime = [](double) { return 1.0; };
        c.driver = make_driver("linear");
        c.fx = [lc](double, double, double, double) { return lc.f1; };
        c.fy = [lc](double, double, double, double) { return lc.f2; };
        c.fz = [lc](double, double, double, double) { return lc.f3; };
        c.lip_sigma = 0.0;
        c.lip_b = 0.0;
        c.lip_phi = 1.0;
    } else if (id == "smooth") {
        c.sigma = [](double x) { return 0.6 + 0.2 * std::tanh(x); };
        c.b = [](double x) { return 0.3 * std::tanh(x); };
        c.phi = [](double x) { return std::tanh(x); };
        c.sigma_prime = [](double x) {
            const double t = std::tanh(x);
            return 0.2 * (1.0 - t * t);
        };
        c.b_prime = [](double x) {
            const double t = std::tanh(x);
            return 0.3 * (1.0 - t * t);
        };
        c.phi_prime = [](double x) {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        };
        c.driver = make_driver("smooth");
        c.fx = [](double, double x, double, double) {
            const double t = std::tanh(x);
            return 0.1 * (1.0 - t * t);
        };
        c.fy = [](double, double, double y, double) { return 0.5 * std::cos(y); };
        c.fz = [](double, double, double, double z) { return -0.25 * std::sin(z); };
        c.lip_sigma = 0.2;
        c.lip_b = 0.3;
        c.lip_phi = 1.0;
    } else {
        throw std::invalid_argument("config: key 'coeff': unknown id '" + id + "'");
    }
    return c;
}

DriftSpec make_drift(const std::string& id) {
    DriftSpec d;
    if (id == "zero") {
        d.b = [](double, double) { return 0.0; };
        d.lipschitz = 0.0;
        d.bound_at_zero = 0.0;
    } else if (id == "linear") {
        d.b = [](double, double x) { return 0.4 * x; };
        d.lipschitz = 0.4;
        d.bound_at_zero = 0.0;
    } else if (id == "sin") {
        d.b = [](double t, double x) { return std::sin(x) + 0.2 * std::cos(t); };
        d.lipschitz = 1.0;
        d.bound_at_zero = 1.2;
    } else {
        throw std::invalid_argument("config: unknown drift id '" + id + "'");
    }
    return d;
}

}  // namespace fracbdsde
