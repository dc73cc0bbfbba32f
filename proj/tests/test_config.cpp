#include <cstdio>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "fracbdsde/config.hpp"

using namespace fracbdsde;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& contents) {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("fracbdsde_test_" + std::to_string(counter++) + ".cfg");
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("config file parsing with comments and whitespace") {
    TempFile f("# example run\nhurst = 0.25\nsteps=32\npaths = 10000  # small\nseed=7\n");
    const RunConfig cfg = parse_config(f.path.string(), {});
    CHECK(cfg.hurst == doctest::Approx(0.25));
    CHECK(cfg.steps == 32);
    CHECK(cfg.paths == 10000);
    CHECK(cfg.seed == 7);
    CHECK(cfg.horizon == doctest::Approx(1.0));  // untouched default
}

TEST_CASE("flags override file entries") {
    TempFile f("paths = 10000\nsteps = 32\n");
    const RunConfig cfg = parse_config(f.path.string(), {{"paths", "500"}});
    CHECK(cfg.paths == 500);
    CHECK(cfg.steps == 32);
}

TEST_CASE("errors name the offending key") {
    TempFile bad("hurst = 0.7\n");
    CHECK_THROWS_WITH_AS(parse_config(bad.path.string(), {}),
                         doctest::Contains("hurst"), std::invalid_argument);
    TempFile unknown("huurst = 0.3\n");
    CHECK_THROWS_WITH_AS(parse_config(unknown.path.string(), {}),
                         doctest::Contains("huurst"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("", {{"steps", "1"}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("", {{"gamma_p", "0.5"}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("/does/not/exist.cfg", {}), std::invalid_argument);
}

TEST_CASE("gamma pieces spread over the grid cells") {
    RunConfig cfg = parse_config("", {{"gamma", "0.5,-0.25"}, {"steps", "8"}});
    const TimeGrid g(cfg.horizon, cfg.steps);
    const GammaSpec spec = make_gamma(cfg, g);
    REQUIRE(spec.cells.size() == 8);
    CHECK(spec.cells[0] == doctest::Approx(0.5));
    CHECK(spec.cells[3] == doctest::Approx(0.5));
    CHECK(spec.cells[4] == doctest::Approx(-0.25));
    CHECK(spec.cells[7] == doctest::Approx(-0.25));
}

TEST_CASE("catalogs reject unknown ids naming them") {
    CHECK_THROWS_WITH_AS(make_driver("nope"), doctest::Contains("nope"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_terminal("nope", 8), doctest::Contains("nope"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_coefficients("nope"), doctest::Contains("nope"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_drift("nope"), doctest::Contains("nope"),
                         std::invalid_argument);
}

TEST_CASE("config echo covers every key round-trippably") {
    RunConfig cfg = parse_config("", {{"hurst", "0.2"}, {"gamma", "0.1,0.2"}});
    const auto echo = config_echo(cfg);
    RunConfig back;
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& [k, v] : echo)
        if (k != "out") entries.emplace_back(k, v);
    apply_entries(back, entries);
    CHECK(back.hurst == doctest::Approx(cfg.hurst));
    CHECK(back.gamma_pieces.size() == 2);
    CHECK(back.gamma_pieces[1] == doctest::Approx(0.2));
}
