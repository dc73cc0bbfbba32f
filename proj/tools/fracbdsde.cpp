#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fracbdsde/checks.hpp"
#include "fracbdsde/config.hpp"

namespace {

struct SubArgs {
    std::string config_file;
    std::string out;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common(CLI::App* sub, SubArgs& args) {
    sub->add_option("--config", args.config_file, "key=value configuration file");
    sub->add_option("--out", args.out, "output directory")->required();
    for (const char* key :
         {"hurst", "horizon", "steps", "paths", "seed", "gamma", "gamma_p", "driver",
          "terminal", "coeff", "degree", "blocks", "inner_paths", "x_max", "lattice", "c_hp"}) {
        const std::string k = key;
        sub->add_option_function<std::string>(
            "--" + k, [&args, k](const std::string& v) { args.overrides.emplace_back(k, v); },
            "override config key '" + k + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracbdsde: reproducible experiment runner"};
    app.require_subcommand(1);

    const std::vector<std::string> names = {"fbm", "girsanov", "duality", "sde",
                                            "bdsde", "spde", "all"};
    std::vector<SubArgs> args(names.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < names.size(); ++i) {
        CLI::App* sub = app.add_subcommand(names[i]);
        add_common(sub, args[i]);
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            fracbdsde::RunConfig cfg =
                fracbdsde::parse_config(args[i].config_file, args[i].overrides);
            cfg.out = args[i].out;
            return fracbdsde::run_subcommand(names[i], cfg);
        } catch (const std::exception& e) {
            std::cerr << "fracbdsde " << names[i] << ": " << e.what() << "\n";
            return 2;
        }
    }
    return 2;
}
