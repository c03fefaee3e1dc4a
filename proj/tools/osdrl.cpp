#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "osdrl/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Tabular one-step distributional RL experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::uint64_t steps = 0;
    std::string out;
    for (const char* name : {"instability", "histograms", "frozenlake", "verify"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "base seed (overrides the config)");
        sub->add_option("--steps", steps, "iterations or learning steps (overrides the config)");
        sub->add_option("--out", out, "output directory (overrides the config)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? osdrl::kExitOk : osdrl::kExitConfig;
    }

    const auto* sub = app.get_subcommands().front();
    nlohmann::json config;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        try {
            config = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
            return osdrl::kExitConfig;
        }
    }
    osdrl::Overrides overrides;
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--steps")) overrides.steps = steps;
    if (sub->count("--out")) overrides.out = out;

    try {
        return osdrl::run_experiment(sub->get_name(), config, overrides, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return osdrl::kExitFailure;
    }
}
