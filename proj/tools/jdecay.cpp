// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>

#include "jdecay/cli.hpp"

namespace cli = jdecay::cli;

int main(int argc, char** argv) {
    CLI::App app{"Resolvent decay experiments for Jacobi operators"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    auto* run = app.add_subcommand("run", "run an experiment and write its outputs");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out-dir", out_dir, "output directory");
    auto* check = app.add_subcommand("validate", "parse and validate a config");
    check->add_option("--config", config_path, "experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    cli::ExperimentConfig config;
    try {
        config = cli::load_config(config_path);
    } catch (const jdecay::Error& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 1;
    }
    if (check->parsed()) {
        std::cout << "ok: " << cli::to_string(config.experiment) << '\n';
        return 0;
    }

    try {
        const auto res = cli::run_experiment(config, out_dir);
        for (const auto& f : res.files)
            std::cout << f << '\n';
        if (res.exit_code == 3)
            std::cerr << "verification FAIL (see manifest.json)\n";
        return res.exit_code;
    } catch (const jdecay::Error& e) {
        std::cerr << e.what() << '\n';
        return cli::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
