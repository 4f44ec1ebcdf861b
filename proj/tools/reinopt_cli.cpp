// Command-line driver: scenario validation, sensitivity sweeps, dynamic
// strategy paths, g-lattice export, the dominance tournament and the
// variance-identity checks.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "reinopt/runner.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t reps = 0;
    bool reps_set = false;
    int threads = 0;
    bool serial = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "scenario JSON file")->required();
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--seed", args.seed, "override the scenario seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--reps", args.reps, "override the replication count")
        ->each([&args](const std::string&) { args.reps_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads (0 = all)");
    cmd->add_flag("--serial", args.serial, "run the serial reference kernels");
}

reinopt::RunOptions make_options(const CommonArgs& args) {
    reinopt::RunOptions options;
    options.out_dir = args.out;
    if (args.seed_set) options.seed = args.seed;
    if (args.reps_set) options.reps = args.reps;
    options.policy.exec = args.serial ? reinopt::Exec::Serial : reinopt::Exec::OpenMP;
    options.policy.threads = args.threads;
    return options;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal proportional reinsurance and investment under a stochastic-factor "
                 "claims model"};
    app.require_subcommand(1);

    CommonArgs validate_args, sweep_args, dynamic_args, lattice_args, dominance_args,
        variance_args;
    std::size_t dynamic_paths = 1;
    bool dump_paths = false;

    add_common(app.add_subcommand("validate", "run the hypothesis validators"), validate_args);
    add_common(app.add_subcommand("sweep", "parameter sweep of the optimal strategies"),
               sweep_args);
    auto* dynamic_cmd =
        app.add_subcommand("dynamic", "per-timestep strategies along simulated factor paths");
    add_common(dynamic_cmd, dynamic_args);
    dynamic_cmd->add_option("--paths", dynamic_paths, "number of sample paths");
    dynamic_cmd->add_flag("--dump-paths", dump_paths, "also write raw path and event CSVs");
    add_common(app.add_subcommand("g-lattice", "export the investment correction lattice"),
               lattice_args);
    add_common(app.add_subcommand("dominance", "utility tournament against perturbed strategies"),
               dominance_args);
    add_common(app.add_subcommand("variance-check", "variance decomposition and premium checks"),
               variance_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("validate")) {
            reinopt::run_validate(reinopt::ScenarioConfig::from_json_file(validate_args.config),
                                  make_options(validate_args));
        } else if (app.got_subcommand("sweep")) {
            reinopt::run_sweep(reinopt::ScenarioConfig::from_json_file(sweep_args.config),
                               make_options(sweep_args));
        } else if (app.got_subcommand("dynamic")) {
            auto options = make_options(dynamic_args);
            options.dynamic_paths = dynamic_paths;
            options.dump_paths = dump_paths;
            reinopt::run_dynamic(reinopt::ScenarioConfig::from_json_file(dynamic_args.config),
                                 options);
        } else if (app.got_subcommand("g-lattice")) {
            reinopt::run_g_lattice(reinopt::ScenarioConfig::from_json_file(lattice_args.config),
                                   make_options(lattice_args));
        } else if (app.got_subcommand("dominance")) {
            reinopt::run_dominance(reinopt::ScenarioConfig::from_json_file(dominance_args.config),
                                   make_options(dominance_args));
        } else if (app.got_subcommand("variance-check")) {
            reinopt::run_variance_check(
                reinopt::ScenarioConfig::from_json_file(variance_args.config),
                make_options(variance_args));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
