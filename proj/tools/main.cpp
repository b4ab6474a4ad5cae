#include "freqctl/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

int main(int argc, char** argv) {
    CLI::App app{"Distributed secondary frequency control simulator"};
    app.require_subcommand(1);

    freqctl::RunOptions opts;
    std::string scenario;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--set", opts.overrides, "Override section.key=value")->take_all();
        sub->add_option("--seed", seed, "Seed for delay draws and disturbances");
    };

    auto* run = app.add_subcommand("run", "Simulate a scenario and check its criteria");
    add_common(run);
    run->add_option("--out", opts.out_dir, "Directory for the trajectory CSV and metrics");
    run->add_flag("--diagnostics", opts.diagnostics, "Record storage functionals");

    auto* oracle = app.add_subcommand("oracle", "Print the optimal dispatch as CSV");
    add_common(oracle);

    std::string parameter;
    std::vector<std::string> values;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    auto* sweep = app.add_subcommand("sweep", "Run a scenario over several parameter values");
    add_common(sweep);
    sweep->add_option("--param", parameter, "Override key, or 'seed'")->required();
    sweep->add_option("--values", values, "Values to try")->required();
    sweep->add_option("--threads", threads, "Worker threads");
    sweep->add_flag("--diagnostics", opts.diagnostics, "Record storage functionals");

    auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
    add_common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : freqctl::exit_config;
    }
    for (auto* sub : {run, oracle, sweep, validate})
        if (sub->parsed() && sub->count("--seed")) opts.seed = seed;

    if (run->parsed()) return freqctl::cmd_run(scenario, opts, std::cout, std::cerr);
    if (oracle->parsed()) return freqctl::cmd_oracle(scenario, opts, std::cout, std::cerr);
    if (sweep->parsed()) return freqctl::cmd_sweep(scenario, parameter, values, opts, threads, std::cout, std::cerr);
    return freqctl::cmd_validate(scenario, opts, std::cout, std::cerr);
}
