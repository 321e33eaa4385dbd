#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace genopt::cli;

    CLI::App app{"genopt: generalized-Newton learning rates on synthetic benchmarks"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::string config, out_dir;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "Experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides the config)");
        sub->add_option("--jobs", opts.jobs, "Parallel experiments")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Override every experiment's seed");
    };
    auto* run = app.add_subcommand("run", "Run every experiment and write trajectory CSVs");
    auto* grid = app.add_subcommand("grid-search", "Grid-search the constant learning rate of baselines");
    auto* compare = app.add_subcommand("compare", "Run base/GeN pairs and write an aligned loss table");
    for (auto* sub : {run, grid, compare}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[E_USAGE]: " << e.what() << '\n';
        return kExitConfig;
    }

    opts.config_path = config;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    for (auto* sub : {run, grid, compare}) {
        if (sub->count("--seed")) opts.seed_override = seed;
    }

    if (*run) return cmd_run(opts, std::cout, std::cerr);
    if (*grid) return cmd_grid_search(opts, std::cout, std::cerr);
    return cmd_compare(opts, std::cout, std::cerr);
}
