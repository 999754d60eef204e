#include <iostream>

#include <CLI11.hpp>

#include "volley/cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace volley::cli;
    configure_logging();

    CLI::App app{"volley: volunteer computing scheduling simulator"};
    app.require_subcommand(1);

    RunOptions run;
    std::uint64_t seed = 0;
    std::string trace;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write metrics");
    run_cmd->add_option("config", run.config_path, "Scenario file (JSON)")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
    auto* trace_opt = run_cmd->add_option("--trace", trace, "Write the event trace here");
    run_cmd->add_option("--out", run.out_dir, "Directory for metrics.txt and report.json");
    run_cmd->add_option("--set", run.overrides, "Override a config key: key=value")->take_all();

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench-dispatch", "Measure the dispatch rate");
    bench_cmd->add_option("--hosts", bench.hosts, "Requesting hosts");
    bench_cmd->add_option("--jobs", bench.jobs, "Jobs in the backlog");
    bench_cmd->add_option("--secs", bench.seconds, "Wall-clock budget in seconds");
    bench_cmd->add_option("--seed", bench.seed, "Random seed");

    std::string report_a;
    std::string report_b;
    auto* compare_cmd = app.add_subcommand("compare", "Diff the metrics of two run reports");
    compare_cmd->add_option("a", report_a, "First report.json")->required();
    compare_cmd->add_option("b", report_b, "Second report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), kExitValidation);
    }

    if (*run_cmd) {
        if (*seed_opt) run.seed = seed;
        if (*trace_opt) run.trace_path = trace;
        return cmd_run(run, std::cout, std::cerr);
    }
    if (*bench_cmd) return cmd_bench_dispatch(bench, std::cout, std::cerr);
    return cmd_compare(report_a, report_b, std::cout, std::cerr);
}
