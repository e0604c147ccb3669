// Command-line front end: `datamarket-sim run --scenario <path> --seed <u64> ...`
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "datamarket/harness/report.hpp"
#include "datamarket/harness/scenario.hpp"
#include "datamarket/harness/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;

struct RunOptions {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> until;
    std::string metrics_out;
    std::string chain_out;
    bool trace = false;
    std::string log_level = "warn";
};

int run(const RunOptions& opt) {
    using namespace datamarket::harness;
    Scenario scenario;
    try {
        scenario = load_scenario_file(opt.scenario);
    } catch (const std::exception& e) {
        std::cerr << opt.scenario << ": " << e.what() << '\n';
        return kExitUsage;
    }

    Simulation sim(std::move(scenario), opt.seed);
    if (opt.trace) sim.set_trace_sink([](const std::string& line) { std::cout << line << '\n'; });
    if (opt.trace) std::cout << kTraceHeader << '\n';

    RunReport report;
    try {
        report = sim.run(opt.until);
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation at " << e.what() << '\n';
        return kExitInvariant;
    }

    try {
        if (!opt.metrics_out.empty()) emit_metrics(report, opt.metrics_out);
        if (!opt.chain_out.empty()) write_chain(report, opt.chain_out);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }
    if (!opt.trace) std::cout << report.summary_table();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized IoT data marketplace simulator"};
    app.require_subcommand(1);

    RunOptions opt;
    auto* cmd = app.add_subcommand("run", "Run a scenario and write its metrics");
    cmd->add_option("--scenario", opt.scenario, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "Seed; overrides the scenario's own seed");
    cmd->add_option("--until", opt.until, "Stop after this tick (inclusive)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--metrics-out", opt.metrics_out, "Directory for the metrics tables");
    cmd->add_option("--chain-out", opt.chain_out, "Chain export path (a .jsonl block log is written beside it)");
    cmd->add_flag("--trace", opt.trace, "Print the trading trace to stdout as it happens");
    cmd->add_option("--log-level", opt.log_level, "trace, debug, info, warn, error, critical or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    spdlog::set_default_logger(spdlog::stderr_color_mt("datamarket"));
    spdlog::set_level(spdlog::level::from_str(opt.log_level));
    return run(opt);
}
