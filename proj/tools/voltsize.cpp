// Command-line driver: synth, estimate, size, simulate and sweep.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "voltsize/config.hpp"
#include "voltsize/errors.hpp"
#include "voltsize/pipeline.hpp"

namespace {

struct CommonOptions {
    std::string config;
    std::vector<double> deltas;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "run configuration file")->required();
    cmd->add_option("--delta", opts.deltas, "chance-constraint level(s), comma separated")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--out", opts.out, "output directory");
}

voltsize::RunConfig resolve(const CommonOptions& opts) {
    auto cfg = voltsize::load_config(opts.config);
    if (!opts.deltas.empty()) cfg.deltas = opts.deltas;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.out = *opts.out;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reactive-power device sizing and two-timescale voltage control"};
    app.require_subcommand(1);

    CommonOptions synth_opts, estimate_opts, size_opts, simulate_opts, sweep_opts;
    auto* synth = app.add_subcommand("synth", "generate a synthetic load trace at the configured trace path");
    add_common(synth, synth_opts);
    auto* estimate = app.add_subcommand("estimate", "estimate the transition model and stationary distribution");
    add_common(estimate, estimate_opts);
    auto* size = app.add_subcommand("size", "size the devices for each delta");
    add_common(size, size_opts);
    auto* simulate = app.add_subcommand("simulate", "replay the test trace under control or a benchmark");
    add_common(simulate, simulate_opts);
    std::string benchmark;
    simulate->add_option("--benchmark", benchmark, "uncontrolled benchmark instead of the controller")
        ->check(CLI::IsMember({"fixed", "dstatcom"}));
    auto* sweep = app.add_subcommand("sweep", "size and replay every delta and write a summary table");
    add_common(sweep, sweep_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            voltsize::cmd_synth(resolve(synth_opts), std::cout);
        } else if (estimate->parsed()) {
            voltsize::cmd_estimate(resolve(estimate_opts), std::cout);
        } else if (size->parsed()) {
            voltsize::cmd_size(resolve(size_opts), std::cout);
        } else if (simulate->parsed()) {
            auto mode = voltsize::SimulateMode::Controlled;
            if (benchmark == "fixed") mode = voltsize::SimulateMode::BenchmarkFixed;
            if (benchmark == "dstatcom") mode = voltsize::SimulateMode::BenchmarkDstatcom;
            voltsize::cmd_simulate(resolve(simulate_opts), mode, std::cout);
        } else if (sweep->parsed()) {
            const auto result = voltsize::cmd_sweep(resolve(sweep_opts), std::cout);
            for (const auto& row : result.rows) {
                if (!row.ok) return 3;
            }
        }
    } catch (const voltsize::Error& e) {
        std::cerr << "error[" << voltsize::to_string(e.kind()) << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
