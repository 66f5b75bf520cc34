#pragma once

// Command implementations behind the CLI: synth -> estimate -> size -> simulate,
// and sweep (size + simulate for every delta).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "voltsize/config.hpp"
#include "voltsize/load.hpp"
#include "voltsize/realtime.hpp"
#include "voltsize/sizing.hpp"

namespace voltsize {

/// Artifact locations inside the output directory.
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path model() const { return root / "model.json"; }
    std::filesystem::path stationary() const { return root / "stationary.json"; }
    std::filesystem::path sizing(double delta) const;
    std::filesystem::path simulation_dir(double delta) const;
    std::filesystem::path benchmark_dir(const std::string& name) const { return root / ("benchmark_" + name); }
    std::filesystem::path sweep_summary() const { return root / "sweep_summary.csv"; }
    std::filesystem::path sweep_benchmarks() const { return root / "sweep_benchmarks.csv"; }
};

/// Short decimal label for file names ("0.1", "1").
std::string delta_label(double delta);

/// Seed for the i-th entry of a delta list, derived from the master seed.
std::uint64_t derived_seed(std::uint64_t master, std::size_t index);

/// Creates the directory if needed; throws IoError naming it if it is not writable.
void ensure_writable_dir(const std::filesystem::path& dir);

struct TraceSplit {
    LoadTrace train;
    LoadTrace test;
};

/// Leading train_fraction of the trace for estimation, the rest for replay
/// (the whole trace is replayed when train_fraction == 1).
TraceSplit split_trace(const LoadTrace& trace, double train_fraction);

GeneratedTrace cmd_synth(const RunConfig& cfg, std::ostream& log);

struct EstimateResult {
    StageSequence stages;
    TransitionModel model;
    StationaryDistribution stat;
};

EstimateResult cmd_estimate(const RunConfig& cfg, std::ostream& log);

std::vector<SizingResult> cmd_size(const RunConfig& cfg, std::ostream& log);

enum class SimulateMode { Controlled, BenchmarkFixed, BenchmarkDstatcom };

SimulationReport cmd_simulate(const RunConfig& cfg, SimulateMode mode, std::ostream& log);

struct SweepRow {
    double delta = 0.0;
    bool ok = false;
    std::string error;
    DeviceSizes sizes;
    double objective = 0.0;
    int outer_iterations = 0;
    bool converged = false;
    double last_l_change = 0.0;
    double violation_fraction = 0.0;
    double loss_cost = 0.0;
    double capital_cost = 0.0;
    double total_cost = 0.0;
    std::size_t switch_count = 0;
    bool chance_rows_dropped = false;  ///< every slow solve in the sizing table ran without h1/h2
};

struct SweepResult {
    std::vector<SweepRow> rows;
    SimulationReport benchmark_fixed;
    SimulationReport benchmark_dstatcom;
};

/// Sizes and replays every delta (entries may run concurrently) and writes one
/// summary row per delta. Per-delta failures are recorded in-row.
SweepResult cmd_sweep(const RunConfig& cfg, std::ostream& log);

void write_sweep_summary(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace voltsize
