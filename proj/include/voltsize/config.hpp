#pragma once

// Run configuration: a flat `key = value` text file ('#' starts a comment).
// Every key is optional; unspecified keys keep the defaults below.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voltsize/circuit.hpp"
#include "voltsize/load.hpp"
#include "voltsize/realtime.hpp"
#include "voltsize/sizing.hpp"

namespace voltsize {

struct Prices {
    double energy_per_mwh = 50.0;
    double capacitor_per_mvar = 1000.0;
    double dstatcom_per_mvar = 100000.0;
    double lifetime_years = 30.0;
};

struct RunConfig {
    CircuitParams circuit;
    int k_levels = 1;
    Prices prices;

    double p_lo = 2150.0;
    double p_hi = 3650.0;
    double dt = 5.0;
    std::filesystem::path trace = "trace.csv";
    double train_fraction = 0.75;  ///< leading share of the trace used for estimation

    double p_th = 200.0;
    std::size_t transition_bins = 15;
    std::size_t stationary_parts = 50;

    SyntheticConfig synth = SyntheticConfig::hpc_default();

    SAConfig sa;
    TerminationConfig termination;

    std::size_t delay = 2;
    double p_est = 100.0;
    std::vector<double> deltas{0.1};

    std::filesystem::path out = "out";
    std::uint64_t seed = 1;
    /// Fixed-capacitor benchmark size; unset sizes it for no undervoltage on the replayed trace.
    std::optional<double> benchmark_c0;

    CostModel cost() const;
    RealtimeConfig realtime(double delta) const;
    void validate() const;
};

/// Parses `key = value` lines. Relative paths resolve against `base_dir`.
/// Throws ConfigError naming the line for unknown keys or bad values.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Throws IoError if the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// The delta sweep used for the trend studies: 0.1, 0.2, ..., 0.9, 1.0.
std::vector<double> default_delta_sweep();

}  // namespace voltsize
