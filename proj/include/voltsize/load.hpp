#pragma once

// Load traces, stage segmentation and the stage-power Markov model.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace voltsize {

struct LoadTrace {
    std::vector<double> power;  ///< p(tau) for tau = first_tau, first_tau + 1, ...
    std::int64_t first_tau = 0;
    double dt = 5.0;  ///< sampling period in seconds
    double p_lo = 0.0;
    double p_hi = 0.0;
    std::size_t clipped = 0;  ///< samples clamped into [p_lo, p_hi] at ingestion

    std::size_t size() const { return power.size(); }
    bool empty() const { return power.empty(); }
    double mean() const;
    /// Contiguous sub-trace [begin, end) carrying the same bounds.
    LoadTrace slice(std::size_t begin, std::size_t end) const;
};

struct Stage {
    std::size_t index = 0;
    std::size_t tau_start = 0;  ///< offset into the trace
    std::size_t duration = 0;   ///< T_t in samples
    double p_avg = 0.0;
};

struct StageSequence {
    std::vector<Stage> stages;
    std::size_t size() const { return stages.size(); }
};

/// Binned stage-to-stage transition model. Bins are equal-width over [p_lo, p_hi].
struct TransitionModel {
    std::vector<double> bin_edges;    ///< n_bins + 1 increasing edges
    std::vector<double> trans;        ///< row-major n_bins x n_bins, rows sum to 1
    std::vector<std::uint64_t> counts;  ///< raw transition counts, row-major

    std::size_t n_bins() const { return bin_edges.empty() ? 0 : bin_edges.size() - 1; }
    double p_lo() const { return bin_edges.front(); }
    double p_hi() const { return bin_edges.back(); }
    std::size_t bin_of(double p) const;
    std::span<const double> row(std::size_t bin) const { return {trans.data() + bin * n_bins(), n_bins()}; }
    std::span<const double> row_for(double p) const { return row(bin_of(p)); }
};

struct StationaryDistribution {
    std::vector<double> edges;      ///< p_0 < p_1 < ... < p_N
    std::vector<double> weights;    ///< rho_n, n = 1..N
    std::vector<double> midpoints;  ///< representative power of each part

    std::size_t size() const { return weights.size(); }
};

/// Reads `index,power_kw` rows after a one-line header. Out-of-band values are
/// clamped and counted. Throws IoError, ParseError or EmptyTrace.
LoadTrace ingest_trace(const std::filesystem::path& path, double dt, double p_lo, double p_hi);

void write_trace(const std::filesystem::path& path, const LoadTrace& trace);

/// Offline replay of the online stage detector: a sample further than p_th from the
/// running mean of the current stage opens a new stage.
StageSequence segment_stages(const LoadTrace& trace, double p_th);

/// Throws InsufficientData with fewer than two stages.
TransitionModel estimate_transition_model(const StageSequence& stages, double p_lo, double p_hi,
                                          std::size_t n_bins);

/// Lower delta-quantile of the next-stage power given current-stage power p:
/// sup{h : P(p+ <= h | p) <= delta}. Density is piecewise constant within bins.
double quantile_h1(const TransitionModel& model, double p, double delta);

/// Upper delta-quantile: inf{h : P(p+ >= h | p) <= delta}.
double quantile_h2(const TransitionModel& model, double p, double delta);

/// Quantiles of an explicit binned distribution (used by the model-level versions).
double lower_quantile(std::span<const double> edges, std::span<const double> mass, double delta);
double upper_quantile(std::span<const double> edges, std::span<const double> mass, double delta);

/// Fraction of samples in each of n_parts equal-width parts of [p_lo, p_hi].
StationaryDistribution estimate_stationary(const LoadTrace& trace, std::size_t n_parts);

struct SyntheticConfig {
    double p_lo = 2150.0;
    double p_hi = 3650.0;
    std::size_t n_samples = 100000;
    double dt = 5.0;
    double mean_stage_duration = 720.0;  ///< samples
    double noise = 60.0;                 ///< half-width of uniform intra-stage noise
    std::vector<double> state_power;     ///< stage power of each chain state
    std::vector<double> state_trans;     ///< row-major chain transition matrix
    std::size_t initial_state = 0;

    /// Four-level chain spanning the default load band.
    static SyntheticConfig hpc_default();
};

struct GeneratedTrace {
    LoadTrace trace;
    std::vector<std::size_t> stage_starts;  ///< offsets where a generated stage begins
};

/// Deterministic for a fixed seed. Throws ConfigError on inconsistent settings.
GeneratedTrace generate_synthetic_trace(const SyntheticConfig& cfg, std::uint64_t seed);

}  // namespace voltsize
