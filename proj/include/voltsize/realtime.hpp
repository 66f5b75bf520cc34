#pragma once

// Trace replay of the online two-timescale controller and the two uncontrolled
// benchmarks, with violation and daily cost accounting.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voltsize/circuit.hpp"
#include "voltsize/kernels.hpp"
#include "voltsize/load.hpp"
#include "voltsize/sizing.hpp"

namespace voltsize {

struct RealtimeConfig {
    std::size_t delay = 2;  ///< capacitor switching delay d, samples
    double p_th = 200.0;    ///< new-stage threshold
    double p_est = 100.0;   ///< re-solve threshold on the running stage mean
    double delta = 0.1;

    void validate() const;
};

struct SampleRecord {
    std::int64_t tau = 0;
    double p = 0.0;
    double cs = 0.0;
    double qf = 0.0;
    double v = 0.0;
    double i = 0.0;
    double loss = 0.0;
    bool feasible = true;  ///< |v^2 - v0^2| <= eps at this sample
    std::size_t stage = 0;
};

/// One slow-control solve during replay.
struct ScheduleEvent {
    std::size_t tau = 0;         ///< sample at which the solve ran
    std::size_t applies_at = 0;  ///< tau + d
    double p_input = 0.0;
    bool new_stage = false;
    bool feasible = false;
    double cs = 0.0;  ///< level scheduled for applies_at (previous level if infeasible)
};

struct SimulationReport {
    std::string tag;
    DeviceSizes sizes;
    double delta = 0.0;
    std::vector<SampleRecord> samples;
    std::vector<ScheduleEvent> schedule;

    double violation_fraction = 0.0;
    double undervoltage_fraction = 0.0;
    double overvoltage_fraction = 0.0;
    double total_loss = 0.0;  ///< sum of per-sample losses, pu * samples
    double average_loss = 0.0;
    double loss_cost = 0.0;     ///< $/day
    double capital_cost = 0.0;  ///< $/day
    double total_cost = 0.0;    ///< $/day
    std::size_t stage_count = 0;
    std::size_t switch_count = 0;
    std::size_t slow_infeasible = 0;  ///< slow solves that kept the previous level
};

/// Bounds at an arbitrary stage power, linearly interpolated from the neighbouring
/// table rows (clamped at the ends); the deterministic rows use the interpolated proxy.
ConstraintBounds interpolate_bounds(const std::vector<ControlTableRow>& table, double p, const CircuitParams& params);

/// Online replay. Throws NoConvergence from the power flow.
SimulationReport run_realtime(const LoadTrace& trace, const DeviceSizes& sizes,
                              const std::vector<ControlTableRow>& table, const RealtimeConfig& rt,
                              const CostModel& cost, const CircuitParams& params,
                              Execution exec = Execution::Parallel);

SimulationReport run_realtime(const LoadTrace& trace, const DeviceSizes& sizes, const TransitionModel& model,
                              const StationaryDistribution& stat, const LossProxyVector& l_star,
                              const RealtimeConfig& rt, const CostModel& cost, const CircuitParams& params,
                              Execution exec = Execution::Parallel);

/// Fixed capacitor only; no control actions.
SimulationReport run_benchmark_fixed_only(const LoadTrace& trace, double c0_fixed, const CircuitParams& params,
                                          const CostModel& cost, Execution exec = Execution::Parallel);

/// D-STATCOM only, with the smallest range that keeps the fast problem feasible at p_hi.
SimulationReport run_benchmark_dstatcom_only(const LoadTrace& trace, const CircuitParams& params,
                                             const CostModel& cost, Execution exec = Execution::Parallel);

/// Smallest fixed capacitance with v^2 >= v0^2 - eps at load p (no other devices).
double fixed_capacitor_for_band(double p, const CircuitParams& params);

/// Smallest D-STATCOM range with v^2 >= v0^2 - eps at load p (no capacitors).
double min_dstatcom_range(double p, const CircuitParams& params);

void write_samples_csv(const std::filesystem::path& path, const SimulationReport& report);

}  // namespace voltsize
