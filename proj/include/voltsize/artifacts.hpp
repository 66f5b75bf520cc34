#pragma once

// JSON persistence of estimation, sizing and simulation artifacts.

#include <filesystem>

#include "voltsize/load.hpp"
#include "voltsize/realtime.hpp"
#include "voltsize/sizing.hpp"

namespace voltsize {

void save_transition_model(const std::filesystem::path& path, const TransitionModel& model);
TransitionModel load_transition_model(const std::filesystem::path& path);

void save_stationary(const std::filesystem::path& path, const StationaryDistribution& stat);
StationaryDistribution load_stationary(const std::filesystem::path& path);

/// Sizes, proxies, per-part control table and the objective decomposition.
void save_sizing(const std::filesystem::path& path, const SizingResult& result, const CostModel& cost);
SizingResult load_sizing(const std::filesystem::path& path);

/// Aggregates of a replay (per-sample data goes to the CSV).
void save_report(const std::filesystem::path& path, const SimulationReport& report, const CostModel& cost);

}  // namespace voltsize
