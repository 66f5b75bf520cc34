#pragma once

// Device sizing: the approximate expected-cost objective, a simulated annealing
// search over (C0, Cs, qf_max) and the outer fixed-point loop on the per-bin
// squared-current proxies.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "voltsize/circuit.hpp"
#include "voltsize/control.hpp"
#include "voltsize/kernels.hpp"
#include "voltsize/load.hpp"

namespace voltsize {

/// Daily cost coefficients. Capital terms are linear in the nominal injection.
struct CostModel {
    double k_p = 0.0;  ///< $/day per pu of average loss
    double k_0 = 0.0;  ///< $/day per pu of fixed-capacitor nominal injection
    double k_s = 0.0;  ///< $/day per pu of switchable-capacitor nominal injection
    double k_f = 0.0;  ///< $/day per pu of D-STATCOM range

    /// Converts $/MWh and $/Mvar prices (1 kW base) amortised over a lifetime into $/day.
    static CostModel from_prices(double energy_per_mwh, double capacitor_per_mvar, double dstatcom_per_mvar,
                                 double lifetime_years);

    double capital(const DeviceSizes& sizes, const CircuitParams& params) const;
};

/// Squared-current proxies, one per stationary part.
struct LossProxyVector {
    std::vector<double> l_tilde;

    std::size_t size() const { return l_tilde.size(); }
    bool operator==(const LossProxyVector&) const = default;
};

/// Result of one approximate-objective evaluation. `finite == false` is the
/// infinite-cost sentinel (some part has no feasible capacitor level).
struct ObjectiveValue {
    bool finite = false;
    double total = 0.0;
    double expected_loss = 0.0;  ///< sum of L~(p_n) rho_n, pu
    double loss_cost = 0.0;      ///< k_p * expected_loss
    double capital_cost = 0.0;
    std::vector<SlowControlResult> per_part;
};

/// Constraint bounds at each stationary part for the given proxies.
std::vector<ConstraintBounds> partition_bounds(const StationaryDistribution& stat, const TransitionModel& model,
                                               double delta, const LossProxyVector& l_tilde,
                                               const CircuitParams& params);

ObjectiveValue approx_objective(const DeviceSizes& sizes, std::span<const ConstraintBounds> bounds,
                                const StationaryDistribution& stat, const CostModel& cost,
                                const CircuitParams& params, Execution exec = Execution::Parallel);

ObjectiveValue approx_objective(const DeviceSizes& sizes, const LossProxyVector& l_tilde,
                                const StationaryDistribution& stat, const TransitionModel& model, double delta,
                                const CostModel& cost, const CircuitParams& params,
                                Execution exec = Execution::Parallel);

using SizeVector = std::array<double, 3>;

struct SAConfig {
    double initial_temperature = 0.0;  ///< <= 0 selects 10x the spread of 20 sampled costs
    double cooling = 0.95;
    int steps_per_temperature = 50;
    SizeVector step{1.0, 1.0, 1.0};
    int max_iterations = 20000;  ///< proposals per restart
    std::uint64_t seed = 1;
    int restarts = 3;
    /// When sizing devices, replace `step` by 5% of the largest required injection.
    bool auto_step = true;

    void validate() const;
};

struct SAResult {
    SizeVector best{};
    double best_cost = 0.0;
    bool found_finite = false;
    std::size_t evaluations = 0;
};

/// Objective returning std::nullopt for infeasible points.
using SizeObjective = std::function<std::optional<double>(const SizeVector&)>;

/// Metropolis annealing over the nonnegative orthant with Gaussian proposals reflected
/// at zero. Returns the best point seen over all restarts; deterministic per seed.
SAResult simulated_annealing(const SizeObjective& objective, const SizeVector& init, const SAConfig& cfg);

struct TerminationConfig {
    double l_tilde_rel = 1e-3;
    double size_rel = 1e-3;
    int max_outer = 20;
};

struct OuterIteration {
    DeviceSizes sizes;
    ObjectiveValue objective;
    double l_change = 0.0;     ///< sup |l^{j+1} - l^j| / sup l^{j+1}
    double size_change = 0.0;  ///< max |s^j - s^{j-1}| / max(|s^j|_inf, 1)
};

/// Per-part control table consumed by the real-time controller.
struct ControlTableRow {
    double p = 0.0;
    double weight = 0.0;
    double l_tilde = 0.0;
    ConstraintBounds bounds;
    SlowControlResult control;
};

struct SizingResult {
    DeviceSizes sizes;
    LossProxyVector l_star;       ///< proxies after the final update
    ObjectiveValue objective;     ///< objective the final annealing run minimised
    std::vector<ControlTableRow> table;
    std::vector<OuterIteration> history;
    bool converged = false;
    double delta = 0.0;
};

struct SizingProblem {
    const StationaryDistribution* stat = nullptr;
    const TransitionModel* model = nullptr;
    double delta = 0.1;
    CostModel cost;
    CircuitParams params;
    int k_levels = 1;
};

/// Heuristic starting point: a fixed capacitor centred on the required injection
/// window with a D-STATCOM wide enough to cover it. Returns std::nullopt if no
/// such point is feasible.
std::optional<SizeVector> feasible_start(const SizingProblem& problem, std::span<const ConstraintBounds> bounds,
                                         Execution exec = Execution::Parallel);

/// Default annealing step sizes: 5% of the largest required injection.
SizeVector default_steps(std::span<const ConstraintBounds> bounds, const CircuitParams& params);

/// Alternates annealing and the proxy update until both changes fall below the
/// thresholds or max_outer is reached. Throws NoFeasibleSizes.
SizingResult optimal_sizing(const SizingProblem& problem, const SAConfig& sa, const TerminationConfig& term,
                            Execution exec = Execution::Parallel);

std::vector<ControlTableRow> build_control_table(const DeviceSizes& sizes, const LossProxyVector& l_star,
                                                 const StationaryDistribution& stat, const TransitionModel& model,
                                                 double delta, const CircuitParams& params);

}  // namespace voltsize
