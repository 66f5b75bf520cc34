#include "voltsize/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "voltsize/errors.hpp"

namespace voltsize {

namespace {

constexpr double kDaysPerYear = 365.0;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

DeviceSizes to_sizes(const SizeVector& v, int k_levels) { return {v[0], v[1], k_levels, v[2]}; }

double max_abs(const SizeVector& v) { return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])}); }

}  // namespace

CostModel CostModel::from_prices(double energy_per_mwh, double capacitor_per_mvar, double dstatcom_per_mvar,
                                 double lifetime_years) {
    if (!(lifetime_years > 0.0)) throw ConfigError("device lifetime must be positive");
    CostModel c;
    // 1 pu = 1 kW: $/MWh -> $/kWh, times 24 h for a day of average loss.
    c.k_p = energy_per_mwh / 1000.0 * 24.0;
    const double days = lifetime_years * kDaysPerYear;
    c.k_0 = capacitor_per_mvar / 1000.0 / days;
    c.k_s = c.k_0;
    c.k_f = dstatcom_per_mvar / 1000.0 / days;
    return c;
}

double CostModel::capital(const DeviceSizes& sizes, const CircuitParams& params) const {
    const double nominal = params.v0_sq() * params.f0;
    return k_0 * nominal * sizes.c0 + k_s * nominal * sizes.cs_max + k_f * sizes.qf_max;
}

std::vector<ConstraintBounds> partition_bounds(const StationaryDistribution& stat, const TransitionModel& model,
                                               double delta, const LossProxyVector& l_tilde,
                                               const CircuitParams& params) {
    if (l_tilde.size() != stat.size()) throw std::invalid_argument("proxy vector length must match the partition");
    std::vector<ConstraintBounds> out(stat.size());
    for (std::size_t n = 0; n < stat.size(); ++n) {
        out[n] = constraint_bounds(stat.midpoints[n], model, delta, l_tilde.l_tilde[n], params);
    }
    return out;
}

ObjectiveValue approx_objective(const DeviceSizes& sizes, std::span<const ConstraintBounds> bounds,
                                const StationaryDistribution& stat, const CostModel& cost,
                                const CircuitParams& params, Execution exec) {
    if (bounds.size() != stat.size()) throw std::invalid_argument("bounds length must match the partition");
    ObjectiveValue val;
    if (!sizes.nonnegative() || !is_stable(params, sizes.c0 + sizes.cs_max)) return val;

    val.per_part.resize(stat.size());
    slow_control_batch(stat.midpoints, sizes, bounds, params, val.per_part, exec);
    for (const auto& res : val.per_part) {
        if (!res.feasible) return val;
    }
    for (std::size_t n = 0; n < stat.size(); ++n) val.expected_loss += val.per_part[n].loss_tilde * stat.weights[n];
    val.loss_cost = cost.k_p * val.expected_loss;
    val.capital_cost = cost.capital(sizes, params);
    val.total = val.loss_cost + val.capital_cost;
    val.finite = true;
    return val;
}

ObjectiveValue approx_objective(const DeviceSizes& sizes, const LossProxyVector& l_tilde,
                                const StationaryDistribution& stat, const TransitionModel& model, double delta,
                                const CostModel& cost, const CircuitParams& params, Execution exec) {
    const auto bounds = partition_bounds(stat, model, delta, l_tilde, params);
    return approx_objective(sizes, bounds, stat, cost, params, exec);
}

void SAConfig::validate() const {
    if (!(cooling > 0.0 && cooling < 1.0)) throw ConfigError("annealing cooling factor must lie in (0, 1)");
    if (steps_per_temperature < 1) throw ConfigError("annealing needs at least one step per temperature");
    for (double s : step) {
        if (!(s > 0.0)) throw ConfigError("annealing step sizes must be positive");
    }
    if (max_iterations < 1) throw ConfigError("annealing iteration cap must be positive");
    if (restarts < 1) throw ConfigError("annealing needs at least one restart");
}

SAResult simulated_annealing(const SizeObjective& objective, const SizeVector& init, const SAConfig& cfg) {
    cfg.validate();
    for (double v : init) {
        if (!(v >= 0.0)) throw std::invalid_argument("annealing start must lie in the nonnegative orthant");
    }

    SAResult result;
    auto evaluate = [&](const SizeVector& x) {
        ++result.evaluations;
        return objective(x);
    };
    auto consider = [&](const SizeVector& x, double fx) {
        if (!result.found_finite || fx < result.best_cost) {
            result.found_finite = true;
            result.best = x;
            result.best_cost = fx;
        }
    };

    const auto f_init = evaluate(init);
    if (f_init) consider(init, *f_init);
    if (!f_init) result.best = init;

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        std::mt19937_64 rng(splitmix(cfg.seed ^ splitmix(static_cast<std::uint64_t>(restart) + 1)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        SizeVector step = cfg.step;
        auto propose = [&](const SizeVector& x) {
            SizeVector y;
            for (std::size_t d = 0; d < 3; ++d) y[d] = std::abs(x[d] + step[d] * gauss(rng));
            return y;
        };

        SizeVector x = init;
        std::optional<double> fx = f_init;

        double temperature = cfg.initial_temperature;
        if (!(temperature > 0.0)) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            if (fx) lo = hi = *fx;
            for (int k = 0; k < 20; ++k) {
                const auto y = propose(init);
                const auto fy = evaluate(y);
                if (!fy) continue;
                consider(y, *fy);
                lo = std::min(lo, *fy);
                hi = std::max(hi, *fy);
            }
            const double spread = std::isfinite(lo) ? hi - lo : 0.0;
            const double scale = std::isfinite(lo) ? std::abs(lo) : 1.0;
            temperature = spread > 0.0 ? 10.0 * spread : std::max(1e-3 * scale, 1e-9);
        }

        const SizeVector floor_step{cfg.step[0] * 1e-9, cfg.step[1] * 1e-9, cfg.step[2] * 1e-9};
        int used = 0;
        while (used < cfg.max_iterations) {
            int accepted = 0;
            int tried = 0;
            for (int s = 0; s < cfg.steps_per_temperature && used < cfg.max_iterations; ++s, ++used) {
                const auto y = propose(x);
                const auto fy = evaluate(y);
                ++tried;
                if (!fy) continue;
                bool accept = !fx || *fy <= *fx;
                if (!accept) accept = unit(rng) < std::exp(-(*fy - *fx) / temperature);
                if (accept) {
                    x = y;
                    fx = fy;
                    ++accepted;
                    consider(x, *fx);
                }
            }
            const double ratio = tried > 0 ? static_cast<double>(accepted) / tried : 0.0;
            for (std::size_t d = 0; d < 3; ++d) {
                if (ratio > 0.5) step[d] = std::min(step[d] * 1.2, cfg.step[d] * 10.0);
                if (ratio < 0.2) step[d] = std::max(step[d] * 0.6, floor_step[d]);
            }
            temperature *= cfg.cooling;
        }
    }
    return result;
}

SizeVector default_steps(std::span<const ConstraintBounds> bounds, const CircuitParams& params) {
    double scale = 1.0;
    for (const auto& b : bounds) scale = std::max({scale, std::abs(b.upper()), std::abs(b.lower())});
    const double s = 0.05 * scale / (params.f0 * params.v0_sq());
    return {s, s, s};
}

std::optional<SizeVector> feasible_start(const SizingProblem& problem, std::span<const ConstraintBounds> bounds,
                                         Execution exec) {
    const auto& params = problem.params;
    double upper = std::numeric_limits<double>::infinity();
    double lower = -upper;
    for (const auto& b : bounds) {
        upper = std::min(upper, b.upper());
        lower = std::max(lower, b.lower());
    }
    const double nominal = params.f0 * params.v0_sq();
    const double centre = std::max(0.0, 0.5 * (upper + lower) / nominal);
    double half = std::max(1.0, 0.5 * (lower - upper) + params.epsilon * nominal * centre + 1.0);
    for (int attempt = 0; attempt < 40; ++attempt, half *= 1.5) {
        const SizeVector start{centre, 0.0, half};
        const auto val = approx_objective(to_sizes(start, problem.k_levels), bounds, *problem.stat, problem.cost,
                                          params, exec);
        if (val.finite) return start;
    }
    return std::nullopt;
}

std::vector<ControlTableRow> build_control_table(const DeviceSizes& sizes, const LossProxyVector& l_star,
                                                 const StationaryDistribution& stat, const TransitionModel& model,
                                                 double delta, const CircuitParams& params) {
    const auto bounds = partition_bounds(stat, model, delta, l_star, params);
    std::vector<ControlTableRow> table(stat.size());
    for (std::size_t n = 0; n < stat.size(); ++n) {
        table[n].p = stat.midpoints[n];
        table[n].weight = stat.weights[n];
        table[n].l_tilde = l_star.l_tilde[n];
        table[n].bounds = bounds[n];
        table[n].control = slow_control(stat.midpoints[n], sizes, bounds[n], params);
    }
    return table;
}

SizingResult optimal_sizing(const SizingProblem& problem, const SAConfig& sa, const TerminationConfig& term,
                            Execution exec) {
    if (!problem.stat || !problem.model) throw std::invalid_argument("sizing needs estimation artifacts");
    if (term.max_outer < 1) throw ConfigError("outer iteration cap must be positive");
    const auto& stat = *problem.stat;
    const auto& params = problem.params;

    SizingResult result;
    result.delta = problem.delta;
    LossProxyVector l_tilde{std::vector<double>(stat.size(), 0.0)};
    std::optional<SizeVector> previous;

    for (int j = 0; j < term.max_outer; ++j) {
        const auto bounds = partition_bounds(stat, *problem.model, problem.delta, l_tilde, params);
        auto objective = [&](const SizeVector& v) -> std::optional<double> {
            const auto val = approx_objective(to_sizes(v, problem.k_levels), bounds, stat, problem.cost, params, exec);
            if (!val.finite) return std::nullopt;
            return val.total;
        };

        std::optional<SizeVector> start;
        if (previous && objective(*previous)) start = previous;
        if (!start) start = feasible_start(problem, bounds, exec);
        if (!start) {
            throw NoFeasibleSizes("no feasible device sizes found (delta=" + std::to_string(problem.delta) +
                                  ", epsilon=" + std::to_string(params.epsilon) + ")");
        }

        SAConfig cfg = sa;
        if (cfg.auto_step) cfg.step = default_steps(bounds, params);
        const auto annealed = simulated_annealing(objective, *start, cfg);
        if (!annealed.found_finite) {
            throw NoFeasibleSizes("annealing found no finite-cost sizes (delta=" + std::to_string(problem.delta) +
                                  ", epsilon=" + std::to_string(params.epsilon) + ")");
        }

        OuterIteration it;
        it.sizes = to_sizes(annealed.best, problem.k_levels);
        it.objective = approx_objective(it.sizes, bounds, stat, problem.cost, params, exec);

        LossProxyVector next{std::vector<double>(stat.size(), 0.0)};
        double l_diff = 0.0;
        double l_scale = 0.0;
        for (std::size_t n = 0; n < stat.size(); ++n) {
            next.l_tilde[n] = it.objective.per_part[n].loss_tilde / params.r;
            l_diff = std::max(l_diff, std::abs(next.l_tilde[n] - l_tilde.l_tilde[n]));
            l_scale = std::max(l_scale, std::abs(next.l_tilde[n]));
        }
        it.l_change = l_scale > 0.0 ? l_diff / l_scale : l_diff;
        if (previous) {
            double diff = 0.0;
            for (std::size_t d = 0; d < 3; ++d) diff = std::max(diff, std::abs(annealed.best[d] - (*previous)[d]));
            it.size_change = diff / std::max(max_abs(annealed.best), 1.0);
        } else {
            it.size_change = std::numeric_limits<double>::infinity();
        }

        result.history.push_back(it);
        result.sizes = it.sizes;
        result.objective = it.objective;
        previous = annealed.best;
        l_tilde = std::move(next);

        if (it.l_change <= term.l_tilde_rel && it.size_change <= term.size_rel) {
            result.converged = true;
            break;
        }
    }

    result.l_star = l_tilde;
    result.table = build_control_table(result.sizes, result.l_star, stat, *problem.model, problem.delta, params);
    return result;
}

}  // namespace voltsize
