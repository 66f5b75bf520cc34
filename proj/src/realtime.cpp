#include "voltsize/realtime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <tuple>

#include "voltsize/control.hpp"
#include "voltsize/errors.hpp"

namespace voltsize {

namespace {

double lerp(double a, double b, double w) { return (1.0 - w) * a + w * b; }

// Fills violation, loss and cost aggregates from the per-sample records.
void summarise(SimulationReport& report, const CostModel& cost, const CircuitParams& params) {
    const auto n = report.samples.size();
    std::size_t under = 0;
    std::size_t over = 0;
    report.total_loss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = report.samples[k];
        const double v_sq = s.v * s.v;
        if (!s.feasible) {
            if (v_sq < params.v0_sq()) {
                ++under;
            } else {
                ++over;
            }
        }
        report.total_loss += s.loss;
        if (k > 0 && s.cs != report.samples[k - 1].cs) ++report.switch_count;
    }
    const double count = n > 0 ? static_cast<double>(n) : 1.0;
    report.undervoltage_fraction = static_cast<double>(under) / count;
    report.overvoltage_fraction = static_cast<double>(over) / count;
    report.violation_fraction = static_cast<double>(under + over) / count;
    report.average_loss = report.total_loss / count;
    report.loss_cost = cost.k_p * report.average_loss;
    report.capital_cost = cost.capital(report.sizes, params);
    report.total_cost = report.loss_cost + report.capital_cost;
}

SampleRecord make_record(const LoadTrace& trace, std::size_t k, double cs, double qf, const OperatingPoint& op,
                         const CircuitParams& params, std::size_t stage) {
    SampleRecord rec;
    rec.tau = trace.first_tau + static_cast<std::int64_t>(k);
    rec.p = trace.power[k];
    rec.cs = cs;
    rec.qf = qf;
    rec.v = op.v;
    rec.i = op.i;
    rec.loss = op.loss(params);
    rec.feasible = in_voltage_band(op.v_sq, params);
    rec.stage = stage;
    return rec;
}

}  // namespace

void RealtimeConfig::validate() const {
    if (!(p_est > 0.0 && p_th > p_est)) throw ConfigError("real-time thresholds require p_th > p_est > 0");
    if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in [0, 1]");
}

ConstraintBounds interpolate_bounds(const std::vector<ControlTableRow>& table, double p, const CircuitParams& params) {
    if (table.empty()) throw std::invalid_argument("control table is empty");
    std::size_t hi = 0;
    while (hi < table.size() && table[hi].p < p) ++hi;
    std::size_t lo = hi;
    double w = 0.0;
    if (hi == 0) {
        lo = hi = 0;
    } else if (hi == table.size()) {
        lo = hi = table.size() - 1;
    } else {
        lo = hi - 1;
        w = (p - table[lo].p) / (table[hi].p - table[lo].p);
    }
    const auto& a = table[lo].bounds;
    const auto& b = table[hi].bounds;
    ConstraintBounds out = a;
    out.l_tilde = lerp(table[lo].l_tilde, table[hi].l_tilde, w);
    std::tie(out.g1, out.g2) = deterministic_bounds(p, out.l_tilde, params);
    out.h1 = lerp(a.h1, b.h1, w);
    out.h2 = lerp(a.h2, b.h2, w);
    out.h_tilde1 = lerp(a.h_tilde1, b.h_tilde1, w);
    out.h_tilde2 = lerp(a.h_tilde2, b.h_tilde2, w);
    return out;
}

SimulationReport run_realtime(const LoadTrace& trace, const DeviceSizes& sizes,
                              const std::vector<ControlTableRow>& table, const RealtimeConfig& rt,
                              const CostModel& cost, const CircuitParams& params, Execution exec) {
    rt.validate();
    if (trace.empty()) throw EmptyTrace("cannot replay an empty trace");
    if (!is_stable(params, sizes.c0 + sizes.cs_max)) {
        throw StabilityViolation("device sizes violate 1 - 2 x f0 (C0 + Cs) > 0");
    }

    SimulationReport report;
    report.tag = "controlled";
    report.sizes = sizes;
    report.delta = rt.delta;

    const std::size_t n = trace.size();
    const std::size_t d = rt.delay;
    // scheduled[tau] is the level applied at tau; the first d samples hold level 0.
    std::vector<double> scheduled(n + d + 1, 0.0);
    std::vector<std::size_t> stage_of(n, 0);

    auto solve_and_schedule = [&](std::size_t tau, double p_input, bool new_stage) {
        const auto bounds = interpolate_bounds(table, p_input, params);
        const auto res = slow_control(p_input, sizes, bounds, params);
        ScheduleEvent ev;
        ev.tau = tau;
        ev.applies_at = tau + d;
        ev.p_input = p_input;
        ev.new_stage = new_stage;
        ev.feasible = res.feasible;
        const double previous = tau + d > 0 ? scheduled[tau + d - 1] : 0.0;
        ev.cs = res.feasible ? res.cs_star : previous;
        if (!res.feasible) ++report.slow_infeasible;
        scheduled[tau + d] = ev.cs;
        report.schedule.push_back(ev);
    };

    std::size_t stage = 0;
    double stage_mean = trace.power[0];
    double solved_mean = stage_mean;
    std::size_t duration = 1;
    solve_and_schedule(0, stage_mean, true);

    for (std::size_t tau = 1; tau < n; ++tau) {
        const double p = trace.power[tau];
        if (std::abs(p - stage_mean) > rt.p_th) {
            ++stage;
            stage_mean = p;
            solved_mean = p;
            duration = 1;
            solve_and_schedule(tau, solved_mean, true);
        } else {
            stage_mean = (stage_mean * static_cast<double>(duration) + p) / static_cast<double>(duration + 1);
            ++duration;
            if (std::abs(stage_mean - solved_mean) > rt.p_est) {
                solved_mean = stage_mean;
                solve_and_schedule(tau, solved_mean, false);
            } else {
                scheduled[tau + d] = scheduled[tau + d - 1];
            }
        }
        stage_of[tau] = stage;
    }
    report.stage_count = stage + 1;

    std::vector<double> c_total(n);
    for (std::size_t k = 0; k < n; ++k) c_total[k] = sizes.c0 + scheduled[k];
    std::vector<FastControlResult> fast(n);
    fast_control_batch(trace.power, c_total, sizes.qf_max, params, fast, exec);

    report.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        report.samples[k] = make_record(trace, k, scheduled[k], fast[k].qf, fast[k].op, params, stage_of[k]);
    }
    summarise(report, cost, params);
    return report;
}

SimulationReport run_realtime(const LoadTrace& trace, const DeviceSizes& sizes, const TransitionModel& model,
                              const StationaryDistribution& stat, const LossProxyVector& l_star,
                              const RealtimeConfig& rt, const CostModel& cost, const CircuitParams& params,
                              Execution exec) {
    const auto table = build_control_table(sizes, l_star, stat, model, rt.delta, params);
    return run_realtime(trace, sizes, table, rt, cost, params, exec);
}

SimulationReport run_benchmark_fixed_only(const LoadTrace& trace, double c0_fixed, const CircuitParams& params,
                                          const CostModel& cost, Execution exec) {
    if (trace.empty()) throw EmptyTrace("cannot replay an empty trace");
    if (!is_stable(params, c0_fixed)) throw StabilityViolation("fixed capacitor violates 1 - 2 x f0 C0 > 0");

    SimulationReport report;
    report.tag = "benchmark-fixed";
    report.sizes = DeviceSizes{c0_fixed, 0.0, 1, 0.0};

    const std::size_t n = trace.size();
    std::vector<PowerFlowCase> cases(n);
    for (std::size_t k = 0; k < n; ++k) cases[k] = {trace.power[k], c0_fixed, 0.0};
    std::vector<OperatingPoint> ops(n);
    solve_distflow_batch(cases, params, ops, exec);

    report.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) report.samples[k] = make_record(trace, k, 0.0, 0.0, ops[k], params, 0);
    report.stage_count = 1;
    summarise(report, cost, params);
    return report;
}

SimulationReport run_benchmark_dstatcom_only(const LoadTrace& trace, const CircuitParams& params,
                                             const CostModel& cost, Execution exec) {
    if (trace.empty()) throw EmptyTrace("cannot replay an empty trace");
    const double qf_max = min_dstatcom_range(trace.p_hi, params);

    SimulationReport report;
    report.tag = "benchmark-dstatcom";
    report.sizes = DeviceSizes{0.0, 0.0, 1, qf_max};

    const std::size_t n = trace.size();
    std::vector<double> c_total(n, 0.0);
    std::vector<FastControlResult> fast(n);
    fast_control_batch(trace.power, c_total, qf_max, params, fast, exec);

    report.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) report.samples[k] = make_record(trace, k, 0.0, fast[k].qf, fast[k].op, params, 0);
    report.stage_count = 1;
    summarise(report, cost, params);
    return report;
}

namespace {

// Smallest value in [0, hi_start) (expanded as needed) where rises(value) holds,
// assuming rises is monotone.
template <typename Pred>
double smallest_satisfying(Pred rises, double hi_start, double limit) {
    if (rises(0.0)) return 0.0;
    double lo = 0.0;
    double hi = std::min(hi_start, limit);
    while (!rises(hi)) {
        lo = hi;
        if (hi >= limit) throw NoConvergence("no value within the stable range meets the voltage band");
        hi = std::min(2.0 * hi, limit);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rises(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

double fixed_capacitor_for_band(double p, const CircuitParams& params) {
    const double target = params.v0_sq() - params.epsilon;
    // stay strictly inside the stable region
    const double limit = 0.999 / (2.0 * params.x * params.f0);
    return smallest_satisfying([&](double c) { return solve_distflow(p, params, c, 0.0).v_sq >= target; }, 1000.0,
                               limit);
}

double min_dstatcom_range(double p, const CircuitParams& params) {
    const double target = params.v0_sq() - params.epsilon;
    return smallest_satisfying([&](double q) { return solve_distflow(p, params, 0.0, q).v_sq >= target; }, 1000.0,
                               1e9);
}

void write_samples_csv(const std::filesystem::path& path, const SimulationReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write samples file '" + path.string() + "'");
    out.precision(12);
    out << "tau,p,cs,qf,v,loss,stage,feasible\n";
    for (const auto& s : report.samples) {
        out << s.tau << ',' << s.p << ',' << s.cs << ',' << s.qf << ',' << s.v << ',' << s.loss << ',' << s.stage
            << ',' << (s.feasible ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("failed writing samples file '" + path.string() + "'");
}

}  // namespace voltsize
