#include "voltsize/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "voltsize/artifacts.hpp"
#include "voltsize/errors.hpp"

namespace voltsize {

namespace {

LoadTrace read_configured_trace(const RunConfig& cfg) {
    if (!std::filesystem::exists(cfg.trace)) {
        throw IoError("trace file '" + cfg.trace.string() + "' does not exist");
    }
    return ingest_trace(cfg.trace, cfg.dt, cfg.p_lo, cfg.p_hi);
}

struct Estimation {
    TransitionModel model;
    StationaryDistribution stat;
};

Estimation load_estimation(const OutputLayout& layout) {
    for (const auto& p : {layout.model(), layout.stationary()}) {
        if (!std::filesystem::exists(p)) {
            throw IoError("model artifact '" + p.string() + "' is missing; run `estimate` first");
        }
    }
    return {load_transition_model(layout.model()), load_stationary(layout.stationary())};
}

SizingResult size_one(const RunConfig& cfg, const Estimation& est, double delta, std::size_t index,
                      Execution exec) {
    SizingProblem problem;
    problem.stat = &est.stat;
    problem.model = &est.model;
    problem.delta = delta;
    problem.cost = cfg.cost();
    problem.params = cfg.circuit;
    problem.k_levels = cfg.k_levels;
    SAConfig sa = cfg.sa;
    sa.seed = derived_seed(cfg.seed, index);
    return optimal_sizing(problem, sa, cfg.termination, exec);
}

void write_report_files(const std::filesystem::path& dir, const SimulationReport& report, const CostModel& cost) {
    ensure_writable_dir(dir);
    write_samples_csv(dir / "samples.csv", report);
    save_report(dir / "report.json", report, cost);
}

double benchmark_capacitor(const RunConfig& cfg, const LoadTrace& trace) {
    if (cfg.benchmark_c0) return *cfg.benchmark_c0;
    const double peak = *std::max_element(trace.power.begin(), trace.power.end());
    return fixed_capacitor_for_band(peak, cfg.circuit);
}

}  // namespace

std::string delta_label(double delta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", delta);
    return buf;
}

std::uint64_t derived_seed(std::uint64_t master, std::size_t index) {
    std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::filesystem::path OutputLayout::sizing(double delta) const {
    return root / ("sizing_delta_" + delta_label(delta) + ".json");
}

std::filesystem::path OutputLayout::simulation_dir(double delta) const {
    return root / ("simulate_delta_" + delta_label(delta));
}

void ensure_writable_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    const auto probe = dir / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw IoError("output directory '" + dir.string() + "' is not writable");
    }
    std::filesystem::remove(probe, ec);
}

TraceSplit split_trace(const LoadTrace& trace, double train_fraction) {
    if (train_fraction >= 1.0) return {trace, trace};
    const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(trace.size())));
    if (cut == 0 || cut >= trace.size()) throw ConfigError("train_fraction leaves an empty training or test trace");
    return {trace.slice(0, cut), trace.slice(cut, trace.size())};
}

GeneratedTrace cmd_synth(const RunConfig& cfg, std::ostream& log) {
    auto gen = generate_synthetic_trace(cfg.synth, cfg.seed);
    if (cfg.trace.has_parent_path()) ensure_writable_dir(cfg.trace.parent_path());
    write_trace(cfg.trace, gen.trace);
    log << "synth: wrote " << gen.trace.size() << " samples in " << gen.stage_starts.size() << " stages to "
        << cfg.trace.string() << '\n';
    return gen;
}

EstimateResult cmd_estimate(const RunConfig& cfg, std::ostream& log) {
    const OutputLayout layout{cfg.out};
    ensure_writable_dir(layout.root);
    const auto trace = read_configured_trace(cfg);
    const auto split = split_trace(trace, cfg.train_fraction);

    EstimateResult res;
    res.stages = segment_stages(split.train, cfg.p_th);
    auto transitions = res.stages;
    if (transitions.size() == 1) {
        // A trace that never leaves its first stage is read as a stage that persists:
        // one self-transition, so the occupied bin gets a self-loop row.
        log << "estimate: single stage in the training trace; using a self-transition\n";
        transitions.stages.push_back(transitions.stages.front());
    }
    res.model = estimate_transition_model(transitions, cfg.p_lo, cfg.p_hi, cfg.transition_bins);
    res.stat = estimate_stationary(split.train, cfg.stationary_parts);
    save_transition_model(layout.model(), res.model);
    save_stationary(layout.stationary(), res.stat);

    std::size_t occupied = 0;
    for (std::size_t b = 0; b < res.model.n_bins(); ++b) {
        std::uint64_t row = 0;
        for (std::size_t j = 0; j < res.model.n_bins(); ++j) row += res.model.counts[b * res.model.n_bins() + j];
        if (row > 0) ++occupied;
    }
    log << "estimate: " << split.train.size() << " training samples (" << trace.clipped << " clipped), "
        << res.stages.size() << " stages, " << occupied << "/" << res.model.n_bins()
        << " transition bins occupied\n";
    return res;
}

std::vector<SizingResult> cmd_size(const RunConfig& cfg, std::ostream& log) {
    const OutputLayout layout{cfg.out};
    ensure_writable_dir(layout.root);
    const auto est = load_estimation(layout);
    const auto cost = cfg.cost();

    std::vector<SizingResult> results;
    for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
        const double delta = cfg.deltas[i];
        auto res = size_one(cfg, est, delta, i, Execution::Parallel);
        save_sizing(layout.sizing(delta), res, cost);
        log << "size: delta=" << delta << " C0=" << res.sizes.c0 << " Cs=" << res.sizes.cs_max
            << " qf_max=" << res.sizes.qf_max << " objective=" << res.objective.total
            << " (loss " << res.objective.loss_cost << " + capital " << res.objective.capital_cost << ") $/day, "
            << res.history.size() << " outer iterations" << (res.converged ? "" : " (not converged)") << '\n';
        results.push_back(std::move(res));
    }
    return results;
}

SimulationReport cmd_simulate(const RunConfig& cfg, SimulateMode mode, std::ostream& log) {
    const OutputLayout layout{cfg.out};
    ensure_writable_dir(layout.root);
    const auto trace = read_configured_trace(cfg);
    const auto test = split_trace(trace, cfg.train_fraction).test;
    const auto cost = cfg.cost();

    SimulationReport report;
    std::filesystem::path dir;
    switch (mode) {
        case SimulateMode::BenchmarkFixed:
            report = run_benchmark_fixed_only(test, benchmark_capacitor(cfg, test), cfg.circuit, cost);
            dir = layout.benchmark_dir("fixed");
            break;
        case SimulateMode::BenchmarkDstatcom:
            report = run_benchmark_dstatcom_only(test, cfg.circuit, cost);
            dir = layout.benchmark_dir("dstatcom");
            break;
        case SimulateMode::Controlled: {
            const double delta = cfg.deltas.front();
            const auto sizing_path = layout.sizing(delta);
            if (!std::filesystem::exists(sizing_path)) {
                throw IoError("sizing artifact '" + sizing_path.string() + "' is missing; run `size` first");
            }
            const auto sizing = load_sizing(sizing_path);
            report = run_realtime(test, sizing.sizes, sizing.table, cfg.realtime(delta), cost, cfg.circuit);
            dir = layout.simulation_dir(delta);
            break;
        }
    }
    write_report_files(dir, report, cost);
    log << "simulate[" << report.tag << "]: " << report.samples.size() << " samples, violation_fraction="
        << report.violation_fraction << ", total_cost=" << report.total_cost << " $/day (loss " << report.loss_cost
        << " + capital " << report.capital_cost << "), switches=" << report.switch_count << '\n';
    return report;
}

void write_sweep_summary(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write sweep summary '" + path.string() + "'");
    out << "delta,c0,cs_max,qf_max,range_low_cs0,range_high_cs0,range_low_csmax,range_high_csmax,"
           "violation_fraction,loss_cost,capital_cost,total_cost,objective,outer_iterations,converged,switches,"
           "status\n";
    char buf[512];
    for (const auto& r : rows) {
        if (!r.ok) {
            std::string msg = r.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out << delta_label(r.delta) << ",,,,,,,,,,,,,,,,error: " << msg << '\n';
            continue;
        }
        const auto& s = r.sizes;
        std::snprintf(buf, sizeof buf,
                      "%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d,%d,%zu,ok\n",
                      delta_label(r.delta).c_str(), s.c0, s.cs_max, s.qf_max, s.c0 - s.qf_max, s.c0 + s.qf_max,
                      s.c0 + s.cs_max - s.qf_max, s.c0 + s.cs_max + s.qf_max, r.violation_fraction, r.loss_cost,
                      r.capital_cost, r.total_cost, r.objective, r.outer_iterations, r.converged ? 1 : 0,
                      r.switch_count);
        out << buf;
    }
    if (!out) throw IoError("failed writing sweep summary '" + path.string() + "'");
}

SweepResult cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    const OutputLayout layout{cfg.out};
    ensure_writable_dir(layout.root);
    const auto est = load_estimation(layout);
    const auto trace = read_configured_trace(cfg);
    const auto test = split_trace(trace, cfg.train_fraction).test;
    const auto cost = cfg.cost();

    SweepResult result;
    result.rows.resize(cfg.deltas.size());
    const auto count = static_cast<std::ptrdiff_t>(cfg.deltas.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        auto& row = result.rows[static_cast<std::size_t>(i)];
        row.delta = cfg.deltas[static_cast<std::size_t>(i)];
        try {
            const auto sizing = size_one(cfg, est, row.delta, static_cast<std::size_t>(i), Execution::Parallel);
            save_sizing(layout.sizing(row.delta), sizing, cost);
            const auto report =
                run_realtime(test, sizing.sizes, sizing.table, cfg.realtime(row.delta), cost, cfg.circuit);
            write_report_files(layout.simulation_dir(row.delta), report, cost);
            row.sizes = sizing.sizes;
            row.objective = sizing.objective.total;
            row.outer_iterations = static_cast<int>(sizing.history.size());
            row.converged = sizing.converged;
            row.last_l_change = sizing.history.back().l_change;
            row.violation_fraction = report.violation_fraction;
            row.loss_cost = report.loss_cost;
            row.capital_cost = report.capital_cost;
            row.total_cost = report.total_cost;
            row.switch_count = report.switch_count;
            row.chance_rows_dropped = std::none_of(sizing.table.begin(), sizing.table.end(),
                                                   [](const ControlTableRow& r) { return r.bounds.chance_active; });
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    }

    result.benchmark_fixed = run_benchmark_fixed_only(test, benchmark_capacitor(cfg, test), cfg.circuit, cost);
    result.benchmark_dstatcom = run_benchmark_dstatcom_only(test, cfg.circuit, cost);
    write_report_files(layout.benchmark_dir("fixed"), result.benchmark_fixed, cost);
    write_report_files(layout.benchmark_dir("dstatcom"), result.benchmark_dstatcom, cost);

    write_sweep_summary(layout.sweep_summary(), result.rows);
    {
        std::ofstream out(layout.sweep_benchmarks());
        if (!out) throw IoError("cannot write '" + layout.sweep_benchmarks().string() + "'");
        out.precision(10);
        out << "benchmark,c0,qf_max,violation_fraction,loss_cost,capital_cost,total_cost\n";
        for (const auto* b : {&result.benchmark_fixed, &result.benchmark_dstatcom}) {
            out << b->tag << ',' << b->sizes.c0 << ',' << b->sizes.qf_max << ',' << b->violation_fraction << ','
                << b->loss_cost << ',' << b->capital_cost << ',' << b->total_cost << '\n';
        }
    }

    for (const auto& r : result.rows) {
        if (r.ok) {
            log << "sweep: delta=" << r.delta << " C0=" << r.sizes.c0 << " Cs=" << r.sizes.cs_max
                << " qf_max=" << r.sizes.qf_max << " violation_fraction=" << r.violation_fraction
                << " total_cost=" << r.total_cost << '\n';
        } else {
            log << "sweep: delta=" << r.delta << " failed: " << r.error << '\n';
        }
    }
    log << "sweep: benchmark fixed-only cost=" << result.benchmark_fixed.total_cost
        << ", D-STATCOM-only cost=" << result.benchmark_dstatcom.total_cost << " $/day\n";
    return result;
}

}  // namespace voltsize
