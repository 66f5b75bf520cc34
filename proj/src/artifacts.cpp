#include "voltsize/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "voltsize/errors.hpp"

namespace voltsize {

namespace {

using nlohmann::json;

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

template <typename F>
auto guarded(const std::filesystem::path& path, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

json sizes_json(const DeviceSizes& s) {
    return {{"c0", s.c0}, {"cs_max", s.cs_max}, {"k_levels", s.k_levels}, {"qf_max", s.qf_max}};
}

DeviceSizes sizes_from(const json& j) {
    return {j.at("c0").get<double>(), j.at("cs_max").get<double>(), j.at("k_levels").get<int>(),
            j.at("qf_max").get<double>()};
}

json objective_json(const ObjectiveValue& v) {
    return {{"finite", v.finite},
            {"total", v.total},
            {"expected_loss", v.expected_loss},
            {"loss_cost", v.loss_cost},
            {"capital_cost", v.capital_cost}};
}

ObjectiveValue objective_from(const json& j) {
    ObjectiveValue v;
    v.finite = j.at("finite").get<bool>();
    v.total = j.at("total").get<double>();
    v.expected_loss = j.at("expected_loss").get<double>();
    v.loss_cost = j.at("loss_cost").get<double>();
    v.capital_cost = j.at("capital_cost").get<double>();
    return v;
}

json cost_json(const CostModel& c) { return {{"k_p", c.k_p}, {"k_0", c.k_0}, {"k_s", c.k_s}, {"k_f", c.k_f}}; }

}  // namespace

void save_transition_model(const std::filesystem::path& path, const TransitionModel& model) {
    write_json(path, json{{"bin_edges", model.bin_edges}, {"trans", model.trans}, {"counts", model.counts}});
}

TransitionModel load_transition_model(const std::filesystem::path& path) {
    const auto doc = read_json(path);
    return guarded(path, [&] {
        TransitionModel m;
        m.bin_edges = doc.at("bin_edges").get<std::vector<double>>();
        m.trans = doc.at("trans").get<std::vector<double>>();
        m.counts = doc.at("counts").get<std::vector<std::uint64_t>>();
        const auto n = m.n_bins();
        if (n < 1 || m.trans.size() != n * n || m.counts.size() != n * n) {
            throw ParseError(path.string() + ": transition matrix shape does not match the bin edges");
        }
        return m;
    });
}

void save_stationary(const std::filesystem::path& path, const StationaryDistribution& stat) {
    write_json(path, json{{"edges", stat.edges}, {"weights", stat.weights}, {"midpoints", stat.midpoints}});
}

StationaryDistribution load_stationary(const std::filesystem::path& path) {
    const auto doc = read_json(path);
    return guarded(path, [&] {
        StationaryDistribution s;
        s.edges = doc.at("edges").get<std::vector<double>>();
        s.weights = doc.at("weights").get<std::vector<double>>();
        s.midpoints = doc.at("midpoints").get<std::vector<double>>();
        if (s.edges.size() != s.weights.size() + 1 || s.midpoints.size() != s.weights.size()) {
            throw ParseError(path.string() + ": stationary partition arrays have inconsistent lengths");
        }
        return s;
    });
}

void save_sizing(const std::filesystem::path& path, const SizingResult& result, const CostModel& cost) {
    json table = json::array();
    for (const auto& row : result.table) {
        const auto& b = row.bounds;
        const auto& c = row.control;
        table.push_back({{"p", row.p},
                         {"weight", row.weight},
                         {"l_tilde", row.l_tilde},
                         {"g1", b.g1},
                         {"g2", b.g2},
                         {"h1", b.h1},
                         {"h2", b.h2},
                         {"h_tilde1", b.h_tilde1},
                         {"h_tilde2", b.h_tilde2},
                         {"l_plus_lo", b.l_plus_lo},
                         {"l_plus_hi", b.l_plus_hi},
                         {"chance_active", b.chance_active},
                         {"feasible", c.feasible},
                         {"level", c.level},
                         {"cs", c.cs_star},
                         {"qf", c.qf_star},
                         {"loss_tilde", c.loss_tilde}});
    }
    json history = json::array();
    for (const auto& it : result.history) {
        history.push_back({{"sizes", sizes_json(it.sizes)},
                           {"objective", objective_json(it.objective)},
                           {"l_change", it.l_change},
                           {"size_change", std::isfinite(it.size_change) ? json(it.size_change) : json(nullptr)}});
    }
    write_json(path, json{{"delta", result.delta},
                          {"sizes", sizes_json(result.sizes)},
                          {"l_star", result.l_star.l_tilde},
                          {"converged", result.converged},
                          {"outer_iterations", result.history.size()},
                          {"objective", objective_json(result.objective)},
                          {"cost", cost_json(cost)},
                          {"table", table},
                          {"history", history}});
}

SizingResult load_sizing(const std::filesystem::path& path) {
    const auto doc = read_json(path);
    return guarded(path, [&] {
        SizingResult r;
        r.delta = doc.at("delta").get<double>();
        r.sizes = sizes_from(doc.at("sizes"));
        r.l_star.l_tilde = doc.at("l_star").get<std::vector<double>>();
        r.converged = doc.at("converged").get<bool>();
        r.objective = objective_from(doc.at("objective"));
        for (const auto& j : doc.at("table")) {
            ControlTableRow row;
            row.p = j.at("p").get<double>();
            row.weight = j.at("weight").get<double>();
            row.l_tilde = j.at("l_tilde").get<double>();
            auto& b = row.bounds;
            b.g1 = j.at("g1").get<double>();
            b.g2 = j.at("g2").get<double>();
            b.h1 = j.at("h1").get<double>();
            b.h2 = j.at("h2").get<double>();
            b.h_tilde1 = j.at("h_tilde1").get<double>();
            b.h_tilde2 = j.at("h_tilde2").get<double>();
            b.l_plus_lo = j.at("l_plus_lo").get<double>();
            b.l_plus_hi = j.at("l_plus_hi").get<double>();
            b.l_tilde = row.l_tilde;
            b.chance_active = j.at("chance_active").get<bool>();
            auto& c = row.control;
            c.feasible = j.at("feasible").get<bool>();
            c.level = j.at("level").get<int>();
            c.cs_star = j.at("cs").get<double>();
            c.qf_star = j.at("qf").get<double>();
            c.loss_tilde = j.at("loss_tilde").get<double>();
            c.chance_active = b.chance_active;
            r.table.push_back(row);
        }
        for (const auto& j : doc.at("history")) {
            OuterIteration it;
            it.sizes = sizes_from(j.at("sizes"));
            it.objective = objective_from(j.at("objective"));
            it.l_change = j.at("l_change").get<double>();
            it.size_change = j.at("size_change").is_null() ? std::numeric_limits<double>::infinity()
                                                           : j.at("size_change").get<double>();
            r.history.push_back(it);
        }
        return r;
    });
}

void save_report(const std::filesystem::path& path, const SimulationReport& report, const CostModel& cost) {
    write_json(path, json{{"tag", report.tag},
                          {"delta", report.delta},
                          {"sizes", sizes_json(report.sizes)},
                          {"samples", report.samples.size()},
                          {"violation_fraction", report.violation_fraction},
                          {"undervoltage_fraction", report.undervoltage_fraction},
                          {"overvoltage_fraction", report.overvoltage_fraction},
                          {"total_loss", report.total_loss},
                          {"average_loss", report.average_loss},
                          {"loss_cost", report.loss_cost},
                          {"capital_cost", report.capital_cost},
                          {"total_cost", report.total_cost},
                          {"stage_count", report.stage_count},
                          {"switch_count", report.switch_count},
                          {"slow_infeasible", report.slow_infeasible},
                          {"cost", cost_json(cost)}});
}

}  // namespace voltsize
