#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "voltsize/control.hpp"
#include "voltsize/realtime.hpp"
#include "voltsize/sizing.hpp"

using namespace voltsize;

namespace {

const CostModel kCost = CostModel::from_prices(50.0, 1000.0, 100000.0, 30.0);

LoadTrace trace_of(std::vector<double> p) {
    LoadTrace t;
    t.power = std::move(p);
    t.p_lo = 2150.0;
    t.p_hi = 3650.0;
    return t;
}

LoadTrace two_level(std::size_t n, std::size_t period) {
    std::vector<double> p(n, 2400.0);
    for (std::size_t k = 0; k < n; ++k) {
        if ((k / period) % 2 == 1) p[k] = 3300.0;
    }
    return trace_of(p);
}

struct Sized {
    StationaryDistribution stat;
    TransitionModel model;
    SizingResult sizing;
};

Sized size_for(const LoadTrace& train, double delta) {
    const CircuitParams cp;
    auto stages = segment_stages(train, 200.0);
    if (stages.size() == 1) stages.stages.push_back(stages.stages.front());
    Sized s{estimate_stationary(train, 50), estimate_transition_model(stages, 2150.0, 3650.0, 15), {}};
    SAConfig sa;
    sa.max_iterations = 3000;
    const SizingProblem prob{&s.stat, &s.model, delta, kCost, cp, 1};
    s.sizing = optimal_sizing(prob, sa, TerminationConfig{});
    return s;
}

}  // namespace

TEST_CASE("constant trace replay") {
    const CircuitParams cp;
    const auto trace = trace_of(std::vector<double>(600, 3000.0));
    const auto s = size_for(trace, 0.1);
    const RealtimeConfig rt;
    const auto rep = run_realtime(trace, s.sizing.sizes, s.sizing.table, rt, kCost, cp);
    CHECK(rep.stage_count == 1);
    CHECK(rep.switch_count <= 1);
    CHECK(rep.violation_fraction == 0.0);
    CHECK(rep.total_cost == doctest::Approx(rep.loss_cost + rep.capital_cost).epsilon(1e-12));

    const auto rebuilt = run_realtime(trace, s.sizing.sizes, s.model, s.stat, s.sizing.l_star, rt, kCost, cp);
    CHECK(rebuilt.total_cost == rep.total_cost);
}

TEST_CASE("step replay respects the switching delay") {
    const CircuitParams cp;
    const auto s = size_for(two_level(6000, 500), 0.1);
    std::vector<double> p(400, 2400.0);
    for (std::size_t k = 100; k < p.size(); ++k) p[k] = 3300.0;
    const auto trace = trace_of(p);
    RealtimeConfig rt;
    rt.delay = 2;
    const auto rep = run_realtime(trace, s.sizing.sizes, s.sizing.table, rt, kCost, cp);

    bool found = false;
    for (const auto& ev : rep.schedule) {
        if (ev.new_stage && ev.tau == 100) {
            found = true;
            CHECK(ev.applies_at == 102);
        }
    }
    CHECK(found);
    CHECK(rep.samples[100].stage == 1);
    CHECK(rep.samples[100].cs == rep.samples[99].cs);
    CHECK(rep.samples[101].cs == rep.samples[99].cs);
    // the D-STATCOM reacts at once
    CHECK(rep.samples[100].qf > rep.samples[99].qf);
    CHECK(rep.samples[100].feasible);
    CHECK(rep.samples[101].feasible);
}

TEST_CASE("replay invariants on a switching trace") {
    const CircuitParams cp;
    const auto s = size_for(two_level(6000, 500), 0.2);
    const auto trace = two_level(3000, 350);
    const RealtimeConfig rt;
    const auto rep = run_realtime(trace, s.sizing.sizes, s.sizing.table, rt, kCost, cp);

    // causality: each applied change traces back to a solve exactly d samples earlier
    for (std::size_t k = 1; k < rep.samples.size(); ++k) {
        if (rep.samples[k].cs == rep.samples[k - 1].cs) continue;
        bool explained = false;
        for (const auto& ev : rep.schedule) {
            if (ev.applies_at == k && ev.tau + rt.delay == k && ev.cs == rep.samples[k].cs) explained = true;
        }
        CHECK(explained);
    }
    CHECK(rep.stage_count == 9);
    CHECK(rep.switch_count <= rep.schedule.size());

    for (const auto& rec : rep.samples) {
        const auto op = solve_distflow(rec.p, cp, s.sizing.sizes.c0 + rec.cs, rec.qf);
        CHECK(distflow_residuals(rec.p, cp, s.sizing.sizes.c0 + rec.cs, rec.qf, op).max() <= 1e-9);
        CHECK(op.v == rec.v);
        CHECK(std::abs(rec.qf) <= s.sizing.sizes.qf_max);
    }
    CHECK(rep.violation_fraction >= 0.0);
    CHECK(rep.violation_fraction <= 1.0);

    const auto serial = run_realtime(trace, s.sizing.sizes, s.sizing.table, rt, kCost, cp, Execution::Serial);
    REQUIRE(serial.samples.size() == rep.samples.size());
    for (std::size_t k = 0; k < rep.samples.size(); ++k) CHECK(serial.samples[k].qf == rep.samples[k].qf);
}

TEST_CASE("interpolated bounds") {
    const CircuitParams cp;
    const auto s = size_for(two_level(6000, 500), 0.1);
    const auto& table = s.sizing.table;
    const auto at = interpolate_bounds(table, table[10].p, cp);
    CHECK(at.g1 == doctest::Approx(table[10].bounds.g1).epsilon(1e-14));
    CHECK(at.h2 == doctest::Approx(table[10].bounds.h2).epsilon(1e-14));
    const double mid = 0.5 * (table[10].p + table[11].p);
    const auto m = interpolate_bounds(table, mid, cp);
    CHECK(m.h1 == doctest::Approx(0.5 * (table[10].bounds.h1 + table[11].bounds.h1)));
    CHECK(m.l_tilde == doctest::Approx(0.5 * (table[10].l_tilde + table[11].l_tilde)));
    const auto below = interpolate_bounds(table, 1000.0, cp);
    CHECK(below.h1 == table.front().bounds.h1);
}

TEST_CASE("fixed-capacitor benchmark") {
    const CircuitParams cp;
    const auto light = trace_of(std::vector<double>(50, 2200.0));
    const auto rep = run_benchmark_fixed_only(light, 0.0, cp, kCost);
    CHECK(rep.tag == "benchmark-fixed");
    CHECK(rep.samples[0].v < cp.v0);
    CHECK(rep.samples[0].loss > 0.0);
    CHECK(rep.switch_count == 0);

    const auto trace = two_level(2000, 300);
    const double c0 = fixed_capacitor_for_band(3300.0, cp);
    CHECK(solve_distflow(3300.0, cp, c0, 0.0).v_sq >= cp.v0_sq() - cp.epsilon);
    CHECK(solve_distflow(3300.0, cp, c0 * (1.0 - 1e-6), 0.0).v_sq < cp.v0_sq() - cp.epsilon);
    const auto sized = run_benchmark_fixed_only(trace, c0, cp, kCost);
    CHECK(sized.undervoltage_fraction == 0.0);
    CHECK(sized.violation_fraction == sized.overvoltage_fraction);
}

TEST_CASE("D-STATCOM benchmark") {
    const CircuitParams cp;
    const auto top = trace_of(std::vector<double>(50, 3650.0));
    const auto rep = run_benchmark_dstatcom_only(top, cp, kCost);
    CHECK(rep.violation_fraction == 0.0);
    const double q = rep.sizes.qf_max;
    // boundary check against the independent bisection reference
    const auto at = oracle::high_voltage_root(3650.0, 0.0, q, cp);
    const auto below = oracle::high_voltage_root(3650.0, 0.0, q * (1.0 - 1e-6), cp);
    REQUIRE(at);
    REQUIRE(below);
    CHECK(at->v_sq >= cp.v0_sq() - cp.epsilon - 1e-12);
    CHECK(below->v_sq < cp.v0_sq() - cp.epsilon);
    CHECK(rep.capital_cost == doctest::Approx(kCost.k_f * q));

    CostModel free_statcom = kCost;
    free_statcom.k_f = 0.0;
    const auto cheap = run_benchmark_dstatcom_only(top, cp, free_statcom);
    CHECK(cheap.total_cost == cheap.loss_cost);

    const auto trace = two_level(6000, 500);
    const auto s = size_for(trace, 0.1);
    const auto controlled = run_realtime(trace, s.sizing.sizes, s.sizing.table, RealtimeConfig{}, kCost, cp);
    const auto statcom = run_benchmark_dstatcom_only(trace, cp, kCost);
    CHECK(statcom.capital_cost > controlled.capital_cost);
}

TEST_CASE("configuration checks") {
    RealtimeConfig rt;
    rt.p_est = rt.p_th;
    CHECK_THROWS(rt.validate());
    const CircuitParams cp;
    CHECK_THROWS(run_benchmark_fixed_only(trace_of({}), 0.0, cp, kCost));
}
