#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "voltsize/control.hpp"
#include "voltsize/sizing.hpp"

using namespace voltsize;

namespace {

LoadTrace constant_trace(double p, std::size_t n) {
    LoadTrace t;
    t.power.assign(n, p);
    t.p_lo = 2150.0;
    t.p_hi = 3650.0;
    return t;
}

struct Fixture {
    StationaryDistribution stat;
    TransitionModel model;
};

Fixture constant_fixture(double p) {
    const auto trace = constant_trace(p, 1000);
    auto stages = segment_stages(trace, 200.0);
    stages.stages.push_back(stages.stages.front());
    return {estimate_stationary(trace, 50), estimate_transition_model(stages, 2150.0, 3650.0, 15)};
}

Fixture two_level_fixture() {
    LoadTrace t = constant_trace(2400.0, 4000);
    for (std::size_t k = 0; k < t.size(); ++k) {
        if ((k / 500) % 2 == 1) t.power[k] = 3300.0;
    }
    const auto stages = segment_stages(t, 200.0);
    return {estimate_stationary(t, 50), estimate_transition_model(stages, 2150.0, 3650.0, 15)};
}

const CostModel kPaperCost = CostModel::from_prices(50.0, 1000.0, 100000.0, 30.0);

}  // namespace

TEST_CASE("cost coefficients from prices") {
    CHECK(kPaperCost.k_p == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(kPaperCost.k_0 == doctest::Approx(1.0 / (30.0 * 365.0)).epsilon(1e-15));
    CHECK(kPaperCost.k_0 == doctest::Approx(9.132e-5).epsilon(1e-3));
    CHECK(kPaperCost.k_s == kPaperCost.k_0);
    CHECK(kPaperCost.k_f == doctest::Approx(9.132e-3).epsilon(1e-3));
    const CircuitParams cp;
    const DeviceSizes s{1000.0, 500.0, 1, 100.0};
    CHECK(kPaperCost.capital(s, cp) == doctest::Approx(kPaperCost.k_0 * 1500.0 + kPaperCost.k_f * 100.0));
}

TEST_CASE("approximate objective") {
    const CircuitParams cp;
    const auto fx = two_level_fixture();
    const LossProxyVector l{std::vector<double>(50, 8e6)};

    SUBCASE("no devices is infeasible") {
        const auto v = approx_objective(DeviceSizes{0.0, 0.0, 1, 0.0}, l, fx.stat, fx.model, 0.1, kPaperCost, cp);
        CHECK(!v.finite);
    }

    const DeviceSizes sizes{2400.0, 900.0, 1, 900.0};
    const auto base = approx_objective(sizes, l, fx.stat, fx.model, 0.1, kPaperCost, cp);
    REQUIRE(base.finite);

    SUBCASE("decomposition") {
        double weighted = 0.0;
        for (std::size_t n = 0; n < fx.stat.size(); ++n) weighted += base.per_part[n].loss_tilde * fx.stat.weights[n];
        CHECK(base.expected_loss == doctest::Approx(weighted).epsilon(1e-12));
        CHECK(base.total == doctest::Approx(kPaperCost.k_p * weighted + kPaperCost.capital(sizes, cp)).epsilon(1e-12));
    }
    SUBCASE("zero energy price leaves the capital terms") {
        CostModel c = kPaperCost;
        c.k_p = 0.0;
        const auto v = approx_objective(sizes, l, fx.stat, fx.model, 0.1, c, cp);
        CHECK(v.total == kPaperCost.capital(sizes, cp));
    }
    SUBCASE("doubling the energy price doubles the loss term") {
        CostModel c = kPaperCost;
        c.k_p *= 2.0;
        const auto v = approx_objective(sizes, l, fx.stat, fx.model, 0.1, c, cp);
        CHECK(v.loss_cost == doctest::Approx(2.0 * base.loss_cost).epsilon(1e-15));
        CHECK(v.capital_cost == base.capital_cost);
    }
    SUBCASE("single part composes by hand") {
        StationaryDistribution one{{2150.0, 3650.0}, {1.0}, {2900.0}};
        const LossProxyVector l1{{9e6}};
        const auto v = approx_objective(sizes, l1, one, fx.model, 0.2, kPaperCost, cp);
        const auto b = constraint_bounds(2900.0, fx.model, 0.2, 9e6, cp);
        const auto sc = slow_control(2900.0, sizes, b, cp);
        REQUIRE(sc.feasible);
        CHECK(v.total == doctest::Approx(kPaperCost.k_p * sc.loss_tilde + kPaperCost.capital(sizes, cp)).epsilon(1e-14));
    }
    SUBCASE("serial and parallel kernels agree") {
        const auto s = approx_objective(sizes, l, fx.stat, fx.model, 0.1, kPaperCost, cp, Execution::Serial);
        CHECK(s.total == base.total);
    }
}

TEST_CASE("simulated annealing") {
    const SizeVector target{5.0, 3.0, 1.0};
    const SizeObjective quad = [&](const SizeVector& v) -> std::optional<double> {
        double s = 0.0;
        for (int d = 0; d < 3; ++d) s += (v[d] - target[d]) * (v[d] - target[d]);
        return s;
    };
    SAConfig cfg;
    const auto r = simulated_annealing(quad, {0.0, 0.0, 0.0}, cfg);
    REQUIRE(r.found_finite);
    for (int d = 0; d < 3; ++d) CHECK(std::abs(r.best[d] - target[d]) < 1e-2);

    const auto again = simulated_annealing(quad, {0.0, 0.0, 0.0}, cfg);
    CHECK(again.best == r.best);
    CHECK(again.best_cost == r.best_cost);

    SUBCASE("best-so-far never worse than the start") {
        const SizeObjective floor = [](const SizeVector& v) -> std::optional<double> {
            return std::max(0.0, v[0] + v[1] + v[2] - 1.0);
        };
        const auto f = simulated_annealing(floor, {0.0, 0.0, 0.0}, cfg);
        CHECK(f.best_cost <= 0.0);
    }
    SUBCASE("infeasible points are never returned") {
        const SizeObjective walled = [&](const SizeVector& v) -> std::optional<double> {
            if (v[0] < 6.0) return std::nullopt;
            return quad(v);
        };
        const auto w = simulated_annealing(walled, {10.0, 0.0, 0.0}, cfg);
        REQUIRE(w.found_finite);
        CHECK(w.best[0] >= 6.0);
        CHECK(std::abs(w.best[0] - 6.0) < 5e-2);
    }
    SUBCASE("configuration checks") {
        SAConfig bad = cfg;
        bad.cooling = 1.0;
        CHECK_THROWS(simulated_annealing(quad, {0.0, 0.0, 0.0}, bad));
        CHECK_THROWS(simulated_annealing(quad, {-1.0, 0.0, 0.0}, cfg));
    }
}

TEST_CASE("outer sizing loop") {
    const CircuitParams cp;
    SAConfig sa;
    sa.max_iterations = 4000;

    SUBCASE("constant load converges quickly and is feasible at that load") {
        const auto fx = constant_fixture(3000.0);
        const SizingProblem prob{&fx.stat, &fx.model, 0.1, kPaperCost, cp, 1};
        const auto res = optimal_sizing(prob, sa, TerminationConfig{});
        CHECK(res.converged);
        CHECK(res.history.size() <= 4);
        const auto b = constraint_bounds(3000.0, fx.model, 0.1, res.l_star.l_tilde[fx.model.bin_of(3000.0)], cp);
        CHECK(slow_control(3000.0, res.sizes, b, cp).feasible);
    }
    SUBCASE("vacuous termination stops after one iteration") {
        const auto fx = two_level_fixture();
        const SizingProblem prob{&fx.stat, &fx.model, 0.3, kPaperCost, cp, 1};
        const double inf = std::numeric_limits<double>::infinity();
        const auto res = optimal_sizing(prob, sa, TerminationConfig{inf, inf, 20});
        CHECK(res.history.size() == 1);
        CHECK(res.converged);
    }
    SUBCASE("converged proxies are self-consistent") {
        const auto fx = two_level_fixture();
        const SizingProblem prob{&fx.stat, &fx.model, 0.2, kPaperCost, cp, 1};
        const auto res = optimal_sizing(prob, sa, TerminationConfig{});
        REQUIRE(res.converged);
        const auto v = approx_objective(res.sizes, res.l_star, fx.stat, fx.model, 0.2, kPaperCost, cp);
        REQUIRE(v.finite);
        double diff = 0.0, scale = 0.0;
        for (std::size_t n = 0; n < fx.stat.size(); ++n) {
            diff = std::max(diff, std::abs(v.per_part[n].loss_tilde / cp.r - res.l_star.l_tilde[n]));
            scale = std::max(scale, res.l_star.l_tilde[n]);
        }
        CHECK(diff / scale <= 1e-3);
        CHECK(res.table.size() == fx.stat.size());
        for (const auto& row : res.table) CHECK(row.control.feasible);
    }
    SUBCASE("same seed gives the same sizes") {
        const auto fx = two_level_fixture();
        const SizingProblem prob{&fx.stat, &fx.model, 0.5, kPaperCost, cp, 1};
        const auto a = optimal_sizing(prob, sa, TerminationConfig{});
        const auto b = optimal_sizing(prob, sa, TerminationConfig{}, Execution::Serial);
        CHECK(a.sizes.c0 == b.sizes.c0);
        CHECK(a.sizes.cs_max == b.sizes.cs_max);
        CHECK(a.sizes.qf_max == b.sizes.qf_max);
    }
}
