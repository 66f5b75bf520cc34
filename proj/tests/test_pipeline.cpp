#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "voltsize/artifacts.hpp"
#include "voltsize/config.hpp"
#include "voltsize/errors.hpp"
#include "voltsize/pipeline.hpp"

using namespace voltsize;

namespace {

// Small, fast settings shared by the pipeline tests.
RunConfig small_config(const testutil::TempDir& dir) {
    RunConfig cfg = parse_config(
        "# short synthetic study\n"
        "trace = trace.csv\n"
        "out = out\n"
        "synth_samples = 6000\n"
        "synth_mean_duration = 300\n"
        "synth_states = 2300, 3300, 2800\n"
        "synth_transitions = 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0\n"
        "sa_max_iterations = 1500\n"
        "sa_restarts = 2\n"
        "seed = 9\n",
        dir.path());
    cfg.validate();
    return cfg;
}

void write_constant_trace(const std::filesystem::path& path, double p, std::size_t n) {
    std::ofstream out(path);
    out << "index,power_kw\n";
    for (std::size_t k = 0; k < n; ++k) out << k << ',' << p << '\n';
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config("r = 2e-5\nx=1e-5 # trailing comment\ndeltas = 0.1, 0.5\nsa_step = 1,2,3\n"
                                  "energy_price_per_mwh = 0\nbenchmark_c0 = 1200\n");
    CHECK(cfg.circuit.r == 2e-5);
    CHECK(cfg.circuit.x == 1e-5);
    CHECK(cfg.deltas == std::vector<double>{0.1, 0.5});
    CHECK(!cfg.sa.auto_step);
    CHECK(cfg.sa.step[2] == 3.0);
    CHECK(cfg.cost().k_p == 0.0);
    CHECK(cfg.benchmark_c0.value() == 1200.0);

    const auto defaults = parse_config("");
    CHECK(defaults.cost().k_p == doctest::Approx(1.2));
    CHECK(defaults.transition_bins == 15);
    CHECK(defaults.stationary_parts == 50);
    CHECK(defaults.delay == 2);

    try {
        parse_config("r = 1e-5\nbogus = 3\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("r = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
    auto bad = parse_config("deltas = 0.1, 1.5\n");
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), IoError);
}

TEST_CASE("delta labels and seeds") {
    CHECK(delta_label(0.1) == "0.1");
    CHECK(delta_label(1.0) == "1");
    CHECK(derived_seed(1, 0) != derived_seed(1, 1));
    CHECK(derived_seed(1, 0) == derived_seed(1, 0));
}

TEST_CASE("estimate on a constant trace") {
    testutil::TempDir dir;
    auto cfg = small_config(dir);
    write_constant_trace(cfg.trace, 3000.0, 800);
    std::ostringstream log;
    const auto est = cmd_estimate(cfg, log);
    int occupied = 0;
    for (std::size_t i = 0; i < est.model.n_bins(); ++i) {
        std::uint64_t row = 0;
        for (std::size_t j = 0; j < est.model.n_bins(); ++j) row += est.model.counts[i * est.model.n_bins() + j];
        occupied += row > 0 ? 1 : 0;
    }
    CHECK(occupied == 1);
    CHECK(log.str().find("1/15") != std::string::npos);
}

TEST_CASE("estimate with a missing trace names the path") {
    testutil::TempDir dir;
    auto cfg = small_config(dir);
    std::ostringstream log;
    try {
        cmd_estimate(cfg, log);
        FAIL("expected an I/O error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find(cfg.trace.string()) != std::string::npos);
    }
}

TEST_CASE("artifact round trips") {
    testutil::TempDir dir;
    auto cfg = small_config(dir);
    std::ostringstream log;
    cmd_synth(cfg, log);
    const auto est = cmd_estimate(cfg, log);
    const OutputLayout layout{cfg.out};
    const auto model = load_transition_model(layout.model());
    CHECK(model.bin_edges == est.model.bin_edges);
    CHECK(model.trans == est.model.trans);
    CHECK(model.counts == est.model.counts);
    const auto stat = load_stationary(layout.stationary());
    CHECK(stat.weights == est.stat.weights);
    CHECK(stat.midpoints == est.stat.midpoints);

    const auto sized = cmd_size(cfg, log);
    REQUIRE(sized.size() == 1);
    const auto back = load_sizing(layout.sizing(0.1));
    CHECK(back.sizes.c0 == sized[0].sizes.c0);
    CHECK(back.sizes.cs_max == sized[0].sizes.cs_max);
    CHECK(back.sizes.qf_max == sized[0].sizes.qf_max);
    CHECK(back.l_star == sized[0].l_star);
    REQUIRE(back.table.size() == sized[0].table.size());
    for (std::size_t n = 0; n < back.table.size(); ++n) {
        CHECK(back.table[n].bounds.h1 == sized[0].table[n].bounds.h1);
        CHECK(back.table[n].control.cs_star == sized[0].table[n].control.cs_star);
    }
    CHECK_THROWS_AS(load_sizing(dir / "missing.json"), IoError);
    testutil::write_file(dir / "broken.json", "{ not json");
    CHECK_THROWS_AS(load_sizing(dir / "broken.json"), ParseError);
}

TEST_CASE("size is deterministic and one artifact per delta") {
    testutil::TempDir dir;
    auto cfg = small_config(dir);
    std::ostringstream log;
    cmd_synth(cfg, log);
    cmd_estimate(cfg, log);
    const OutputLayout layout{cfg.out};
    cmd_size(cfg, log);
    const auto first = testutil::read_file(layout.sizing(0.1));
    cmd_size(cfg, log);
    CHECK(testutil::read_file(layout.sizing(0.1)) == first);
    CHECK(log.str().find("objective=") != std::string::npos);
    int artifacts = 0;
    for (const auto& e : std::filesystem::directory_iterator(layout.root)) {
        if (e.path().filename().string().rfind("sizing_delta_", 0) == 0) ++artifacts;
    }
    CHECK(artifacts == 1);
}

TEST_CASE("size without an energy price pays only for devices") {
    testutil::TempDir dir;
    auto cfg = small_config(dir);
    cfg.prices.energy_per_mwh = 0.0;
    std::ostringstream log;
    cmd_synth(cfg, log);
    cmd_estimate(cfg, log);
    const auto res = cmd_size(cfg, log).front();
    CHECK(res.objective.total == res.objective.capital_cost);
    CHECK(res.objective.loss_cost == 0.0);

    // priced run for comparison: free energy should never buy larger devices overall
    auto priced = cfg;
    priced.prices.energy_per_mwh = 50.0;
    const auto p = cmd_size(priced, log).front();
    CostModel capital_only = cfg.cost();
    CHECK(capital_only.capital(res.sizes, cfg.circuit) <= capital_only.capital(p.sizes, cfg.circuit) + 1e-9);
}

TEST_CASE("simulate") {
    testutil::TempDir dir;
    auto cfg = small_config(dir);
    std::ostringstream log;

    SUBCASE("benchmark tag") {
        cmd_synth(cfg, log);
        const auto rep = cmd_simulate(cfg, SimulateMode::BenchmarkFixed, log);
        CHECK(rep.tag == "benchmark-fixed");
        CHECK(std::filesystem::exists(OutputLayout{cfg.out}.benchmark_dir("fixed") / "samples.csv"));
        CHECK(rep.undervoltage_fraction == 0.0);
    }
    SUBCASE("constant trace end to end") {
        write_constant_trace(cfg.trace, 3000.0, 2000);
        cmd_estimate(cfg, log);
        cmd_size(cfg, log);
        const auto rep = cmd_simulate(cfg, SimulateMode::Controlled, log);
        CHECK(rep.violation_fraction == 0.0);
        const auto csv = testutil::read_file(OutputLayout{cfg.out}.simulation_dir(0.1) / "samples.csv");
        CHECK(csv.rfind("tau,p,cs,qf,v,loss,stage,feasible\n", 0) == 0);
        CHECK(std::filesystem::exists(OutputLayout{cfg.out}.simulation_dir(0.1) / "report.json"));
    }
    SUBCASE("missing sizing artifact") {
        cmd_synth(cfg, log);
        CHECK_THROWS_AS(cmd_simulate(cfg, SimulateMode::Controlled, log), IoError);
    }
    SUBCASE("unwritable output directory is named") {
        cmd_synth(cfg, log);
        testutil::write_file(dir / "blocker", "x");
        cfg.out = dir / "blocker" / "out";
        try {
            cmd_simulate(cfg, SimulateMode::BenchmarkDstatcom, log);
            FAIL("expected an I/O error");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("blocker") != std::string::npos);
        }
    }
}

TEST_CASE("sweep") {
    testutil::TempDir dir;
    auto cfg = small_config(dir);
    std::ostringstream log;
    cmd_synth(cfg, log);
    cmd_estimate(cfg, log);

    SUBCASE("delta one drops the chance rows") {
        cfg.deltas = {1.0};
        const auto res = cmd_sweep(cfg, log);
        REQUIRE(res.rows.size() == 1);
        CHECK(res.rows[0].ok);
        CHECK(res.rows[0].chance_rows_dropped);
        const auto sizing = load_sizing(OutputLayout{cfg.out}.sizing(1.0));
        for (const auto& row : sizing.table) CHECK(!row.bounds.chance_active);
    }
    SUBCASE("one row per delta, reproducible") {
        cfg.deltas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
        const auto res = cmd_sweep(cfg, log);
        CHECK(res.rows.size() == 9);
        const auto path = OutputLayout{cfg.out}.sweep_summary();
        const auto text = testutil::read_file(path);
        CHECK(std::count(text.begin(), text.end(), '\n') == 10);
        cmd_sweep(cfg, log);
        CHECK(testutil::read_file(path) == text);
    }
    SUBCASE("per-delta failures are recorded in the row") {
        std::vector<SweepRow> rows(2);
        rows[0].delta = 0.1;
        rows[0].ok = true;
        rows[1].delta = 0.2;
        rows[1].error = "no feasible device sizes, somewhere";
        write_sweep_summary(dir / "s.csv", rows);
        const auto text = testutil::read_file(dir / "s.csv");
        CHECK(text.find("error: no feasible device sizes; somewhere") != std::string::npos);
    }
    SUBCASE("missing model artifacts") {
        cfg.out = dir / "elsewhere";
        CHECK_THROWS_AS(cmd_sweep(cfg, log), IoError);
    }
}
