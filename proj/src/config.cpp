#include "voltsize/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "voltsize/errors.hpp"

namespace voltsize {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw std::invalid_argument("not a number: '" + v + "'");
    return out;
}

template <typename Int>
Int to_int(const std::string& v) {
    Int out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument("not an integer: '" + v + "'");
    return out;
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

}  // namespace

CostModel RunConfig::cost() const {
    return CostModel::from_prices(prices.energy_per_mwh, prices.capacitor_per_mvar, prices.dstatcom_per_mvar,
                                  prices.lifetime_years);
}

RealtimeConfig RunConfig::realtime(double delta) const { return RealtimeConfig{delay, p_th, p_est, delta}; }

void RunConfig::validate() const {
    try {
        circuit.validate(p_lo);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(p_lo < p_hi)) throw ConfigError("p_lo must be smaller than p_hi");
    if (k_levels < 1) throw ConfigError("k_levels must be at least 1");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("train_fraction must lie in (0, 1]");
    if (!(p_th > 0.0)) throw ConfigError("p_th must be positive");
    if (transition_bins < 2) throw ConfigError("transition_bins must be at least 2");
    if (stationary_parts < 1) throw ConfigError("stationary_parts must be at least 1");
    if (deltas.empty()) throw ConfigError("at least one delta is required");
    for (double d : deltas) {
        if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("delta values must lie in [0, 1]");
    }
    sa.validate();
    realtime(deltas.front()).validate();
    if (prices.energy_per_mwh < 0 || prices.capacitor_per_mvar < 0 || prices.dstatcom_per_mvar < 0) {
        throw ConfigError("prices must be nonnegative");
    }
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    auto path_of = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };

    const std::map<std::string, std::function<void(const std::string&)>> setters{
        {"r", [&](const std::string& v) { cfg.circuit.r = to_double(v); }},
        {"x", [&](const std::string& v) { cfg.circuit.x = to_double(v); }},
        {"f0", [&](const std::string& v) { cfg.circuit.f0 = to_double(v); }},
        {"v0", [&](const std::string& v) { cfg.circuit.v0 = to_double(v); }},
        {"phi", [&](const std::string& v) { cfg.circuit.phi = to_double(v); }},
        {"epsilon", [&](const std::string& v) { cfg.circuit.epsilon = to_double(v); }},
        {"k_levels", [&](const std::string& v) { cfg.k_levels = to_int<int>(v); }},
        {"energy_price_per_mwh", [&](const std::string& v) { cfg.prices.energy_per_mwh = to_double(v); }},
        {"capacitor_price_per_mvar", [&](const std::string& v) { cfg.prices.capacitor_per_mvar = to_double(v); }},
        {"dstatcom_price_per_mvar", [&](const std::string& v) { cfg.prices.dstatcom_per_mvar = to_double(v); }},
        {"lifetime_years", [&](const std::string& v) { cfg.prices.lifetime_years = to_double(v); }},
        {"p_lo", [&](const std::string& v) { cfg.p_lo = to_double(v); }},
        {"p_hi", [&](const std::string& v) { cfg.p_hi = to_double(v); }},
        {"dt", [&](const std::string& v) { cfg.dt = to_double(v); }},
        {"trace", [&](const std::string& v) { cfg.trace = path_of(v); }},
        {"train_fraction", [&](const std::string& v) { cfg.train_fraction = to_double(v); }},
        {"p_th", [&](const std::string& v) { cfg.p_th = to_double(v); }},
        {"transition_bins", [&](const std::string& v) { cfg.transition_bins = to_int<std::size_t>(v); }},
        {"stationary_parts", [&](const std::string& v) { cfg.stationary_parts = to_int<std::size_t>(v); }},
        {"synth_samples", [&](const std::string& v) { cfg.synth.n_samples = to_int<std::size_t>(v); }},
        {"synth_mean_duration", [&](const std::string& v) { cfg.synth.mean_stage_duration = to_double(v); }},
        {"synth_noise", [&](const std::string& v) { cfg.synth.noise = to_double(v); }},
        {"synth_states", [&](const std::string& v) { cfg.synth.state_power = to_list(v); }},
        {"synth_transitions", [&](const std::string& v) { cfg.synth.state_trans = to_list(v); }},
        {"synth_initial_state", [&](const std::string& v) { cfg.synth.initial_state = to_int<std::size_t>(v); }},
        {"sa_initial_temperature", [&](const std::string& v) { cfg.sa.initial_temperature = to_double(v); }},
        {"sa_cooling", [&](const std::string& v) { cfg.sa.cooling = to_double(v); }},
        {"sa_steps_per_temperature", [&](const std::string& v) { cfg.sa.steps_per_temperature = to_int<int>(v); }},
        {"sa_max_iterations", [&](const std::string& v) { cfg.sa.max_iterations = to_int<int>(v); }},
        {"sa_restarts", [&](const std::string& v) { cfg.sa.restarts = to_int<int>(v); }},
        {"sa_step",
         [&](const std::string& v) {
             if (v == "auto") {
                 cfg.sa.auto_step = true;
                 return;
             }
             const auto s = to_list(v);
             if (s.size() != 3) throw std::invalid_argument("sa_step needs three values or 'auto'");
             cfg.sa.step = {s[0], s[1], s[2]};
             cfg.sa.auto_step = false;
         }},
        {"outer_max", [&](const std::string& v) { cfg.termination.max_outer = to_int<int>(v); }},
        {"outer_l_tol", [&](const std::string& v) { cfg.termination.l_tilde_rel = to_double(v); }},
        {"outer_size_tol", [&](const std::string& v) { cfg.termination.size_rel = to_double(v); }},
        {"delay", [&](const std::string& v) { cfg.delay = to_int<std::size_t>(v); }},
        {"p_est", [&](const std::string& v) { cfg.p_est = to_double(v); }},
        {"delta", [&](const std::string& v) { cfg.deltas = {to_double(v)}; }},
        {"deltas", [&](const std::string& v) { cfg.deltas = to_list(v); }},
        {"out", [&](const std::string& v) { cfg.out = path_of(v); }},
        {"seed", [&](const std::string& v) { cfg.seed = to_int<std::uint64_t>(v); }},
        {"benchmark_c0",
         [&](const std::string& v) {
             if (v == "auto") {
                 cfg.benchmark_c0.reset();
             } else {
                 cfg.benchmark_c0 = to_double(v);
             }
         }},
    };

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        try {
            it->second(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config line " + std::to_string(line_no) + " (" + key + "): " + e.what());
        } catch (const std::out_of_range& e) {
            throw ConfigError("config line " + std::to_string(line_no) + " (" + key + "): value out of range");
        }
    }
    cfg.synth.p_lo = cfg.p_lo;
    cfg.synth.p_hi = cfg.p_hi;
    cfg.synth.dt = cfg.dt;
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

std::vector<double> default_delta_sweep() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}; }

}  // namespace voltsize
