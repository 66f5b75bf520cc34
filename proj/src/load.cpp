#include "voltsize/load.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "voltsize/errors.hpp"

namespace voltsize {

namespace {

constexpr double kMassTol = 1e-12;

std::size_t equal_width_bin(double p, double lo, double hi, std::size_t n) {
    if (!(p > lo)) return 0;
    const double w = (hi - lo) / static_cast<double>(n);
    const auto idx = static_cast<std::size_t>(std::floor((p - lo) / w));
    return std::min(idx, n - 1);
}

std::vector<double> equal_width_edges(double lo, double hi, std::size_t n) {
    std::vector<double> edges(n + 1);
    for (std::size_t k = 0; k <= n; ++k) edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n);
    edges.back() = hi;
    return edges;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    text = trim(text);
    if (text.empty()) return false;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end && (!std::is_floating_point_v<T> || std::isfinite(static_cast<double>(out)));
}

}  // namespace

double LoadTrace::mean() const {
    if (power.empty()) return 0.0;
    return std::accumulate(power.begin(), power.end(), 0.0) / static_cast<double>(power.size());
}

LoadTrace LoadTrace::slice(std::size_t begin, std::size_t end) const {
    end = std::min(end, power.size());
    begin = std::min(begin, end);
    LoadTrace out;
    out.power.assign(power.begin() + static_cast<std::ptrdiff_t>(begin), power.begin() + static_cast<std::ptrdiff_t>(end));
    out.first_tau = first_tau + static_cast<std::int64_t>(begin);
    out.dt = dt;
    out.p_lo = p_lo;
    out.p_hi = p_hi;
    return out;
}

std::size_t TransitionModel::bin_of(double p) const { return equal_width_bin(p, p_lo(), p_hi(), n_bins()); }

LoadTrace ingest_trace(const std::filesystem::path& path, double dt, double p_lo, double p_hi) {
    if (!(p_lo <= p_hi)) throw ConfigError("trace bounds require p_lo <= p_hi");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file '" + path.string() + "'");

    LoadTrace trace;
    trace.dt = dt;
    trace.p_lo = p_lo;
    trace.p_hi = p_hi;

    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (header) {
            header = false;
            continue;
        }
        if (trim(line).empty()) continue;
        const auto comma = line.find(',');
        std::int64_t tau = 0;
        double p = 0.0;
        const std::string_view view(line);
        if (comma == std::string::npos || !parse_number(view.substr(0, comma), tau) ||
            !parse_number(view.substr(comma + 1), p)) {
            std::ostringstream msg;
            msg << path.string() << ":" << line_no << ": malformed row '" << line << "' (expected index,power_kw)";
            throw ParseError(msg.str());
        }
        if (trace.power.empty()) {
            trace.first_tau = tau;
        } else if (tau != trace.first_tau + static_cast<std::int64_t>(trace.power.size())) {
            std::ostringstream msg;
            msg << path.string() << ":" << line_no << ": sample index " << tau << " is not contiguous";
            throw ParseError(msg.str());
        }
        if (p < p_lo || p > p_hi) {
            p = std::clamp(p, p_lo, p_hi);
            ++trace.clipped;
        }
        trace.power.push_back(p);
    }
    if (trace.power.empty()) throw EmptyTrace("trace file '" + path.string() + "' contains no samples");
    return trace;
}

void write_trace(const std::filesystem::path& path, const LoadTrace& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace file '" + path.string() + "'");
    out << "index,power_kw\n";
    out.precision(17);
    for (std::size_t k = 0; k < trace.power.size(); ++k) {
        out << trace.first_tau + static_cast<std::int64_t>(k) << ',' << trace.power[k] << '\n';
    }
    if (!out) throw IoError("failed writing trace file '" + path.string() + "'");
}

StageSequence segment_stages(const LoadTrace& trace, double p_th) {
    if (!(p_th > 0.0)) throw std::invalid_argument("stage threshold must be positive");
    if (trace.empty()) throw EmptyTrace("cannot segment an empty trace");

    StageSequence seq;
    Stage current{0, 0, 1, trace.power.front()};
    for (std::size_t tau = 1; tau < trace.power.size(); ++tau) {
        const double p = trace.power[tau];
        if (std::abs(p - current.p_avg) > p_th) {
            seq.stages.push_back(current);
            current = Stage{current.index + 1, tau, 1, p};
        } else {
            current.p_avg = (current.p_avg * static_cast<double>(current.duration) + p) /
                            static_cast<double>(current.duration + 1);
            ++current.duration;
        }
    }
    seq.stages.push_back(current);
    return seq;
}

TransitionModel estimate_transition_model(const StageSequence& stages, double p_lo, double p_hi,
                                          std::size_t n_bins) {
    if (stages.size() < 2) throw InsufficientData("transition model needs at least two stages");
    if (n_bins < 2) throw std::invalid_argument("transition model needs at least two bins");
    if (!(p_lo < p_hi)) throw ConfigError("transition model requires p_lo < p_hi");

    TransitionModel model;
    model.bin_edges = equal_width_edges(p_lo, p_hi, n_bins);
    model.counts.assign(n_bins * n_bins, 0);
    for (std::size_t t = 0; t + 1 < stages.size(); ++t) {
        const auto from = model.bin_of(stages.stages[t].p_avg);
        const auto to = model.bin_of(stages.stages[t + 1].p_avg);
        ++model.counts[from * n_bins + to];
    }

    std::vector<double> marginal(n_bins, 0.0);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n_bins; ++i) {
        for (std::size_t j = 0; j < n_bins; ++j) {
            marginal[j] += static_cast<double>(model.counts[i * n_bins + j]);
            total += model.counts[i * n_bins + j];
        }
    }
    for (auto& m : marginal) m /= static_cast<double>(total);

    model.trans.assign(n_bins * n_bins, 0.0);
    for (std::size_t i = 0; i < n_bins; ++i) {
        std::uint64_t row_total = 0;
        for (std::size_t j = 0; j < n_bins; ++j) row_total += model.counts[i * n_bins + j];
        for (std::size_t j = 0; j < n_bins; ++j) {
            model.trans[i * n_bins + j] =
                row_total == 0 ? marginal[j]
                               : static_cast<double>(model.counts[i * n_bins + j]) / static_cast<double>(row_total);
        }
    }
    return model;
}

double lower_quantile(std::span<const double> edges, std::span<const double> mass, double delta) {
    double cum = 0.0;
    for (std::size_t j = 0; j < mass.size(); ++j) {
        const double m = mass[j];
        if (cum + m <= delta + kMassTol) {
            cum += m;
            continue;
        }
        const double frac = std::clamp((delta - cum) / m, 0.0, 1.0);
        return edges[j] + frac * (edges[j + 1] - edges[j]);
    }
    return edges.back();
}

double upper_quantile(std::span<const double> edges, std::span<const double> mass, double delta) {
    double tail = 0.0;
    for (std::size_t j = mass.size(); j-- > 0;) {
        const double m = mass[j];
        if (tail + m <= delta + kMassTol) {
            tail += m;
            continue;
        }
        const double frac = std::clamp((delta - tail) / m, 0.0, 1.0);
        return edges[j + 1] - frac * (edges[j + 1] - edges[j]);
    }
    return edges.front();
}

double quantile_h1(const TransitionModel& model, double p, double delta) {
    return lower_quantile(model.bin_edges, model.row_for(p), delta);
}

double quantile_h2(const TransitionModel& model, double p, double delta) {
    return upper_quantile(model.bin_edges, model.row_for(p), delta);
}

StationaryDistribution estimate_stationary(const LoadTrace& trace, std::size_t n_parts) {
    if (n_parts < 1) throw std::invalid_argument("stationary partition needs at least one part");
    if (trace.empty()) throw EmptyTrace("cannot estimate a stationary distribution from an empty trace");
    if (!(trace.p_lo < trace.p_hi)) throw ConfigError("stationary partition requires p_lo < p_hi");

    StationaryDistribution stat;
    stat.edges = equal_width_edges(trace.p_lo, trace.p_hi, n_parts);
    std::vector<std::size_t> counts(n_parts, 0);
    for (double p : trace.power) ++counts[equal_width_bin(p, trace.p_lo, trace.p_hi, n_parts)];
    stat.weights.resize(n_parts);
    stat.midpoints.resize(n_parts);
    const auto n = static_cast<double>(trace.size());
    for (std::size_t k = 0; k < n_parts; ++k) {
        stat.weights[k] = static_cast<double>(counts[k]) / n;
        stat.midpoints[k] = 0.5 * (stat.edges[k] + stat.edges[k + 1]);
    }
    return stat;
}

SyntheticConfig SyntheticConfig::hpc_default() {
    SyntheticConfig cfg;
    cfg.state_power = {2300.0, 2700.0, 3100.0, 3500.0};
    // clang-format off
    cfg.state_trans = {
        0.0, 0.5, 0.3, 0.2,
        0.4, 0.0, 0.4, 0.2,
        0.2, 0.4, 0.0, 0.4,
        0.2, 0.3, 0.5, 0.0,
    };
    // clang-format on
    return cfg;
}

GeneratedTrace generate_synthetic_trace(const SyntheticConfig& cfg, std::uint64_t seed) {
    const std::size_t n_states = cfg.state_power.size();
    if (!(cfg.p_lo <= cfg.p_hi)) throw ConfigError("synthetic trace requires p_lo <= p_hi");
    if (n_states == 0) throw ConfigError("synthetic chain needs at least one state");
    if (cfg.state_trans.size() != n_states * n_states) {
        throw ConfigError("synthetic chain transition matrix must be " + std::to_string(n_states) + "x" +
                          std::to_string(n_states));
    }
    if (cfg.initial_state >= n_states) throw ConfigError("synthetic chain initial state out of range");
    if (!(cfg.mean_stage_duration >= 1.0)) throw ConfigError("mean stage duration must be at least one sample");
    if (!(cfg.noise >= 0.0)) throw ConfigError("noise scale must be nonnegative");
    for (double p : cfg.state_power) {
        if (p < cfg.p_lo || p > cfg.p_hi) throw ConfigError("synthetic state power outside [p_lo, p_hi]");
    }
    for (std::size_t i = 0; i < n_states; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_states; ++j) {
            const double v = cfg.state_trans[i * n_states + j];
            if (v < 0.0) throw ConfigError("synthetic chain has a negative transition probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("synthetic chain rows must sum to one");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::geometric_distribution<std::size_t> extra(1.0 / cfg.mean_stage_duration);

    GeneratedTrace out;
    out.trace.dt = cfg.dt;
    out.trace.p_lo = cfg.p_lo;
    out.trace.p_hi = cfg.p_hi;
    out.trace.power.reserve(cfg.n_samples);

    std::size_t state = cfg.initial_state;
    while (out.trace.power.size() < cfg.n_samples) {
        out.stage_starts.push_back(out.trace.power.size());
        const std::size_t duration = 1 + extra(rng);
        for (std::size_t k = 0; k < duration && out.trace.power.size() < cfg.n_samples; ++k) {
            const double noise = cfg.noise * (2.0 * unit(rng) - 1.0);
            out.trace.power.push_back(std::clamp(cfg.state_power[state] + noise, cfg.p_lo, cfg.p_hi));
        }
        const double u = unit(rng);
        double cum = 0.0;
        std::size_t next = n_states - 1;
        for (std::size_t j = 0; j < n_states; ++j) {
            cum += cfg.state_trans[state * n_states + j];
            if (u < cum) {
                next = j;
                break;
            }
        }
        state = next;
    }
    return out;
}

}  // namespace voltsize
