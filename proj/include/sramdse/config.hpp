#pragma once

// Line-oriented configuration: `dotted.key = value`, `#` starts a comment.
// Lists are comma separated. Units are carried in the key names.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sramdse/analysis.hpp"
#include "sramdse/energy.hpp"
#include "sramdse/memory.hpp"
#include "sramdse/workload.hpp"

namespace sramdse {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HardwareConfig {
    FabricSpec fabric;
    count_t local_buffer_bytes = 64 * 1024;
    count_t global_buffer_bytes = 40 * 1024 * 1024;
    MemorySpec memory;
    ClockSpec clock;
    EnergyModel energy;

    [[nodiscard]] BufferSpec local_buffer() const { return {BufferLevel::Local, local_buffer_bytes}; }
    [[nodiscard]] BufferSpec global_buffer() const { return {BufferLevel::Global, global_buffer_bytes}; }
    [[nodiscard]] ChipSizes chip() const {
        return {fabric.total_arrays(), fabric.cores, double(local_buffer_bytes),
                double(global_buffer_bytes)};
    }
};

enum class DecodeMode { Step, Mean };

struct WorkloadConfig {
    ModelSpec model;
    InferenceRequest request;
    DecodeMode decode_mode = DecodeMode::Step;
    count_t decode_step = 0;
};

struct SweepSpec {
    std::vector<count_t> s_values = {16 * 1024,  32 * 1024,  64 * 1024,  128 * 1024,
                                     256 * 1024, 512 * 1024, 1024 * 1024};
    std::vector<double> f_values = {200e6, 400e6, 600e6, 800e6, 1000e6, 1200e6, 1400e6};
    std::vector<double> bw_values = {2048e9, 4096e9, 8192e9};
    std::vector<Phase> phases = {Phase::Prefill, Phase::DecodeStep};

    void validate() const {
        auto increasing = [](const auto& v) {
            return std::adjacent_find(v.begin(), v.end(), [](auto a, auto b) { return !(a < b); }) ==
                   v.end();
        };
        if (s_values.empty() || f_values.empty() || bw_values.empty())
            throw config_error("sweep: axes must be non-empty");
        if (!increasing(s_values) || !increasing(f_values) || !increasing(bw_values))
            throw config_error("sweep: axes must be strictly increasing");
    }

    /// Sorts the axes and drops duplicates.
    void canonicalize() {
        auto canon = [](auto& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        canon(s_values);
        canon(f_values);
        canon(bw_values);
        std::sort(phases.begin(), phases.end());
        phases.erase(std::unique(phases.begin(), phases.end()), phases.end());
    }
};

/// Where the argmin of one grid should land, and how many grid steps per
/// axis of displacement still count as a hit.
struct CalibrationTarget {
    Phase phase = Phase::DecodeStep;
    Metric metric = Metric::EDP;
    double bandwidth = 2048e9;
    count_t s = 32 * 1024;
    double f = 600e6;
    count_t tolerance = 0;
};

struct Config {
    HardwareConfig hw;
    WorkloadConfig workload;
    SweepSpec sweep;
    std::vector<CalibrationTarget> targets = {
        {Phase::DecodeStep, Metric::EDP, 2048e9, 32 * 1024, 600e6, 0},
        {Phase::DecodeStep, Metric::EDP, 8192e9, 128 * 1024, 1000e6, 1},
    };

    void validate() const {
        workload.model.validate();
        workload.request.validate();
        hw.fabric.validate();
        hw.local_buffer().validate();
        hw.global_buffer().validate();
        hw.memory.validate();
        hw.clock.validate();
        hw.energy.validate();
        sweep.validate();
        if (workload.decode_mode == DecodeMode::Step &&
            workload.decode_step >= workload.request.gen_tokens)
            throw config_error("workload.decode_step must be < workload.gen_tokens");
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& v) {
    double x = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc{} || p != end || !std::isfinite(x)) throw config_error("not a number: '" + v + "'");
    return x;
}

inline count_t parse_count(const std::string& v) {
    count_t x = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc{} || p != end) throw config_error("not a non-negative integer: '" + v + "'");
    return x;
}

inline Phase parse_phase(const std::string& v) {
    if (v == "prefill") return Phase::Prefill;
    if (v == "decode") return Phase::DecodeStep;
    throw config_error("unknown phase '" + v + "' (expected prefill or decode)");
}

using Setter = std::function<void(Config&, const std::string&)>;

inline const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> t;
        auto count = [](count_t& (*field)(Config&), count_t scale = 1) {
            return [field, scale](Config& c, const std::string& v) { field(c) = parse_count(v) * scale; };
        };
        auto real = [](double& (*field)(Config&), double scale = 1.0) {
            return [field, scale](Config& c, const std::string& v) { field(c) = parse_double(v) * scale; };
        };

        t["hw.cores"] = count([](Config& c) -> count_t& { return c.hw.fabric.cores; });
        t["hw.arrays_per_core"] = count([](Config& c) -> count_t& { return c.hw.fabric.arrays_per_core; });
        t["hw.array_rows"] = count([](Config& c) -> count_t& { return c.hw.fabric.array.rows; });
        t["hw.array_cols"] = count([](Config& c) -> count_t& { return c.hw.fabric.array.cols; });
        t["hw.local_buffer_kb"] = count([](Config& c) -> count_t& { return c.hw.local_buffer_bytes; }, 1024);
        t["hw.global_buffer_mb"] =
            count([](Config& c) -> count_t& { return c.hw.global_buffer_bytes; }, 1024 * 1024);
        t["hw.frequency_mhz"] = real([](Config& c) -> double& { return c.hw.clock.frequency; }, 1e6);
        t["hw.ext_bandwidth_gbps"] = real([](Config& c) -> double& { return c.hw.memory.ext_bandwidth; }, 1e9);
        t["hw.onchip_bandwidth_gbps"] =
            real([](Config& c) -> double& { return c.hw.memory.onchip_bandwidth; }, 1e9);

        t["energy.sram_leakage_w_per_byte"] =
            real([](Config& c) -> double& { return c.hw.energy.sram.leakage_per_byte; });
        t["energy.sram_access_energy_j"] =
            real([](Config& c) -> double& { return c.hw.energy.sram.access_energy_ref; });
        t["energy.sram_ref_size_kb"] = real([](Config& c) -> double& { return c.hw.energy.sram.ref_size; }, 1024);
        t["energy.sram_access_exponent"] =
            real([](Config& c) -> double& { return c.hw.energy.sram.access_exponent; });
        t["energy.array_leakage_w"] = real([](Config& c) -> double& { return c.hw.energy.array.leakage_w; });
        t["energy.array_dynamic_w"] = real([](Config& c) -> double& { return c.hw.energy.array.dynamic_w_ref; });
        t["energy.array_ref_frequency_mhz"] =
            real([](Config& c) -> double& { return c.hw.energy.array.ref_frequency; }, 1e6);
        t["energy.gating_prefill"] = real([](Config& c) -> double& { return c.hw.energy.gating.prefill_saving; });
        t["energy.gating_decode"] = real([](Config& c) -> double& { return c.hw.energy.gating.decode_saving; });

        t["model.d_model"] = count([](Config& c) -> count_t& { return c.workload.model.d_model; });
        t["model.n_heads"] = count([](Config& c) -> count_t& { return c.workload.model.n_heads; });
        t["model.head_dim"] = count([](Config& c) -> count_t& { return c.workload.model.head_dim; });
        t["model.mlp_ratio"] = count([](Config& c) -> count_t& { return c.workload.model.mlp_ratio; });
        t["model.bytes_per_element"] =
            count([](Config& c) -> count_t& { return c.workload.model.bytes_per_element; });
        t["model.n_layers"] = count([](Config& c) -> count_t& { return c.workload.model.n_layers; });

        t["workload.batch"] = count([](Config& c) -> count_t& { return c.workload.request.batch; });
        t["workload.prompt_len"] = count([](Config& c) -> count_t& { return c.workload.request.prompt_len; });
        t["workload.gen_tokens"] = count([](Config& c) -> count_t& { return c.workload.request.gen_tokens; });
        t["workload.decode_step"] = count([](Config& c) -> count_t& { return c.workload.decode_step; });
        t["workload.decode_mode"] = [](Config& c, const std::string& v) {
            if (v == "step") c.workload.decode_mode = DecodeMode::Step;
            else if (v == "mean") c.workload.decode_mode = DecodeMode::Mean;
            else throw config_error("unknown decode mode '" + v + "' (expected step or mean)");
        };

        t["sweep.s_kb"] = [](Config& c, const std::string& v) {
            c.sweep.s_values.clear();
            for (const auto& x : split(v, ',')) c.sweep.s_values.push_back(parse_count(x) * 1024);
        };
        t["sweep.f_mhz"] = [](Config& c, const std::string& v) {
            c.sweep.f_values.clear();
            for (const auto& x : split(v, ',')) c.sweep.f_values.push_back(parse_double(x) * 1e6);
        };
        t["sweep.bw_gbps"] = [](Config& c, const std::string& v) {
            c.sweep.bw_values.clear();
            for (const auto& x : split(v, ',')) c.sweep.bw_values.push_back(parse_double(x) * 1e9);
        };
        t["sweep.phases"] = [](Config& c, const std::string& v) {
            c.sweep.phases.clear();
            if (v.empty()) return;
            for (const auto& x : split(v, ',')) c.sweep.phases.push_back(parse_phase(x));
        };

        // phase:metric:bw_gbps:s_kb:f_mhz:tolerance, comma separated
        t["calibrate.targets"] = [](Config& c, const std::string& v) {
            c.targets.clear();
            if (v.empty()) return;
            for (const auto& item : split(v, ',')) {
                const auto f = split(item, ':');
                if (f.size() != 6)
                    throw config_error("target '" + item + "' needs phase:metric:bw_gbps:s_kb:f_mhz:tolerance");
                CalibrationTarget tg;
                tg.phase = parse_phase(f[0]);
                const auto m = metric_from_string(f[1]);
                if (!m) throw config_error("unknown metric '" + f[1] + "'");
                tg.metric = *m;
                tg.bandwidth = parse_double(f[2]) * 1e9;
                tg.s = parse_count(f[3]) * 1024;
                tg.f = parse_double(f[4]) * 1e6;
                tg.tolerance = parse_count(f[5]);
                c.targets.push_back(tg);
            }
        };
        return t;
    }();
    return table;
}

}  // namespace detail

/// Applies one `key=value` assignment. Unknown keys and bad values throw
/// config_error naming the key.
inline void apply_setting(Config& cfg, std::string_view key, const std::string& value) {
    const auto& table = detail::setters();
    const auto it = table.find(key);
    if (it == table.end()) throw config_error("unknown key '" + std::string(key) + "'");
    try {
        it->second(cfg, value);
    } catch (const config_error& e) {
        throw config_error("key '" + std::string(key) + "': " + e.what());
    }
}

inline void apply_override(Config& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw config_error("override '" + std::string(assignment) + "' is not key=value");
    apply_setting(cfg, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

/// Parses config text on top of `cfg`. `origin` names the source in errors.
inline void parse_config(Config& cfg, std::istream& in, const std::string& origin = "<config>") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const auto body = detail::trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(cfg, detail::trim(std::string_view(body).substr(0, eq)),
                          detail::trim(std::string_view(body).substr(eq + 1)));
        } catch (const config_error& e) {
            throw config_error(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

class config_file_error : public config_error {
public:
    using config_error::config_error;
};

inline void load_config_file(Config& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_file_error("cannot open config file '" + path + "'");
    parse_config(cfg, in, path);
}

inline Config parse_config_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    parse_config(c, in);
    return c;
}

/// Names of every accepted key, sorted.
inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : detail::setters()) keys.push_back(k);
    return keys;
}

}  // namespace sramdse
