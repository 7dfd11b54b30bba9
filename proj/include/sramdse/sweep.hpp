#pragma once

// Cartesian sweep over local buffer size, clock and external bandwidth for
// each phase. Work that does not depend on the clock or bandwidth (cycles,
// tiling, traffic) is computed once per (phase, S) and shared by all cells.

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sramdse/analysis.hpp"
#include "sramdse/config.hpp"
#include "sramdse/energy.hpp"
#include "sramdse/memory.hpp"
#include "sramdse/workload.hpp"

namespace sramdse {

struct DesignPoint {
    count_t s = 0;   ///< local buffer bytes
    double f = 0;    ///< Hz
    double bw = 0;   ///< external bytes/s
};

struct SweepRecord {
    DesignPoint point;
    Phase phase = Phase::Prefill;
    bool ok = false;
    std::string error;
    PhaseResult result;
    EnergyBreakdown energy;
    MetricPoint metrics;
    RooflinePoint roof;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRecord> records;  ///< phase, bandwidth, S, f order

    [[nodiscard]] std::size_t error_count() const {
        return std::size_t(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok; }));
    }

    [[nodiscard]] const SweepRecord* find(Phase phase, double bw, count_t s, double f) const {
        for (const auto& r : records)
            if (r.phase == phase && r.point.bw == bw && r.point.s == s && r.point.f == f) return &r;
        return nullptr;
    }

    [[nodiscard]] std::vector<const SweepRecord*> slice(Phase phase, double bw) const {
        std::vector<const SweepRecord*> out;
        for (const auto& r : records)
            if (r.phase == phase && r.point.bw == bw) out.push_back(&r);
        return out;
    }
};

/// Clock- and bandwidth-independent work of a phase at one buffer size. A
/// decode phase in mean mode holds one entry per generated token.
struct PhaseWorkload {
    Phase phase = Phase::Prefill;
    std::vector<PhaseWork> steps;
};

inline PhaseWorkload analyze_workload(const Config& cfg, Phase phase, count_t local_bytes) {
    const auto& wl = cfg.workload;
    HardwareConfig hw = cfg.hw;
    hw.local_buffer_bytes = local_bytes;
    const auto b = wl.model.bytes_per_element;
    PhaseWorkload out{phase, {}};
    if (phase == Phase::Prefill) {
        out.steps.push_back(analyze_phase(build_prefill_trace(wl.model, wl.request), hw.fabric,
                                          hw.local_buffer(), b));
    } else if (wl.decode_mode == DecodeMode::Step) {
        out.steps.push_back(analyze_phase(build_decode_trace(wl.model, wl.request, wl.decode_step),
                                          hw.fabric, hw.local_buffer(), b));
    } else {
        for (count_t step = 0; step < wl.request.gen_tokens; ++step)
            out.steps.push_back(analyze_phase(build_decode_trace(wl.model, wl.request, step), hw.fabric,
                                              hw.local_buffer(), b));
    }
    return out;
}

inline PhaseResult time_workload(const PhaseWorkload& w, const MemorySpec& mem, const ClockSpec& clock) {
    if (w.steps.size() == 1) return time_phase(w.steps.front(), mem, clock);
    DecodeAccumulator acc;
    for (const auto& s : w.steps) acc.add(time_phase(s, mem, clock));
    return acc.mean();
}

/// Fills result, energy, metrics (un-normalized) and roofline for one cell.
inline SweepRecord evaluate_cell(const Config& cfg, const PhaseWorkload& work, const DesignPoint& p) {
    SweepRecord rec;
    rec.point = p;
    rec.phase = work.phase;
    HardwareConfig hw = cfg.hw;
    hw.local_buffer_bytes = p.s;
    hw.clock.frequency = p.f;
    hw.memory.ext_bandwidth = p.bw;
    rec.result = time_workload(work, hw.memory, hw.clock);
    rec.energy = phase_energy(rec.result, hw.energy, hw.chip());
    rec.metrics = edp(rec.energy.total_j, rec.result.latency);
    rec.roof = roofline(rec.result, peak_flops(hw.fabric, p.f), p.bw);
    rec.ok = true;
    return rec;
}

/// Single design point from the hardware section of the config, evaluated
/// the same way a sweep cell is.
inline SweepRecord simulate_point(const Config& cfg, Phase phase) {
    cfg.validate();
    const DesignPoint p{cfg.hw.local_buffer_bytes, cfg.hw.clock.frequency, cfg.hw.memory.ext_bandwidth};
    try {
        auto r = evaluate_cell(cfg, analyze_workload(cfg, phase, p.s), p);
        r.metrics.edp_normalized = 1.0;
        return r;
    } catch (const model_error& e) {
        SweepRecord r;
        r.point = p;
        r.phase = phase;
        r.error = e.what();
        return r;
    }
}

/// Sets edp_normalized within each (phase, bandwidth) grid.
inline void normalize_edp(SweepResult& result) {
    std::map<std::pair<int, double>, double> lo;
    for (const auto& r : result.records) {
        if (!r.ok) continue;
        const auto key = std::make_pair(int(r.phase), r.point.bw);
        auto it = lo.find(key);
        if (it == lo.end() || r.metrics.edp < it->second) lo[key] = r.metrics.edp;
    }
    for (auto& r : result.records) {
        if (!r.ok) continue;
        const double m = lo.at({int(r.phase), r.point.bw});
        r.metrics.edp_normalized = m > 0 ? r.metrics.edp / m : 1.0;
    }
}

/// Evaluates every (phase, bw, S, f) cell. Output is independent of `jobs`.
/// A cell whose tiling is infeasible is recorded with ok=false.
inline SweepResult run_sweep(const Config& cfg, unsigned jobs = 1) {
    cfg.validate();
    SweepResult out;
    out.spec = cfg.sweep;
    const auto& sp = out.spec;

    struct Task {
        Phase phase;
        count_t s;
        std::optional<PhaseWorkload> work;
        std::string error;
    };
    std::vector<Task> tasks;
    for (auto phase : sp.phases)
        for (auto s : sp.s_values) tasks.push_back({phase, s, std::nullopt, {}});

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                tasks[i].work = analyze_workload(cfg, tasks[i].phase, tasks[i].s);
            } catch (const model_error& e) {
                tasks[i].error = e.what();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, unsigned(std::max<std::size_t>(1, tasks.size()))));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (auto phase : sp.phases)
        for (auto bw : sp.bw_values)
            for (auto s : sp.s_values) {
                const auto& task = *std::find_if(tasks.begin(), tasks.end(),
                                                 [&](const Task& t) { return t.phase == phase && t.s == s; });
                for (auto f : sp.f_values) {
                    const DesignPoint p{s, f, bw};
                    if (!task.work) {
                        SweepRecord r;
                        r.point = p;
                        r.phase = phase;
                        r.error = task.error;
                        out.records.push_back(std::move(r));
                        continue;
                    }
                    try {
                        out.records.push_back(evaluate_cell(cfg, *task.work, p));
                    } catch (const model_error& e) {
                        SweepRecord r;
                        r.point = p;
                        r.phase = phase;
                        r.error = e.what();
                        out.records.push_back(std::move(r));
                    }
                }
            }
    normalize_edp(out);
    return out;
}

inline double metric_value(const SweepRecord& r, Metric m) {
    switch (m) {
        case Metric::Latency: return r.result.latency;
        case Metric::TotalEnergy: return r.energy.total_j;
        case Metric::EDP: return r.metrics.edp;
        case Metric::Cycles: return r.result.total_cycles;
        case Metric::ComputeFraction: return r.result.compute_fraction;
        case Metric::DynamicPower: return r.energy.dynamic_power_w;
        case Metric::DynamicEnergy: return r.energy.dynamic_j;
        case Metric::StaticEnergy: return r.energy.static_j;
    }
    return 0.0;
}

/// Grid of one metric for one phase and bandwidth. Errored cells count as
/// missing and make this throw grid_error.
inline MetricGrid build_grid(Metric metric, const SweepResult& result, Phase phase, double bw) {
    std::vector<double> s_axis(result.spec.s_values.begin(), result.spec.s_values.end());
    std::map<std::pair<double, double>, double> cells;
    for (const auto* r : result.slice(phase, bw))
        if (r->ok) cells[{double(r->point.s), r->point.f}] = metric_value(*r, metric);
    return build_grid(metric, s_axis, result.spec.f_values, [&](double s, double f) -> std::optional<double> {
        auto it = cells.find({s, f});
        if (it == cells.end()) return std::nullopt;
        return it->second;
    });
}

}  // namespace sramdse
