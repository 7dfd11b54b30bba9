#pragma once

// Local/global buffer hierarchy: tile planning against the per-core local
// buffer, byte traffic at each level, and the double-buffered overlap of
// compute with memory that sets phase latency.

#include <algorithm>
#include <limits>
#include <string_view>
#include <tuple>
#include <vector>

#include "sramdse/dataflow.hpp"
#include "sramdse/workload.hpp"

namespace sramdse {

inline constexpr double kKiB = 1024.0;
inline constexpr double kMiB = 1024.0 * 1024.0;
inline constexpr double kGBps = 1e9;
inline constexpr double kMHz = 1e6;

enum class BufferLevel { Local, Global };

struct BufferSpec {
    BufferLevel level = BufferLevel::Local;
    count_t capacity = 64 * 1024;  ///< bytes

    void validate() const {
        if (capacity == 0) throw model_error("buffer: capacity must be positive");
    }
};

struct MemorySpec {
    double ext_bandwidth = 2048 * kGBps;      ///< bytes/s, global buffer <-> external memory
    double onchip_bandwidth = 16384 * kGBps;  ///< bytes/s, aggregate global <-> local

    void validate() const {
        if (!(ext_bandwidth > 0) || !(onchip_bandwidth > 0))
            throw model_error("memory: bandwidths must be positive");
    }
};

struct ClockSpec {
    double frequency = 1000 * kMHz;  ///< Hz

    void validate() const {
        if (!(frequency > 0)) throw model_error("clock: frequency must be positive");
    }
};

struct TilingPlan {
    count_t tile_m = 1;
    count_t tile_k = 1;
    count_t tile_n = 1;
    bool double_buffered = true;

    friend bool operator==(const TilingPlan&, const TilingPlan&) = default;
};

/// Elements resident in the local buffer for a plan: one weight tile plus
/// two input and two output tiles when double buffered.
constexpr count_t resident_elements(const TilingPlan& p) {
    const count_t bufs = p.double_buffered ? 2 : 1;
    return p.tile_k * p.tile_n + bufs * p.tile_m * p.tile_k + bufs * p.tile_m * p.tile_n;
}

/// Byte and access counts. Kept in double so per-token means over a decode
/// generation stay representable; all values are integral for a single trace.
struct TrafficReport {
    double dram_bytes = 0;
    double onchip_bytes = 0;
    double local_reads = 0;
    double local_writes = 0;
    double global_reads = 0;
    double global_writes = 0;

    TrafficReport& operator+=(const TrafficReport& o) {
        dram_bytes += o.dram_bytes;
        onchip_bytes += o.onchip_bytes;
        local_reads += o.local_reads;
        local_writes += o.local_writes;
        global_reads += o.global_reads;
        global_writes += o.global_writes;
        return *this;
    }
    TrafficReport& operator*=(double s) {
        dram_bytes *= s;
        onchip_bytes *= s;
        local_reads *= s;
        local_writes *= s;
        global_reads *= s;
        global_writes *= s;
        return *this;
    }
};

class tiling_error : public model_error {
public:
    using model_error::model_error;
};

namespace detail {

/// Powers of two clipped to `extent`, ascending, ending at `extent` itself.
inline std::vector<count_t> tile_candidates(count_t extent) {
    std::vector<count_t> c;
    for (count_t v = 1;; v *= 2) {
        c.push_back(std::min(v, extent));
        if (v >= extent) break;
    }
    return c;
}

// Element counts of the tile walk: for each N tile, for each K tile the
// weight tile is loaded once and every M tile streams past it; partial sums
// of K tiles after the first are reloaded and written back.
struct WalkCounts {
    count_t weight = 0, input = 0, psum_fill = 0, output_drain = 0;

    [[nodiscard]] count_t onchip() const { return weight + input + psum_fill + output_drain; }
};

constexpr WalkCounts walk_counts(const MatmulDims& m, const TilingPlan& p) {
    const count_t nN = ceil_div(m.N, p.tile_n), nK = ceil_div(m.K, p.tile_k);
    WalkCounts w;
    w.weight = m.K * m.N;
    w.input = m.M * m.K * nN;
    w.psum_fill = m.M * m.N * (nK - 1);
    w.output_drain = m.M * m.N * nK;
    return w;
}

}  // namespace detail

/// Picks the feasible power-of-two tile shape with the least global<->local
/// traffic; ties go to less input refetch, then the larger weight tile, then
/// larger tile_m and tile_n.
inline TilingPlan plan_tiling(const MatmulDims& m, const BufferSpec& local,
                              count_t bytes_per_element) {
    m.validate();
    local.validate();
    const count_t budget = local.capacity / bytes_per_element;
    const auto ms = detail::tile_candidates(m.M);
    const auto ks = detail::tile_candidates(m.K);
    const auto ns = detail::tile_candidates(m.N);

    bool found = false;
    TilingPlan best;
    // Lexicographic key, smaller is better.
    auto key_of = [&](const TilingPlan& p) {
        const auto w = detail::walk_counts(m, p);
        return std::make_tuple(w.onchip(), w.input, std::numeric_limits<count_t>::max() - p.tile_k * p.tile_n,
                               std::numeric_limits<count_t>::max() - p.tile_m,
                               std::numeric_limits<count_t>::max() - p.tile_n);
    };
    decltype(key_of(best)) best_key{};

    for (count_t tk : ks) {
        for (count_t tn : ns) {
            // Traffic does not depend on tile_m, so only the largest feasible one matters.
            for (auto it = ms.rbegin(); it != ms.rend(); ++it) {
                TilingPlan p{*it, tk, tn, true};
                if (resident_elements(p) > budget) continue;
                const auto k = key_of(p);
                if (!found || k < best_key) {
                    best = p;
                    best_key = k;
                    found = true;
                }
                break;
            }
        }
    }
    if (!found)
        throw tiling_error("local buffer of " + std::to_string(local.capacity) +
                           " bytes cannot hold a double-buffered 1x1x1 tile set");
    return best;
}

/// Traffic of one matmul under `plan`. DRAM sees weights once, inputs once
/// per N tile and the final outputs; the on-chip link additionally carries
/// partial-sum spills. Local counts add the arrays' operand accesses.
inline TrafficReport traffic(const MatmulDims& m, const TilingPlan& plan,
                             count_t bytes_per_element, const ArraySpec& array = {}) {
    const auto w = detail::walk_counts(m, plan);
    const auto ops = matmul_accesses(m, array);
    const double b = double(bytes_per_element);
    TrafficReport t;
    t.dram_bytes = double(w.weight + w.input + m.M * m.N) * b;
    t.onchip_bytes = double(w.onchip()) * b;
    t.local_reads = double(ops.local_reads() + w.output_drain);
    t.local_writes = double(ops.local_writes() + w.weight + w.input + w.psum_fill);
    t.global_reads = double(w.weight + w.input + w.psum_fill + m.M * m.N);
    t.global_writes = double(w.output_drain + w.weight + w.input);
    return t;
}

// ---------------------------------------------------------------------------
// Phase timing

enum class Bound { Compute, Memory };

constexpr std::string_view to_string(Bound b) { return b == Bound::Compute ? "compute" : "memory"; }

/// Frequency-independent part of a phase: cycles, work and traffic.
struct PhaseWork {
    Phase phase = Phase::Prefill;
    double compute_cycles = 0;
    double flops = 0;
    double macs = 0;
    double array_cycles = 0;  ///< compute_cycles x total arrays, for utilization
    count_t pes_per_array = 1;
    TrafficReport traffic;

    [[nodiscard]] double utilization() const {
        return array_cycles > 0 ? macs / (array_cycles * double(pes_per_array)) : 0.0;
    }

    PhaseWork& operator+=(const PhaseWork& o) {
        compute_cycles += o.compute_cycles;
        flops += o.flops;
        macs += o.macs;
        array_cycles += o.array_cycles;
        traffic += o.traffic;
        return *this;
    }
};

struct PhaseResult {
    Phase phase = Phase::Prefill;
    double compute_cycles = 0;
    double compute_time = 0;  ///< s
    double memory_time = 0;   ///< s
    double dram_time = 0;     ///< s
    double onchip_time = 0;   ///< s
    double latency = 0;       ///< s
    double total_cycles = 0;  ///< latency x frequency
    double compute_fraction = 0;
    double utilization = 0;
    double flops = 0;
    double frequency = 0;
    Bound bound = Bound::Compute;
    TrafficReport traffic;
};

/// Spreads `repeat` instances over the cores. When there are fewer instances
/// than cores each instance's N dimension is split across the spare cores;
/// every core tiles its share against its own local buffer. The cores of one
/// instance walk their tiles in lockstep, so each input tile is fetched from
/// DRAM once and broadcast over the on-chip link to all of them.
inline TrafficReport partitioned_traffic(const MatmulDims& m, count_t repeat,
                                         const FabricSpec& fabric, const BufferSpec& local,
                                         count_t bytes_per_element) {
    const count_t slots = std::max<count_t>(1, fabric.cores / repeat);
    const count_t split = std::min(slots, ceil_div(m.N, fabric.array.cols));
    MatmulDims share = m;
    share.N = ceil_div(m.N, split);
    const auto plan = plan_tiling(share, local, bytes_per_element);
    const auto per_core = detail::walk_counts(share, plan);
    const double b = double(bytes_per_element);
    const double cores = double(split);
    const double reps = double(repeat);

    const auto ops = matmul_accesses(m, fabric.array);
    TrafficReport t;
    const double input_dram = double(m.M * m.K * ceil_div(share.N, plan.tile_n));
    t.dram_bytes = reps * (double(m.K * m.N) + input_dram + double(m.M * m.N)) * b;
    const double own = reps * cores * double(per_core.weight + per_core.psum_fill);
    const double broadcast = reps * double(per_core.input);
    const double drains = reps * cores * double(per_core.output_drain);
    t.onchip_bytes = (own + broadcast + drains) * b;
    t.local_reads = reps * double(ops.local_reads()) + drains;
    t.local_writes = reps * double(ops.local_writes()) + own + cores * broadcast;
    t.global_reads = own + broadcast + reps * double(m.M * m.N);
    t.global_writes = drains + reps * (double(m.K * m.N) + input_dram);
    return t;
}

inline PhaseWork analyze_phase(const PhaseTrace& trace, const FabricSpec& fabric,
                               const BufferSpec& local, count_t bytes_per_element) {
    fabric.validate();
    local.validate();
    PhaseWork w;
    w.phase = trace.phase;
    w.pes_per_array = fabric.array.pes();
    for (const auto& e : trace.matmuls) {
        const auto ce = analytic_cycles(e.dims, fabric, e.repeat);
        w.compute_cycles += double(ce.compute_cycles);
        w.array_cycles += double(ce.compute_cycles) * double(fabric.total_arrays());
        w.macs += double(e.dims.M) * double(e.dims.K) * double(e.dims.N) * double(e.repeat);
        w.flops += double(e.flops());
        w.traffic += partitioned_traffic(e.dims, e.repeat, fabric, local, bytes_per_element);
    }
    return w;
}

/// Compute and memory overlap perfectly (double buffering), so latency is
/// whichever side is slower.
inline PhaseResult time_phase(const PhaseWork& w, const MemorySpec& mem, const ClockSpec& clock) {
    mem.validate();
    clock.validate();
    PhaseResult r;
    r.phase = w.phase;
    r.frequency = clock.frequency;
    r.compute_cycles = w.compute_cycles;
    r.flops = w.flops;
    r.utilization = w.utilization();
    r.traffic = w.traffic;
    r.compute_time = w.compute_cycles / clock.frequency;
    r.dram_time = w.traffic.dram_bytes / mem.ext_bandwidth;
    r.onchip_time = w.traffic.onchip_bytes / mem.onchip_bandwidth;
    r.memory_time = std::max(r.dram_time, r.onchip_time);
    if (r.compute_time >= r.memory_time) {
        r.bound = Bound::Compute;
        r.latency = r.compute_time;
        r.total_cycles = w.compute_cycles;
        r.compute_fraction = 1.0;
    } else {
        r.bound = Bound::Memory;
        r.latency = r.memory_time;
        r.total_cycles = r.latency * clock.frequency;
        r.compute_fraction = r.compute_time / r.latency;
    }
    return r;
}

inline PhaseResult phase_result(const PhaseTrace& trace, const FabricSpec& fabric,
                                const BufferSpec& local, const MemorySpec& mem,
                                const ClockSpec& clock, count_t bytes_per_element) {
    return time_phase(analyze_phase(trace, fabric, local, bytes_per_element), mem, clock);
}

/// Sums per-step results of a generation. Latencies add; the compute
/// fraction and utilization are re-derived from the totals.
class DecodeAccumulator {
public:
    void add(const PhaseResult& r) {
        if (steps_ == 0) sum_ = r;
        else {
            sum_.compute_cycles += r.compute_cycles;
            sum_.compute_time += r.compute_time;
            sum_.memory_time += r.memory_time;
            sum_.dram_time += r.dram_time;
            sum_.onchip_time += r.onchip_time;
            sum_.latency += r.latency;
            sum_.total_cycles += r.total_cycles;
            sum_.flops += r.flops;
            sum_.traffic += r.traffic;
            util_weighted_ += r.utilization * r.compute_cycles;
        }
        if (steps_ == 0) util_weighted_ = r.utilization * r.compute_cycles;
        ++steps_;
    }

    [[nodiscard]] count_t steps() const { return steps_; }

    [[nodiscard]] PhaseResult total() const {
        PhaseResult r = sum_;
        r.compute_fraction = r.latency > 0 ? r.compute_time / r.latency : 0.0;
        r.utilization = r.compute_cycles > 0 ? util_weighted_ / r.compute_cycles : 0.0;
        r.bound = r.compute_time >= r.memory_time ? Bound::Compute : Bound::Memory;
        return r;
    }

    /// Per-token average of total().
    [[nodiscard]] PhaseResult mean() const {
        PhaseResult r = total();
        if (steps_ == 0) return r;
        const double s = 1.0 / double(steps_);
        r.compute_cycles *= s;
        r.compute_time *= s;
        r.memory_time *= s;
        r.dram_time *= s;
        r.onchip_time *= s;
        r.latency *= s;
        r.total_cycles *= s;
        r.flops *= s;
        r.traffic *= s;
        return r;
    }

private:
    PhaseResult sum_;
    double util_weighted_ = 0;
    count_t steps_ = 0;
};

}  // namespace sramdse
