#pragma once

// Weight-stationary systolic array timing. analytic_cycles is the closed
// form used by the sweep; simulate_cycles steps a PE grid register by
// register and is kept as the reference the closed form is checked against.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sramdse/workload.hpp"

namespace sramdse {

enum class Dataflow { WeightStationary };

struct ArraySpec {
    count_t rows = 16;
    count_t cols = 16;
    Dataflow dataflow = Dataflow::WeightStationary;

    void validate() const {
        if (rows == 0 || cols == 0) throw model_error("array: rows and cols must be >= 1");
    }
    [[nodiscard]] count_t pes() const { return rows * cols; }
};

struct FabricSpec {
    count_t cores = 108;
    count_t arrays_per_core = 4;
    ArraySpec array;

    [[nodiscard]] count_t total_arrays() const { return cores * arrays_per_core; }

    void validate() const {
        array.validate();
        if (total_arrays() == 0) throw model_error("fabric: need at least one array");
    }
};

struct CycleEstimate {
    count_t compute_cycles = 0;
    count_t folds = 0;
    double utilization = 0.0;
};

constexpr count_t ceil_div(count_t a, count_t b) { return (a + b - 1) / b; }

/// Cycles for one weight tile residency: preload `rows` weights rows, then
/// stream M input vectors through the skewed pipeline and drain.
constexpr count_t cycles_per_fold(count_t M, const ArraySpec& a) {
    return a.rows + M + a.rows + a.cols - 2;
}

constexpr count_t folds_of(const MatmulDims& m, const ArraySpec& a) {
    return ceil_div(m.K, a.rows) * ceil_div(m.N, a.cols);
}

/// `repeat` identical instances share the fabric: their folds are dealt
/// round-robin over every array and M is never split.
inline CycleEstimate analytic_cycles(const MatmulDims& m, const FabricSpec& fabric,
                                     count_t repeat = 1) {
    m.validate();
    fabric.validate();
    CycleEstimate e;
    e.folds = folds_of(m, fabric.array) * repeat;
    e.compute_cycles = ceil_div(e.folds, fabric.total_arrays()) * cycles_per_fold(m.M, fabric.array);
    const double macs = double(m.M) * double(m.K) * double(m.N) * double(repeat);
    e.utilization = macs / (double(fabric.total_arrays()) * double(e.compute_cycles) *
                            double(fabric.array.pes()));
    return e;
}

// ---------------------------------------------------------------------------
// Cycle-accurate reference

struct CycleAccess {
    count_t reads = 0;
    count_t writes = 0;
};

struct SimulationResult {
    CycleEstimate estimate;
    count_t weight_reads = 0;
    count_t input_reads = 0;
    count_t psum_reads = 0;
    count_t output_writes = 0;
    std::vector<CycleAccess> per_cycle;  ///< local SRAM traffic per cycle, when traced
    std::vector<std::int64_t> output;    ///< M x N result, row-major

    [[nodiscard]] count_t local_reads() const { return weight_reads + input_reads + psum_reads; }
    [[nodiscard]] count_t local_writes() const { return output_writes; }
};

inline constexpr count_t kSimulationMacLimit = 1'000'000;

class simulation_limit_error : public std::length_error {
public:
    using std::length_error::length_error;
};

namespace detail {

// PE register file, row-major. Row r of the grid holds weight row r of the
// current tile; activations move right, partial sums move down.
struct PeGrid {
    count_t rows, cols;
    std::vector<std::int64_t> weight, act, psum;
    // Input row index carried with the activation, -1 = bubble. A partial sum
    // moves down in step with the input skew, so it belongs to the row tagged
    // at the same PE.
    std::vector<std::int64_t> act_tag;

    PeGrid(count_t r, count_t c)
        : rows(r), cols(c), weight(r * c, 0), act(r * c, 0), psum(r * c, 0), act_tag(r * c, -1) {}

    std::size_t at(count_t r, count_t c) const { return std::size_t(r * cols + c); }
};

// Fold loop of the simulator. FR/FC fix the array shape at compile time so
// small arrays get fully unrolled inner loops; 0 means the shape is taken
// from the grid at run time.
template <count_t FR, count_t FC>
count_t run_folds(const MatmulDims& m, PeGrid& g, const std::int64_t* in, const std::int64_t* wt,
                  SimulationResult& res, bool trace) {
    const count_t R = FR ? FR : g.rows, C = FC ? FC : g.cols;
    const count_t M = m.M, K = m.K, N = m.N;
    const count_t k_tiles = ceil_div(K, R), n_tiles = ceil_div(N, C);
    std::int64_t* const weight = g.weight.data();
    std::int64_t* const act = g.act.data();
    std::int64_t* const act_tag = g.act_tag.data();
    std::int64_t* const psum = g.psum.data();
    std::int64_t* const out = res.output.data();
    count_t cycle = 0;
    auto tick = [&](count_t reads, count_t writes) {
        if (trace) res.per_cycle.push_back({reads, writes});
        ++cycle;
    };

    for (count_t nt = 0; nt < n_tiles; ++nt) {
        for (count_t kt = 0; kt < k_tiles; ++kt) {
            const count_t k0 = kt * R, n0 = nt * C;

            // Preload: weight rows enter at the top and shift down one row per
            // cycle; the bottom row is injected first.
            for (count_t step = 0; step < R; ++step) {
                for (count_t i = R * C; i-- > C;) weight[i] = weight[i - C];
                const count_t k = k0 + R - 1 - step;
                count_t reads = 0;
                for (count_t c = 0; c < C; ++c) {
                    const count_t n = n0 + c;
                    const bool real = k < K && n < N;
                    weight[c] = real ? wt[k * N + n] : 0;
                    reads += real;
                }
                res.weight_reads += reads;
                tick(reads, 0);
            }

            // Stream: input row i enters grid row r at cycle i + r. Each PE adds
            // its product to the partial sum arriving from above.
            for (count_t i = 0; i < R * C; ++i) act_tag[i] = -1;
            const count_t stream_cycles = M + R + C - 2;
            count_t input_reads = 0, psum_reads = 0, output_writes = 0;
            for (count_t t = 0; t < stream_cycles; ++t) {
                count_t reads = 0, writes = 0;
                for (count_t r = R; r-- > 0;) {
                    std::int64_t* const a_row = act + r * C;
                    std::int64_t* const t_row = act_tag + r * C;
                    std::int64_t* const p_row = psum + r * C;
                    const std::int64_t* const w_row = weight + r * C;
                    for (count_t c = C; c-- > 1;) {
                        a_row[c] = a_row[c - 1];
                        t_row[c] = t_row[c - 1];
                    }
                    // Column 0 takes the skewed input edge.
                    std::int64_t a = 0, tag = -1;
                    if (t >= r && t - r < M) {
                        tag = std::int64_t(t - r);
                        const count_t k = k0 + r;
                        if (k < K) {
                            a = in[count_t(tag) * K + k];
                            ++reads;
                        }
                    }
                    a_row[0] = a;
                    t_row[0] = tag;
                    if (r > 0) {
                        const std::int64_t* const above = p_row - C;
                        for (count_t c = 0; c < C; ++c) p_row[c] = above[c] + a_row[c] * w_row[c];
                    } else {
                        for (count_t c = 0; c < C; ++c) p_row[c] = a_row[c] * w_row[c];
                    }
                }
                input_reads += reads;
                // Bottom row emits one finished partial sum per column.
                const count_t bottom = (R - 1) * C;
                for (count_t c = 0; c < C; ++c) {
                    const count_t n = n0 + c;
                    const std::int64_t tag = act_tag[bottom + c];
                    if (tag < 0 || n >= N) continue;
                    if (kt > 0) {
                        ++reads;
                        ++psum_reads;
                    }
                    out[count_t(tag) * N + n] += psum[bottom + c];
                    ++writes;
                }
                output_writes += writes;
                tick(reads, writes);
            }
            res.input_reads += input_reads;
            res.psum_reads += psum_reads;
            res.output_writes += output_writes;
        }
    }
    return cycle;
}

}  // namespace detail

/// Runs the matmul on a single array with caller-supplied operands
/// (lhs is M x K, rhs is K x N, both row-major). `trace` keeps the per-cycle
/// access log.
inline SimulationResult simulate(const MatmulDims& m, const ArraySpec& array,
                                 std::span<const std::int64_t> lhs,
                                 std::span<const std::int64_t> rhs, bool trace = true) {
    m.validate();
    array.validate();
    if (m.M * m.K * m.N > kSimulationMacLimit)
        throw simulation_limit_error("simulate_cycles: matmul exceeds the simulation MAC limit");
    if (lhs.size() != m.M * m.K || rhs.size() != m.K * m.N)
        throw model_error("simulate: operand sizes do not match dims");

    SimulationResult res;
    res.output.assign(m.M * m.N, 0);
    detail::PeGrid g(array.rows, array.cols);
    const auto* in = lhs.data();
    const auto* wt = rhs.data();
    count_t cycle = 0;
    if (array.rows != array.cols) cycle = detail::run_folds<0, 0>(m, g, in, wt, res, trace);
    else switch (array.rows) {
        case 1: cycle = detail::run_folds<1, 1>(m, g, in, wt, res, trace); break;
        case 2: cycle = detail::run_folds<2, 2>(m, g, in, wt, res, trace); break;
        case 4: cycle = detail::run_folds<4, 4>(m, g, in, wt, res, trace); break;
        case 8: cycle = detail::run_folds<8, 8>(m, g, in, wt, res, trace); break;
        default: cycle = detail::run_folds<0, 0>(m, g, in, wt, res, trace); break;
    }

    res.estimate.compute_cycles = cycle;
    res.estimate.folds = ceil_div(m.K, array.rows) * ceil_div(m.N, array.cols);
    res.estimate.utilization =
        double(m.M) * double(m.K) * double(m.N) / (double(cycle) * double(array.pes()));
    return res;
}

/// Deterministic small-integer operands; the simulator checks values as well
/// as timing so a scheduling bug shows up as a wrong product.
inline std::vector<std::int64_t> sample_operand(count_t rows, count_t cols, count_t salt) {
    std::vector<std::int64_t> v(rows * cols);
    for (count_t i = 0; i < rows; ++i)
        for (count_t j = 0; j < cols; ++j)
            v[i * cols + j] = std::int64_t((i * 7 + j * 3 + salt * 5) % 11) - 5;
    return v;
}

inline SimulationResult simulate_cycles(const MatmulDims& m, const ArraySpec& array, bool trace = false) {
    m.validate();
    if (m.M * m.K * m.N > kSimulationMacLimit)
        throw simulation_limit_error("simulate_cycles: matmul exceeds the simulation MAC limit");
    const auto lhs = sample_operand(m.M, m.K, 1);
    const auto rhs = sample_operand(m.K, m.N, 2);
    return simulate(m, array, lhs, rhs, trace);
}

// ---------------------------------------------------------------------------
// Local-buffer operand traffic

struct AccessCounts {
    count_t weight_reads = 0;
    count_t input_reads = 0;
    count_t psum_reads = 0;
    count_t output_writes = 0;

    [[nodiscard]] count_t local_reads() const { return weight_reads + input_reads + psum_reads; }
    [[nodiscard]] count_t local_writes() const { return output_writes; }

    AccessCounts& operator+=(const AccessCounts& o) {
        weight_reads += o.weight_reads;
        input_reads += o.input_reads;
        psum_reads += o.psum_reads;
        output_writes += o.output_writes;
        return *this;
    }
};

/// Operand reads/writes the arrays make against their local buffer. Partial
/// sums of later K folds are read back and rewritten in place.
inline AccessCounts matmul_accesses(const MatmulDims& m, const ArraySpec& a) {
    const count_t kf = ceil_div(m.K, a.rows), nf = ceil_div(m.N, a.cols);
    AccessCounts c;
    c.weight_reads = m.K * m.N;
    c.input_reads = m.M * m.K * nf;
    c.output_writes = m.M * m.N * kf;
    c.psum_reads = m.M * m.N * (kf - 1);
    return c;
}

inline AccessCounts accesses_per_phase(const PhaseTrace& trace, const FabricSpec& fabric) {
    AccessCounts total;
    for (const auto& e : trace.matmuls) {
        auto c = matmul_accesses(e.dims, fabric.array);
        c.weight_reads *= e.repeat;
        c.input_reads *= e.repeat;
        c.psum_reads *= e.repeat;
        c.output_writes *= e.repeat;
        total += c;
    }
    return total;
}

}  // namespace sramdse
