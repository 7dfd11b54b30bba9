#include <gtest/gtest.h>

#include <random>

#include "sramdse/dataflow.hpp"

using namespace sramdse;

namespace {

std::vector<std::int64_t> reference_matmul(const MatmulDims& m, const std::vector<std::int64_t>& a,
                                           const std::vector<std::int64_t>& b) {
    std::vector<std::int64_t> c(m.M * m.N, 0);
    for (count_t i = 0; i < m.M; ++i)
        for (count_t k = 0; k < m.K; ++k)
            for (count_t j = 0; j < m.N; ++j) c[i * m.N + j] += a[i * m.K + k] * b[k * m.N + j];
    return c;
}

FabricSpec single(count_t r, count_t c) { return {1, 1, {r, c}}; }

}  // namespace

TEST(Dataflow, CycleFormulaHandValues) {
    // 16x16 array, one fold: preload 16, stream M + 16 + 16 - 2.
    EXPECT_EQ(analytic_cycles({64, 16, 16}, single(16, 16)).compute_cycles, 16u + 64 + 30);
    // 2 K folds x 3 N folds on one array.
    EXPECT_EQ(analytic_cycles({5, 17, 33}, single(16, 16)).compute_cycles, 6u * (16 + 5 + 30));
    // 6 folds over 4 arrays take 2 rounds.
    EXPECT_EQ(analytic_cycles({5, 17, 33}, {1, 4, {16, 16}}).compute_cycles, 2u * (16 + 5 + 30));
    // repeat multiplies folds before dealing them out.
    EXPECT_EQ(analytic_cycles({5, 16, 16}, {1, 4, {16, 16}}, 9).compute_cycles, 3u * (16 + 5 + 30));
}

TEST(Dataflow, UtilizationBounded) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<count_t> d(1, 300);
    for (int i = 0; i < 500; ++i) {
        const MatmulDims m{d(rng), d(rng), d(rng)};
        const auto e = analytic_cycles(m, {3, 2, {8, 8}}, 1 + d(rng) % 7);
        EXPECT_GT(e.utilization, 0.0);
        EXPECT_LE(e.utilization, 1.0);
    }
}

TEST(Dataflow, SimulatorComputesTheProduct) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<count_t> d(1, 23);
    std::uniform_int_distribution<int> v(-9, 9);
    for (count_t side : {1u, 2u, 3u, 4u, 8u}) {
        for (int i = 0; i < 40; ++i) {
            const MatmulDims m{d(rng), d(rng), d(rng)};
            std::vector<std::int64_t> a(m.M * m.K), b(m.K * m.N);
            for (auto& x : a) x = v(rng);
            for (auto& x : b) x = v(rng);
            const auto res = simulate(m, {side, side}, a, b);
            EXPECT_EQ(res.output, reference_matmul(m, a, b)) << m.M << "x" << m.K << "x" << m.N;
        }
    }
}

TEST(Dataflow, SimulatorCyclesMatchClosedFormOnRectangularArrays) {
    for (count_t r : {1u, 3u, 5u})
        for (count_t c : {2u, 4u, 7u})
            for (count_t M : {1u, 9u, 20u})
                for (count_t K : {1u, 6u, 13u})
                    for (count_t N : {1u, 8u, 15u}) {
                        const MatmulDims m{M, K, N};
                        EXPECT_EQ(simulate_cycles(m, {r, c}).estimate.compute_cycles,
                                  analytic_cycles(m, single(r, c)).compute_cycles);
                    }
}

TEST(Dataflow, SimulatorAccessCountsMatchClosedForm) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<count_t> d(1, 40);
    for (int i = 0; i < 200; ++i) {
        const MatmulDims m{d(rng), d(rng), d(rng)};
        const ArraySpec a{1 + d(rng) % 8, 1 + d(rng) % 8};
        const auto sim = simulate_cycles(m, a, true);
        const auto ref = matmul_accesses(m, a);
        EXPECT_EQ(sim.weight_reads, ref.weight_reads);
        EXPECT_EQ(sim.input_reads, ref.input_reads);
        EXPECT_EQ(sim.psum_reads, ref.psum_reads);
        EXPECT_EQ(sim.output_writes, ref.output_writes);

        ASSERT_EQ(sim.per_cycle.size(), sim.estimate.compute_cycles);
        count_t reads = 0, writes = 0;
        for (const auto& c : sim.per_cycle) {
            reads += c.reads;
            writes += c.writes;
        }
        EXPECT_EQ(reads, sim.local_reads());
        EXPECT_EQ(writes, sim.local_writes());
    }
}

TEST(Dataflow, TraceIsOptional) {
    const auto s = simulate_cycles({4, 4, 4}, {2, 2});
    EXPECT_TRUE(s.per_cycle.empty());
    EXPECT_GT(s.estimate.compute_cycles, 0u);
}

TEST(Dataflow, SimulationLimit) {
    EXPECT_THROW(simulate_cycles({101, 100, 100}, {16, 16}), simulation_limit_error);
    EXPECT_NO_THROW(simulate_cycles({100, 100, 100}, {16, 16}));
}

TEST(Dataflow, RejectsBadShapes) {
    EXPECT_THROW(analytic_cycles({0, 1, 1}, FabricSpec{}), model_error);
    EXPECT_THROW(analytic_cycles({1, 1, 1}, {0, 4, {16, 16}}), model_error);
    EXPECT_THROW(analytic_cycles({1, 1, 1}, {1, 1, {0, 16}}), model_error);
    std::vector<std::int64_t> a(3), b(4);
    EXPECT_THROW(simulate({2, 2, 2}, {2, 2}, a, b), model_error);
}

TEST(Dataflow, AccessesPerPhaseScaleWithRepeat) {
    PhaseTrace t;
    t.matmuls = {{Sublayer::AttentionScore, {3, 40, 50, false}, 7}};
    const auto one = matmul_accesses({3, 40, 50}, ArraySpec{});
    const auto all = accesses_per_phase(t, FabricSpec{});
    EXPECT_EQ(all.local_reads(), 7 * one.local_reads());
    EXPECT_EQ(all.local_writes(), 7 * one.local_writes());
    // 40 rows fold into 3 K tiles on a 16-row array: two read-modify-writes.
    EXPECT_EQ(one.psum_reads, 3u * 50 * 2);
    EXPECT_EQ(one.output_writes, 3u * 50 * 3);
}
