#include <gtest/gtest.h>

#include <random>

#include "sramdse/energy.hpp"

using namespace sramdse;

TEST(Energy, StaticEnergyHandValues) {
    PhaseResult r;
    r.latency = 1.0;
    EXPECT_NEAR(static_energy(r, 10e-3, 0.20), 8e-3, 1e-15);
    r.latency = 2.5;
    EXPECT_EQ(static_energy(r, 3.0, 0.0), 7.5);
}

TEST(Energy, SramPowerLaw) {
    SramEnergyModel m;
    EXPECT_DOUBLE_EQ(m.access_energy(4 * m.ref_size), 2 * m.access_energy(m.ref_size));
    EXPECT_DOUBLE_EQ(m.access_energy(m.ref_size), m.access_energy_ref);
    EXPECT_DOUBLE_EQ(m.leakage(2 * 65536.0), 2 * m.leakage(65536.0));
    m.access_exponent = 0;
    EXPECT_THROW(m.validate(), model_error);
}

TEST(Energy, ArrayDynamicPowerAtReference) {
    // One array at the reference clock, fully busy for one second.
    PhaseResult r;
    r.compute_cycles = 1e9;
    r.utilization = 1.0;
    const ArrayPower a;
    const auto d = dynamic_energy(r, SramEnergyModel{}, a, {1, 0, 0, 0});
    EXPECT_DOUBLE_EQ(d.arrays, 1.25);
    EXPECT_DOUBLE_EQ(a.dynamic_power(2e9, 0.5), 1.25);
}

TEST(Energy, ZeroActivityZeroDynamic) {
    const PhaseResult r;
    const auto d = dynamic_energy(r, SramEnergyModel{}, ArrayPower{}, ChipSizes{});
    EXPECT_EQ(d.total(), 0.0);
}

TEST(Energy, SramDynamicSumsLevels) {
    PhaseResult r;
    r.traffic.local_reads = 100;
    r.traffic.local_writes = 50;
    r.traffic.global_reads = 7;
    r.traffic.global_writes = 3;
    SramEnergyModel s;
    const ChipSizes chip{0, 4, 4 * s.ref_size, 16 * s.ref_size};
    const auto d = dynamic_energy(r, s, ArrayPower{}, chip);
    EXPECT_DOUBLE_EQ(d.local_buffers, 150 * 2 * s.access_energy_ref);
    EXPECT_DOUBLE_EQ(d.global_buffer, 10 * 4 * s.access_energy_ref);
}

TEST(Energy, DynamicArrayEnergyIsFrequencyInvariant) {
    // Same work at two clocks: P_dyn * compute_time is unchanged.
    const ArrayPower a;
    PhaseResult r;
    r.compute_cycles = 123456789;
    r.utilization = 0.37;
    const auto e = dynamic_energy(r, SramEnergyModel{}, a, ChipSizes{}).arrays;
    for (double f : {2e8, 6e8, 1.4e9}) {
        const double via_power = 432 * a.dynamic_power(f, r.utilization) * (r.compute_cycles / f);
        EXPECT_NEAR(via_power, e, 1e-12 * e);
    }
}

TEST(Energy, IdentitiesHoldOnRandomInputs) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        PhaseResult r;
        r.phase = i % 2 ? Phase::Prefill : Phase::DecodeStep;
        r.latency = 1e-4 + u(rng);
        r.compute_cycles = 1e9 * u(rng);
        r.utilization = u(rng);
        r.traffic.local_reads = 1e12 * u(rng);
        r.traffic.global_writes = 1e11 * u(rng);
        EnergyModel m;
        m.sram.leakage_per_byte = 1e-7 * (0.1 + u(rng));
        m.gating.decode_saving = 0.5 * u(rng);
        const ChipSizes chip{432, 108, 1024.0 * (1 + 1000 * u(rng)), 40.0 * 1024 * 1024};
        const auto b = phase_energy(r, m, chip);
        const double leak = leakage_power(m, chip).total();
        const double want_static = r.latency * leak * (1 - m.gating.saving(r.phase));
        EXPECT_NEAR(b.static_j, want_static, 1e-12 * want_static);
        EXPECT_EQ(b.total_j, b.static_j + b.dynamic_j);
        const double parts = b.local_buffers.total_j() + b.global_buffer.total_j() + b.arrays.total_j();
        EXPECT_NEAR(parts, b.total_j, 1e-12 * b.total_j);
        EXPECT_GE(b.static_j, 0);
        EXPECT_GE(b.dynamic_j, 0);
    }
}

TEST(Energy, TotalEnergyBreakdown) {
    const auto b = total_energy(0.5, 3.0, 2.0);
    EXPECT_EQ(b.total_j, 3.5);
    EXPECT_EQ(b.dynamic_power_w, 1.5);
    EXPECT_EQ(total_energy(2.0, 0.0, 1.0).total_j, 2.0);
}

TEST(Energy, GatingBySavings) {
    GatingPolicy g;
    EXPECT_EQ(g.saving(Phase::Prefill), 0.04);
    EXPECT_EQ(g.saving(Phase::DecodeStep), 0.20);
    g.decode_saving = 1.0;
    EXPECT_THROW(g.validate(), model_error);
}

TEST(Energy, LeakageComponents) {
    EnergyModel m;
    const ChipSizes chip{432, 108, 32768, 40.0 * 1024 * 1024};
    const auto p = leakage_power(m, chip);
    EXPECT_DOUBLE_EQ(p.arrays, 432 * 9.31e-3);
    EXPECT_DOUBLE_EQ(p.local_buffers, 108 * 32768 * m.sram.leakage_per_byte);
    EXPECT_DOUBLE_EQ(p.global_buffer, 40.0 * 1024 * 1024 * m.sram.leakage_per_byte);
}
