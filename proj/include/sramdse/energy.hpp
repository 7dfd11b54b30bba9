#pragma once

// Parametric power for the SRAM buffers and the systolic arrays, and the
// static/dynamic energy of a phase built from them.

#include <cmath>

#include "sramdse/dataflow.hpp"
#include "sramdse/memory.hpp"

namespace sramdse {

/// Leakage linear in capacity, per-access energy following a power law in
/// capacity (longer word and bit lines in bigger arrays).
struct SramEnergyModel {
    double leakage_per_byte = 5e-8;     ///< W/byte
    double access_energy_ref = 2e-12;   ///< J per element access at ref_size
    double ref_size = 32.0 * 1024.0;    ///< bytes
    double access_exponent = 0.5;

    void validate() const {
        if (!(leakage_per_byte > 0) || !(access_energy_ref > 0) || !(ref_size > 0) ||
            !(access_exponent > 0))
            throw model_error("sram energy model: all constants must be positive");
    }

    [[nodiscard]] double leakage(double size_bytes) const { return leakage_per_byte * size_bytes; }
    [[nodiscard]] double access_energy(double size_bytes) const {
        return access_energy_ref * std::pow(size_bytes / ref_size, access_exponent);
    }
};

/// Post-layout figures for one 16x16 array.
struct ArrayPower {
    double leakage_w = 9.31e-3;
    double dynamic_w_ref = 1.25;
    double ref_frequency = 1e9;

    void validate() const {
        if (!(leakage_w >= 0) || !(dynamic_w_ref >= 0) || !(ref_frequency > 0))
            throw model_error("array power: invalid constants");
    }

    [[nodiscard]] double dynamic_power(double frequency, double utilization) const {
        return dynamic_w_ref * (frequency / ref_frequency) * utilization;
    }
};

struct GatingPolicy {
    double prefill_saving = 0.04;
    double decode_saving = 0.20;

    void validate() const {
        auto ok = [](double s) { return s >= 0 && s < 1; };
        if (!ok(prefill_saving) || !ok(decode_saving))
            throw model_error("gating: savings must lie in [0, 1)");
    }

    [[nodiscard]] double saving(Phase p) const {
        return p == Phase::Prefill ? prefill_saving : decode_saving;
    }
};

struct EnergyModel {
    SramEnergyModel sram;
    ArrayPower array;
    GatingPolicy gating;

    void validate() const {
        sram.validate();
        array.validate();
        gating.validate();
    }
};

/// Physical sizes the energy model needs beyond the phase result.
struct ChipSizes {
    count_t arrays = 432;
    count_t local_buffers = 108;
    double local_bytes = 64 * 1024;
    double global_bytes = 40 * 1024 * 1024;
};

struct ComponentEnergy {
    double static_j = 0;
    double dynamic_j = 0;
    [[nodiscard]] double total_j() const { return static_j + dynamic_j; }
};

struct EnergyBreakdown {
    double static_j = 0;
    double dynamic_j = 0;
    double total_j = 0;
    double dynamic_power_w = 0;
    ComponentEnergy local_buffers;
    ComponentEnergy global_buffer;
    ComponentEnergy arrays;
};

struct LeakagePower {
    double local_buffers = 0;
    double global_buffer = 0;
    double arrays = 0;
    [[nodiscard]] double total() const { return local_buffers + global_buffer + arrays; }
};

inline LeakagePower leakage_power(const EnergyModel& e, const ChipSizes& chip) {
    LeakagePower p;
    p.local_buffers = double(chip.local_buffers) * e.sram.leakage(chip.local_bytes);
    p.global_buffer = e.sram.leakage(chip.global_bytes);
    p.arrays = double(chip.arrays) * e.array.leakage_w;
    return p;
}

inline double static_energy(const PhaseResult& result, double leakage_w, double gating) {
    return result.latency * leakage_w * (1.0 - gating);
}

struct DynamicEnergy {
    double local_buffers = 0;
    double global_buffer = 0;
    double arrays = 0;
    [[nodiscard]] double total() const { return local_buffers + global_buffer + arrays; }
};

/// Arrays are clock gated while stalled, so they burn dynamic power only for
/// compute_time. P_dyn * compute_time is evaluated as
/// P_ref * utilization * cycles / f_ref, the same product with the clock
/// cancelled, so the value is exactly frequency-invariant in cycles.
inline DynamicEnergy dynamic_energy(const PhaseResult& result, const SramEnergyModel& sram,
                                    const ArrayPower& array, const ChipSizes& chip) {
    DynamicEnergy d;
    d.local_buffers = (result.traffic.local_reads + result.traffic.local_writes) *
                      sram.access_energy(chip.local_bytes);
    d.global_buffer = (result.traffic.global_reads + result.traffic.global_writes) *
                      sram.access_energy(chip.global_bytes);
    d.arrays = double(chip.arrays) * array.dynamic_w_ref * result.utilization *
               result.compute_cycles / array.ref_frequency;
    return d;
}

inline EnergyBreakdown total_energy(double static_j, double dynamic_j, double latency) {
    EnergyBreakdown b;
    b.static_j = static_j;
    b.dynamic_j = dynamic_j;
    b.total_j = static_j + dynamic_j;
    b.dynamic_power_w = latency > 0 ? dynamic_j / latency : 0.0;
    return b;
}

/// Full breakdown for one phase result, per component and in total.
inline EnergyBreakdown phase_energy(const PhaseResult& result, const EnergyModel& model,
                                    const ChipSizes& chip) {
    const double gate = model.gating.saving(result.phase);
    const auto leak = leakage_power(model, chip);
    const auto dyn = dynamic_energy(result, model.sram, model.array, chip);

    EnergyBreakdown b =
        total_energy(static_energy(result, leak.total(), gate), dyn.total(), result.latency);
    b.local_buffers = {static_energy(result, leak.local_buffers, gate), dyn.local_buffers};
    b.global_buffer = {static_energy(result, leak.global_buffer, gate), dyn.global_buffer};
    b.arrays = {static_energy(result, leak.arrays, gate), dyn.arrays};
    return b;
}

}  // namespace sramdse
