#pragma once

// Roofline placement, energy-delay product and dense S x f grids of a
// scalar metric (the data behind isoplots and argmin queries).

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sramdse/dataflow.hpp"
#include "sramdse/memory.hpp"

namespace sramdse {

struct RooflinePoint {
    double oi = 0;          ///< flop/byte of external traffic
    double attainable = 0;  ///< flop/s
    double achieved = 0;    ///< flop/s
    double peak = 0;
    double bandwidth = 0;
    Bound bound = Bound::Compute;

    [[nodiscard]] double ridge() const { return peak / bandwidth; }
};

inline double peak_flops(const FabricSpec& fabric, double frequency) {
    return double(fabric.total_arrays()) * double(fabric.array.pes()) * 2.0 * frequency;
}

inline RooflinePoint roofline(const PhaseResult& point, double peak, double bw) {
    if (!(point.traffic.dram_bytes > 0))
        throw model_error("roofline: phase moved no external bytes");
    if (!(peak > 0) || !(bw > 0)) throw model_error("roofline: peak and bandwidth must be positive");
    RooflinePoint r;
    r.peak = peak;
    r.bandwidth = bw;
    r.oi = point.flops / point.traffic.dram_bytes;
    r.attainable = std::min(peak, bw * r.oi);
    r.achieved = point.latency > 0 ? point.flops / point.latency : 0.0;
    r.bound = r.oi < peak / bw ? Bound::Memory : Bound::Compute;
    return r;
}

struct MetricPoint {
    double latency = 0;
    double energy = 0;
    double edp = 0;
    double edp_normalized = 0;
};

inline MetricPoint edp(double energy, double latency) {
    if (energy < 0 || latency < 0) throw model_error("edp: inputs must be non-negative");
    return {latency, energy, energy * latency, 0.0};
}

enum class Metric {
    Latency,
    TotalEnergy,
    EDP,
    Cycles,
    ComputeFraction,
    DynamicPower,
    DynamicEnergy,
    StaticEnergy,
};

inline constexpr std::array<Metric, 8> kAllMetrics = {
    Metric::Latency,         Metric::TotalEnergy,  Metric::EDP,           Metric::Cycles,
    Metric::ComputeFraction, Metric::DynamicPower, Metric::DynamicEnergy, Metric::StaticEnergy};

constexpr std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::Latency: return "latency";
        case Metric::TotalEnergy: return "total_energy";
        case Metric::EDP: return "edp";
        case Metric::Cycles: return "cycles";
        case Metric::ComputeFraction: return "compute_fraction";
        case Metric::DynamicPower: return "dynamic_power";
        case Metric::DynamicEnergy: return "dynamic_energy";
        case Metric::StaticEnergy: return "static_energy";
    }
    return "?";
}

inline std::optional<Metric> metric_from_string(std::string_view s) {
    for (auto m : kAllMetrics)
        if (to_string(m) == s) return m;
    return std::nullopt;
}

struct GridCell {
    std::size_t s_index = 0;
    std::size_t f_index = 0;
    double value = 0;
};

struct MetricGrid {
    Metric metric = Metric::Latency;
    std::vector<double> s_axis;  ///< bytes
    std::vector<double> f_axis;  ///< Hz
    std::vector<double> values;  ///< row-major: S outer, f inner

    [[nodiscard]] double at(std::size_t si, std::size_t fi) const {
        return values[si * f_axis.size() + fi];
    }

    /// Smallest value; ties resolve to the smallest S, then the smallest f.
    [[nodiscard]] GridCell argmin() const { return extreme(std::less<>{}); }
    [[nodiscard]] GridCell argmax() const { return extreme(std::greater<>{}); }

    /// Column argmin over S at one frequency.
    [[nodiscard]] GridCell argmin_over_s(std::size_t fi) const {
        GridCell best{0, fi, at(0, fi)};
        for (std::size_t si = 1; si < s_axis.size(); ++si)
            if (at(si, fi) < best.value) best = {si, fi, at(si, fi)};
        return best;
    }

    /// Every cell divided by the grid minimum.
    [[nodiscard]] MetricGrid normalized() const {
        MetricGrid g = *this;
        const double lo = argmin().value;
        for (auto& v : g.values) v = lo > 0 ? v / lo : (v == lo ? 1.0 : v);
        return g;
    }

    /// Ten evenly spaced contour levels from min to max inclusive.
    [[nodiscard]] std::vector<double> contour_levels() const {
        const double lo = argmin().value, hi = argmax().value;
        std::vector<double> levels(10);
        for (std::size_t i = 0; i < levels.size(); ++i)
            levels[i] = lo + (hi - lo) * double(i) / double(levels.size() - 1);
        return levels;
    }

private:
    template <class Cmp>
    GridCell extreme(Cmp better) const {
        GridCell best{0, 0, values.at(0)};
        for (std::size_t si = 0; si < s_axis.size(); ++si)
            for (std::size_t fi = 0; fi < f_axis.size(); ++fi)
                if (better(at(si, fi), best.value)) best = {si, fi, at(si, fi)};
        return best;
    }
};

class grid_error : public model_error {
public:
    using model_error::model_error;
};

/// Builds a dense grid from a lookup that may miss cells; a miss is an error.
inline MetricGrid build_grid(Metric metric, const std::vector<double>& s_axis,
                             const std::vector<double>& f_axis,
                             const std::function<std::optional<double>(double, double)>& lookup) {
    if (s_axis.empty() || f_axis.empty()) throw grid_error("grid: empty axis");
    MetricGrid g{metric, s_axis, f_axis, {}};
    g.values.reserve(s_axis.size() * f_axis.size());
    for (double s : s_axis)
        for (double f : f_axis) {
            auto v = lookup(s, f);
            if (!v)
                throw grid_error("grid " + std::string(to_string(metric)) + ": missing design point S=" +
                                 std::to_string(s) + " f=" + std::to_string(f));
            g.values.push_back(*v);
        }
    return g;
}

}  // namespace sramdse
