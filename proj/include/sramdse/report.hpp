#pragma once

// Report files for a finished sweep: one CSV per metric x phase x bandwidth
// grid, a roofline CSV and a JSON summary with argmins and bound
// transitions. Output is byte-stable for identical inputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sramdse/analysis.hpp"
#include "sramdse/sweep.hpp"

namespace sramdse {

inline constexpr int kSchemaVersion = 1;

class report_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form; integral values print without exponent
/// up to 17 digits.
inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string bandwidth_tag(double bw) {
    return "bw" + format_number(bw / 1e9) + "GBps";
}

inline std::string grid_file_name(Metric m, Phase p, double bw) {
    return "grid_" + std::string(to_string(m)) + "_" + std::string(to_string(p)) + "_" + bandwidth_tag(bw) +
           ".csv";
}

/// CSV body of one grid. EDP is written normalized to the grid minimum;
/// errored cells are written as nan so the grid stays dense.
inline std::string grid_csv(const SweepResult& result, Metric metric, Phase phase, double bw) {
    std::ostringstream os;
    os << "metric,phase,bandwidth\n";
    os << to_string(metric) << ',' << to_string(phase) << ',' << format_number(bw) << '\n';
    os << "S_bytes,f_hz,value\n";
    for (const auto* r : result.slice(phase, bw)) {
        os << r->point.s << ',' << format_number(r->point.f) << ',';
        if (!r->ok) os << "nan";
        else if (metric == Metric::EDP) os << format_number(r->metrics.edp_normalized);
        else os << format_number(metric_value(*r, metric));
        os << '\n';
    }
    return os.str();
}

inline std::string roofline_csv(const SweepResult& result) {
    std::ostringstream os;
    os << "phase,bandwidth,S_bytes,f_hz,oi,attainable,achieved,bound\n";
    for (const auto& r : result.records) {
        os << to_string(r.phase) << ',' << format_number(r.point.bw) << ',' << r.point.s << ','
           << format_number(r.point.f) << ',';
        if (!r.ok) {
            os << "nan,nan,nan,error\n";
            continue;
        }
        os << format_number(r.roof.oi) << ',' << format_number(r.roof.attainable) << ','
           << format_number(r.roof.achieved) << ',' << to_string(r.roof.bound) << '\n';
    }
    return os.str();
}

struct BoundTransition {
    Phase phase;
    double bw;
    count_t s;
    std::optional<double> last_compute_bound;  ///< highest f still compute bound below the flip
    std::optional<double> first_memory_bound;
};

/// First compute -> memory flip along f for every (phase, bw, S) row.
inline std::vector<BoundTransition> bound_transitions(const SweepResult& result) {
    std::vector<BoundTransition> out;
    for (auto phase : result.spec.phases)
        for (auto bw : result.spec.bw_values)
            for (auto s : result.spec.s_values) {
                BoundTransition t{phase, bw, s, std::nullopt, std::nullopt};
                std::optional<double> prev_compute;
                for (auto f : result.spec.f_values) {
                    const auto* r = result.find(phase, bw, s, f);
                    if (!r || !r->ok) continue;
                    if (r->result.bound == Bound::Compute) prev_compute = f;
                    else {
                        t.first_memory_bound = f;
                        t.last_compute_bound = prev_compute;
                        break;
                    }
                }
                out.push_back(t);
            }
    return out;
}

inline nlohmann::ordered_json cell_json(const MetricGrid& g, const GridCell& c) {
    return {{"S_bytes", g.s_axis[c.s_index]}, {"f_hz", g.f_axis[c.f_index]}, {"value", c.value}};
}

inline nlohmann::ordered_json summary_json(const SweepResult& result, const Config& cfg) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["records"] = result.records.size();
    j["errors"] = result.error_count();
    j["decode_mode"] = cfg.workload.decode_mode == DecodeMode::Step ? "step" : "mean";
    j["decode_step"] = cfg.workload.decode_step;
    j["gen_tokens"] = cfg.workload.request.gen_tokens;

    ordered_json grids = ordered_json::array();
    ordered_json decode_edp = ordered_json::array();
    for (auto phase : result.spec.phases)
        for (auto bw : result.spec.bw_values)
            for (auto metric : kAllMetrics) {
                ordered_json g;
                g["metric"] = to_string(metric);
                g["phase"] = to_string(phase);
                g["bandwidth"] = bw;
                g["file"] = grid_file_name(metric, phase, bw);
                try {
                    auto grid = build_grid(metric, result, phase, bw);
                    if (metric == Metric::EDP) grid = grid.normalized();
                    g["argmin"] = cell_json(grid, grid.argmin());
                    g["argmax"] = cell_json(grid, grid.argmax());
                    g["contour_levels"] = grid.contour_levels();
                    if (metric == Metric::EDP && phase == Phase::DecodeStep)
                        decode_edp.push_back({{"bandwidth", bw}, {"argmin", g["argmin"]}});
                } catch (const grid_error& e) {
                    g["error"] = e.what();
                }
                grids.push_back(std::move(g));
            }
    j["decode_edp_argmin"] = std::move(decode_edp);

    ordered_json trans = ordered_json::array();
    for (const auto& t : bound_transitions(result)) {
        ordered_json o;
        o["phase"] = to_string(t.phase);
        o["bandwidth"] = t.bw;
        o["S_bytes"] = t.s;
        o["last_compute_bound_hz"] = t.last_compute_bound ? ordered_json(*t.last_compute_bound) : ordered_json();
        o["first_memory_bound_hz"] = t.first_memory_bound ? ordered_json(*t.first_memory_bound) : ordered_json();
        trans.push_back(std::move(o));
    }
    j["bound_transitions"] = std::move(trans);
    j["grids"] = std::move(grids);
    return j;
}

struct ReportFiles {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

inline void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw report_error("cannot open '" + path.string() + "' for writing");
    out << body;
    out.flush();
    if (!out) throw report_error("write failed for '" + path.string() + "'");
}

inline ReportFiles emit_reports(const SweepResult& result, const Config& cfg,
                                const std::filesystem::path& out_dir) {
    ReportFiles rf;
    if (result.spec.phases.empty()) {
        rf.warnings.push_back("sweep has no phases; no report files written");
        return rf;
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw report_error("cannot create '" + out_dir.string() + "': " + ec.message());

    for (auto phase : result.spec.phases)
        for (auto bw : result.spec.bw_values)
            for (auto metric : kAllMetrics) {
                const auto path = out_dir / grid_file_name(metric, phase, bw);
                write_file(path, grid_csv(result, metric, phase, bw));
                rf.files.push_back(path);
            }
    const auto roof = out_dir / "roofline.csv";
    write_file(roof, roofline_csv(result));
    rf.files.push_back(roof);
    const auto summary = out_dir / "summary.json";
    write_file(summary, summary_json(result, cfg).dump(2) + "\n");
    rf.files.push_back(summary);
    if (result.error_count() > 0)
        rf.warnings.push_back(std::to_string(result.error_count()) + " cells failed to evaluate");
    return rf;
}

}  // namespace sramdse
