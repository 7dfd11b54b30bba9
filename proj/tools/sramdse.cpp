// Command-line front end: simulate, sweep, roofline, calibrate, report.
// Exit codes: 0 success, 1 runtime failure or missed calibration, 2 bad
// configuration or usage.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sramdse/sramdse.hpp"

using namespace sramdse;
using nlohmann::ordered_json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Options {
    std::vector<std::string> configs;
    std::vector<std::string> overrides;
    std::string out;
    std::string phase;
    std::string format = "table";
    unsigned jobs = 1;
};

struct Column {
    const char* name;
    std::string (*get)(const SweepRecord&);
};

std::string num(double v) { return format_number(v); }

const std::vector<Column>& record_columns() {
    static const std::vector<Column> cols = {
        {"phase", [](const SweepRecord& r) { return std::string(to_string(r.phase)); }},
        {"S_bytes", [](const SweepRecord& r) { return std::to_string(r.point.s); }},
        {"f_hz", [](const SweepRecord& r) { return num(r.point.f); }},
        {"bw_bytes_per_s", [](const SweepRecord& r) { return num(r.point.bw); }},
        {"ok", [](const SweepRecord& r) { return std::string(r.ok ? "1" : "0"); }},
        {"bound", [](const SweepRecord& r) { return r.ok ? std::string(to_string(r.result.bound)) : "error"; }},
        {"latency_s", [](const SweepRecord& r) { return num(r.result.latency); }},
        {"compute_time_s", [](const SweepRecord& r) { return num(r.result.compute_time); }},
        {"dram_time_s", [](const SweepRecord& r) { return num(r.result.dram_time); }},
        {"onchip_time_s", [](const SweepRecord& r) { return num(r.result.onchip_time); }},
        {"total_cycles", [](const SweepRecord& r) { return num(r.result.total_cycles); }},
        {"compute_fraction", [](const SweepRecord& r) { return num(r.result.compute_fraction); }},
        {"utilization", [](const SweepRecord& r) { return num(r.result.utilization); }},
        {"dram_bytes", [](const SweepRecord& r) { return num(r.result.traffic.dram_bytes); }},
        {"onchip_bytes", [](const SweepRecord& r) { return num(r.result.traffic.onchip_bytes); }},
        {"static_j", [](const SweepRecord& r) { return num(r.energy.static_j); }},
        {"dynamic_j", [](const SweepRecord& r) { return num(r.energy.dynamic_j); }},
        {"total_j", [](const SweepRecord& r) { return num(r.energy.total_j); }},
        {"dynamic_power_w", [](const SweepRecord& r) { return num(r.energy.dynamic_power_w); }},
        {"edp", [](const SweepRecord& r) { return num(r.metrics.edp); }},
        {"edp_normalized", [](const SweepRecord& r) { return num(r.metrics.edp_normalized); }},
        {"oi", [](const SweepRecord& r) { return num(r.roof.oi); }},
        {"attainable_flops", [](const SweepRecord& r) { return num(r.roof.attainable); }},
        {"achieved_flops", [](const SweepRecord& r) { return num(r.roof.achieved); }},
        {"error", [](const SweepRecord& r) { return r.error; }},
    };
    return cols;
}

ordered_json record_json(const SweepRecord& r) {
    ordered_json j;
    for (const auto& c : record_columns()) {
        const auto v = c.get(r);
        const std::string name = c.name;
        if (name == "phase" || name == "bound" || name == "error") j[name] = v;
        else if (name == "ok") j[name] = r.ok;
        else j[name] = std::stod(v);
    }
    return j;
}

void print_rows(std::ostream& os, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows, const std::string& format) {
    if (format == "csv") {
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
            os << '\n';
        }
        return;
    }
    std::vector<std::size_t> w(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::max(w[i], row[i].size());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os << (i ? "  " : "") << cells[i];
            if (i + 1 < cells.size()) os << std::string(w[i] - cells[i].size(), ' ');
        }
        os << '\n';
    };
    line(header);
    for (const auto& row : rows) line(row);
}

void print_records(std::ostream& os, const std::vector<const SweepRecord*>& recs, const std::string& format) {
    if (format == "json") {
        ordered_json arr = ordered_json::array();
        for (const auto* r : recs) arr.push_back(record_json(*r));
        os << arr.dump(2) << '\n';
        return;
    }
    std::vector<std::string> header;
    const auto& cols = record_columns();
    // Table output keeps the columns that fit a terminal.
    static const std::vector<std::string> table_cols = {
        "phase", "S_bytes", "f_hz", "bw_bytes_per_s", "bound", "latency_s", "compute_fraction", "total_j", "edp_normalized"};
    for (const auto& c : cols)
        if (format == "csv" || std::find(table_cols.begin(), table_cols.end(), c.name) != table_cols.end())
            header.push_back(c.name);
    std::vector<std::vector<std::string>> rows;
    for (const auto* r : recs) {
        std::vector<std::string> row;
        for (const auto& c : cols)
            if (std::find(header.begin(), header.end(), c.name) != header.end()) row.push_back(c.get(*r));
        rows.push_back(std::move(row));
    }
    print_rows(os, header, rows, format);
}

std::vector<Phase> selected_phases(const Options& o, const Config& cfg) {
    if (o.phase.empty()) return cfg.sweep.phases;
    return {detail::parse_phase(o.phase)};
}

Config load(const Options& o) {
    Config cfg;
    for (const auto& path : o.configs) load_config_file(cfg, path);
    for (const auto& kv : o.overrides) apply_override(cfg, kv);
    cfg.sweep.canonicalize();
    if (!o.phase.empty()) cfg.sweep.phases = selected_phases(o, cfg);
    cfg.validate();
    return cfg;
}

int cmd_simulate(const Options& o, const Config& cfg) {
    std::vector<Phase> phases = o.phase.empty() ? std::vector<Phase>{Phase::Prefill, Phase::DecodeStep}
                                                : selected_phases(o, cfg);
    std::vector<SweepRecord> recs;
    for (auto p : phases) recs.push_back(simulate_point(cfg, p));
    std::vector<const SweepRecord*> ptrs;
    for (const auto& r : recs) ptrs.push_back(&r);
    print_records(std::cout, ptrs, o.format);
    for (const auto& r : recs)
        if (!r.ok) {
            std::cerr << "error: " << to_string(r.phase) << ": " << r.error << '\n';
            return kExitRuntime;
        }
    return 0;
}

void write_reports(const Options& o, const SweepResult& res, const Config& cfg) {
    const auto files = emit_reports(res, cfg, o.out);
    for (const auto& w : files.warnings) std::cerr << "warning: " << w << '\n';
    std::cerr << "wrote " << files.files.size() << " files to " << o.out << '\n';
}

int cmd_sweep(const Options& o, const Config& cfg) {
    const auto res = run_sweep(cfg, o.jobs);
    std::vector<const SweepRecord*> ptrs;
    for (const auto& r : res.records) ptrs.push_back(&r);
    print_records(std::cout, ptrs, o.format);
    if (!o.out.empty()) write_reports(o, res, cfg);
    if (res.spec.phases.empty()) std::cerr << "warning: sweep has no phases\n";
    return 0;
}

int cmd_roofline(const Options& o, const Config& cfg) {
    const auto res = run_sweep(cfg, o.jobs);
    if (o.format == "json") {
        ordered_json arr = ordered_json::array();
        for (const auto& r : res.records) {
            if (!r.ok) continue;
            arr.push_back({{"phase", to_string(r.phase)}, {"S_bytes", r.point.s}, {"f_hz", r.point.f},
                           {"bw_bytes_per_s", r.point.bw}, {"oi", r.roof.oi}, {"peak_flops", r.roof.peak},
                           {"ridge", r.roof.ridge()}, {"attainable_flops", r.roof.attainable},
                           {"achieved_flops", r.roof.achieved}, {"bound", to_string(r.roof.bound)}});
        }
        std::cout << arr.dump(2) << '\n';
    } else {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : res.records) {
            if (!r.ok) continue;
            rows.push_back({std::string(to_string(r.phase)), std::to_string(r.point.s), num(r.point.f),
                            num(r.point.bw), num(r.roof.oi), num(r.roof.ridge()), num(r.roof.attainable),
                            num(r.roof.achieved), std::string(to_string(r.roof.bound))});
        }
        print_rows(std::cout,
                   {"phase", "S_bytes", "f_hz", "bw_bytes_per_s", "oi", "ridge", "attainable_flops",
                    "achieved_flops", "bound"},
                   rows, o.format);
    }
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        write_file(std::filesystem::path(o.out) / "roofline.csv", roofline_csv(res));
    }
    return 0;
}

int cmd_calibrate(const Options& o, const Config& cfg) {
    if (cfg.targets.empty()) {
        std::cerr << "error: no calibration targets configured\n";
        return kExitConfig;
    }
    const auto res = calibrate(cfg);
    if (o.format == "json") {
        ordered_json j;
        j["energy.sram_leakage_w_per_byte"] = res.sram.leakage_per_byte;
        j["energy.sram_access_energy_j"] = res.sram.access_energy_ref;
        j["converged"] = res.converged();
        j["moved"] = res.moved;
        j["evaluations"] = res.evaluations;
        ordered_json t = ordered_json::array();
        for (const auto& x : res.outcomes)
            t.push_back({{"phase", to_string(x.target.phase)}, {"metric", to_string(x.target.metric)},
                         {"bandwidth", x.target.bandwidth}, {"target_S_bytes", x.target.s},
                         {"target_f_hz", x.target.f}, {"tolerance", x.target.tolerance},
                         {"reached_S_bytes", cfg.sweep.s_values[x.s_index]},
                         {"reached_f_hz", cfg.sweep.f_values[x.f_index]}, {"displacement_S", x.ds},
                         {"displacement_f", x.df}, {"within_tolerance", x.within_tolerance()}});
        j["targets"] = std::move(t);
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << calibration_file(res);
    }
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        const auto path = std::filesystem::path(o.out) / "calibration.cfg";
        write_file(path, calibration_file(res));
        std::cerr << "wrote " << path.string() << '\n';
    }
    if (!res.converged()) {
        std::cerr << "error: calibration missed at least one target tolerance\n";
        return kExitRuntime;
    }
    return 0;
}

int cmd_report(Options o, const Config& cfg) {
    if (o.out.empty()) o.out = "results";
    const auto res = run_sweep(cfg, o.jobs);
    write_reports(o, res, cfg);
    const auto summary = summary_json(res, cfg);
    if (o.format == "json") {
        std::cout << summary.dump(2) << '\n';
        return 0;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& g : summary["grids"]) {
        if (!g.contains("argmin")) {
            rows.push_back({g["metric"], g["phase"], num(g["bandwidth"]), "error", "", ""});
            continue;
        }
        rows.push_back({g["metric"], g["phase"], num(g["bandwidth"]),
                        num(g["argmin"]["S_bytes"].get<double>() / 1024.0),
                        num(g["argmin"]["f_hz"].get<double>() / 1e6), num(g["argmin"]["value"])});
    }
    print_rows(std::cout, {"metric", "phase", "bw_bytes_per_s", "argmin_S_kb", "argmin_f_mhz", "value"}, rows,
               o.format);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SRAM sizing design-space explorer for LLM prefill and decode"};
    app.require_subcommand(1, 1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.configs, "config file; repeatable, later files win");
        sub->add_option("--override", o.overrides, "key=value applied after config files; repeatable");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--phase", o.phase, "restrict to one phase")->check(CLI::IsMember({"prefill", "decode"}));
        sub->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"table", "json", "csv"}));
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    };
    auto* simulate = app.add_subcommand("simulate", "evaluate the single configured design point");
    auto* sweep = app.add_subcommand("sweep", "evaluate every S x f x BW cell");
    auto* roof = app.add_subcommand("roofline", "roofline placement of every sweep cell");
    auto* calib = app.add_subcommand("calibrate", "fit SRAM energy constants to argmin targets");
    auto* report = app.add_subcommand("report", "run the sweep and write grids, roofline and summary");
    for (auto* s : {simulate, sweep, roof, calib, report}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    Config cfg;
    try {
        cfg = load(o);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(o, cfg);
        if (sweep->parsed()) return cmd_sweep(o, cfg);
        if (roof->parsed()) return cmd_roofline(o, cfg);
        if (calib->parsed()) return cmd_calibrate(o, cfg);
        if (report->parsed()) return cmd_report(o, cfg);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
