#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run cli(const std::string& args) {
    const std::string cmd = std::string(SRAMDSE_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    const int status = pclose(p);
    return {WEXITSTATUS(status), out};
}

fs::path scratch_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("sramdse_cli_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, SimulateJson) {
    const auto r = cli("simulate --phase decode --format json --override hw.local_buffer_kb=32");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0]["phase"], "decode");
    EXPECT_EQ(j[0]["S_bytes"], 32768.0);
    EXPECT_EQ(j[0]["edp_normalized"], 1.0);
}

TEST(Cli, SimulateCsvHasHeaderAndRows) {
    const auto r = cli("simulate --format csv");
    ASSERT_EQ(r.code, 0) << r.out;
    std::istringstream in(r.out);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    EXPECT_EQ(n, 3);
    EXPECT_EQ(r.out.rfind("phase,S_bytes,f_hz", 0), 0u);
}

TEST(Cli, MissingConfigExitsTwoNamingPath) {
    const auto r = cli("simulate --config /no/such/file.cfg");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("/no/such/file.cfg"), std::string::npos);
}

TEST(Cli, BadOverrideExitsTwo) {
    EXPECT_EQ(cli("simulate --override hw.nope=1").code, 2);
    EXPECT_EQ(cli("simulate --override hw.frequency_mhz=0").code, 2);
    EXPECT_EQ(cli("simulate --format xml").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
}

TEST(Cli, LaterConfigFilesWin) {
    const auto d = scratch_dir("cfg");
    fs::create_directories(d);
    std::ofstream(d / "a.cfg") << "hw.frequency_mhz = 200\nhw.local_buffer_kb = 16\n";
    std::ofstream(d / "b.cfg") << "hw.frequency_mhz = 800\n";
    const auto r = cli("simulate --phase prefill --format json --config " + (d / "a.cfg").string() +
                       " --config " + (d / "b.cfg").string() + " --override hw.local_buffer_kb=128");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j[0]["f_hz"], 800e6);
    EXPECT_EQ(j[0]["S_bytes"], 131072.0);
    fs::remove_all(d);
}

TEST(Cli, ReportWritesFilesDeterministically) {
    const auto a = scratch_dir("ra"), b = scratch_dir("rb");
    const std::string small = " --override sweep.s_kb=16,32 --override sweep.f_mhz=400,600 --override sweep.bw_gbps=2048";
    ASSERT_EQ(cli("report --out " + a.string() + small).code, 0);
    ASSERT_EQ(cli("report --jobs 3 --out " + b.string() + small).code, 0);
    for (const auto& e : fs::directory_iterator(a))
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
    EXPECT_TRUE(fs::exists(a / "summary.json"));
    EXPECT_TRUE(fs::exists(a / "roofline.csv"));
    EXPECT_TRUE(fs::exists(a / "grid_edp_decode_bw2048GBps.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, SweepCsvRowCount) {
    const auto r = cli("sweep --format csv --phase prefill --override sweep.bw_gbps=2048");
    ASSERT_EQ(r.code, 0) << r.out;
    std::istringstream in(r.out);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    EXPECT_EQ(n, 1 + 49);
}

TEST(Cli, EmptyPhasesWarn) {
    const auto d = scratch_dir("nophase");
    const auto r = cli("report --override sweep.phases= --out " + d.string());
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("warning"), std::string::npos);
    EXPECT_FALSE(fs::exists(d / "summary.json"));
    fs::remove_all(d);
}

TEST(Cli, RooflineJson) {
    const auto r = cli("roofline --format json --phase decode --override sweep.bw_gbps=2048");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.size(), 49u);
    for (const auto& x : j) EXPECT_LE(x["achieved_flops"].get<double>(), x["attainable_flops"].get<double>() * (1 + 1e-12));
}

TEST(Cli, CalibrateBaselineTargetSucceeds) {
    const auto d = scratch_dir("cal");
    const auto r = cli("calibrate --override calibrate.targets=decode:edp:2048:32:600:0 --out " + d.string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(d / "calibration.cfg"));
    // The emitted file loads back as a config.
    EXPECT_EQ(cli("simulate --config " + (d / "calibration.cfg").string()).code, 0);
    fs::remove_all(d);
}

TEST(Cli, CalibrateWithoutTargetsIsConfigError) {
    EXPECT_EQ(cli("calibrate --override calibrate.targets=").code, 2);
}
