#include "forwardstep/output.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fstep;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("forwardstep_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + FSTEP_CLI + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> data_rows(const std::string& table) {
    std::vector<std::string> rows;
    std::stringstream ss(table);
    for (std::string line; std::getline(ss, line);)
        if (!line.empty() && line[0] != '#') rows.push_back(line);
    return rows;
}

const std::string kScenarios = FSTEP_SCENARIO_DIR;

}  // namespace

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(80.0), "80");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Tables, RectangularWithProvenance) {
    const auto c = load_config_file(kScenarios + "/theorem4_tpv.yaml", {"integrator.horizon=1"}).config;
    const auto r = run(c);
    std::stringstream ss;
    write_trajectory(ss, c, r);
    const std::string text = ss.str();
    EXPECT_EQ(text.rfind("# forwardstep trajectory", 0), 0u);
    const auto rows = data_rows(text);
    ASSERT_EQ(rows.size(), r.samples.size() + 1);
    const auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ',') + 1; };
    const auto width = count(rows[0]);
    EXPECT_EQ(static_cast<std::size_t>(width), trajectory_columns(r).size());
    for (const auto& row : rows) EXPECT_EQ(count(row), width);
}

TEST(Thresholds, MissingMetricFails) {
    ScenarioConfig c;
    c.thresholds.max["consensus_error"] = 1.0;
    c.thresholds.min["absent"] = 0.0;
    RunRecord r;
    r.metrics = {{"consensus_error", 0.5}};
    const auto checks = check_thresholds(c, r);
    ASSERT_EQ(checks.size(), 2u);
    EXPECT_TRUE(checks[0].pass);
    EXPECT_FALSE(checks[1].pass);
    EXPECT_FALSE(run_passed(r, checks));
    r.status = "aborted:divergence";
    EXPECT_FALSE(run_passed(r, {checks[0]}));
}

TEST(Report, TotalsMatchRecount) {
    const fs::path root = scratch("report");
    int pass = 0, fail = 0;
    for (int k = 0; k < 7; ++k) {
        const bool ok = k % 3 != 0;
        fs::create_directories(root / ("run" + std::to_string(k)));
        std::ofstream(root / ("run" + std::to_string(k)) / "summary.txt")
            << "scenario=consensus-lagrangian\nstatus=completed\nmetric.consensus_error=0.1\nresult="
            << (ok ? "PASS" : "FAIL") << "\nruntime_s=1\n";
        (ok ? pass : fail) += 1;
    }
    const Report rep = collect_report(root);
    EXPECT_EQ(rep.passed, pass);
    EXPECT_EQ(rep.failed, fail);
    std::stringstream csv;
    write_report_csv(csv, rep);
    const auto rows = data_rows(csv.str());
    EXPECT_EQ(rows.size(), 8u);
    EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [](const std::string& s) { return s.find(",PASS,") != std::string::npos; }), pass);
}

TEST(Report, MissingSummaryIsListed) {
    const fs::path root = scratch("missing");
    fs::create_directories(root / "a");
    std::ofstream(root / "a" / "resolved_config.yaml") << "scenario: consensus-lagrangian\n";
    try {
        collect_report(root);
        FAIL() << "expected an error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("summary.txt"), std::string::npos);
    }
    EXPECT_THROW(collect_report(scratch("empty")), ConfigError);
}

TEST(Cli, IdenticalInvocationsGiveIdenticalTables) {
    const fs::path root = scratch("determinism");
    const std::string base = "run --config " + kScenarios + "/theorem2_switching.yaml --set integrator.horizon=2 --seed 3 --out ";
    // Two seconds is short of the thresholds; only the tables matter here.
    const int rc = cli(base + (root / "a").string());
    EXPECT_EQ(cli(base + (root / "b").string()), rc);
    for (const char* f : {"trajectory.csv", "events.csv", "resolved_config.yaml"})
        EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;
    EXPECT_NE(slurp(root / "a" / "resolved_config.yaml").find("seed: 3"), std::string::npos);
}

TEST(Cli, ZeroHorizonGivesSingleRow) {
    const fs::path root = scratch("zero");
    cli("run --config " + kScenarios + "/theorem1_consensus.yaml --set integrator.horizon=0 --out " + root.string());
    const auto rows = data_rows(slurp(root / "trajectory.csv"));
    EXPECT_EQ(rows.size(), 2u);   // header plus t = 0
}

TEST(Cli, ExitCodes) {
    const fs::path root = scratch("codes");
    const fs::path bad = root / "bad.yaml";
    std::ofstream(bad) << "scenario: distributed-tracking\nagents: {count: 1}\ntopology:\n  graphs:\n"
                          "    - [[0, 0], [1, 0]]\nrefdyn: {variant: first, gamma: 0.1}\n";
    EXPECT_EQ(cli("validate --config " + bad.string()), 2);
    EXPECT_EQ(cli("validate --config " + kScenarios + "/theorem8_tracking.yaml"), 0);
    // Threshold failure: horizon too short to converge.
    EXPECT_EQ(cli("run --config " + kScenarios + "/theorem1_consensus.yaml --set integrator.horizon=1 --out " +
                  (root / "short").string()),
              1);
    EXPECT_NE(slurp(root / "short" / "summary.txt").find("result=FAIL"), std::string::npos);
    EXPECT_EQ(cli("report --dir " + root.string()), 1);
    EXPECT_EQ(cli("run --config " + kScenarios + "/theorem1_consensus.yaml --set integrator.nope=1 --out " +
                  (root / "x").string()),
              2);
    EXPECT_NE(cli("frobnicate"), 0);
}

TEST(Cli, OutputRootFromEnvironment) {
    const fs::path root = scratch("env");
    ASSERT_EQ(cli("run --config " + kScenarios + "/pointmass_output_feedback.yaml", "FORWARDSTEP_OUT=" + root.string()), 0);
    EXPECT_TRUE(fs::exists(root / "pointmass_output_feedback" / "summary.txt"));
    EXPECT_EQ(cli("report --dir " + root.string()), 0);
    EXPECT_TRUE(fs::exists(root / "report.csv"));
}

TEST(Cli, SuiteSweepWritesScaling) {
    const fs::path root = scratch("suite");
    const fs::path dir = root / "in";
    fs::create_directories(dir);
    fs::copy_file(kScenarios + "/theorem2_switching.yaml", dir / "sw.yaml");
    std::ofstream(dir / "suite.yaml") << "runs:\n  - config: sw.yaml\n    name: jump\n"
                                         "    set: [integrator.horizon=2]\n"
                                         "    sweep: {key: integrator.step, values: [0.002, 0.001]}\n";
    ASSERT_EQ(cli("suite --dir " + dir.string() + " --out " + (root / "out").string()), 0);
    const std::string scaling = slurp(root / "out" / "jump" / "scaling.csv");
    EXPECT_EQ(data_rows(scaling).size(), 3u);
    EXPECT_NE(scaling.find("# exponent="), std::string::npos);
}
