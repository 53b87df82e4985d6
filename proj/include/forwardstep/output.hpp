#pragma once

#include "forwardstep/config.hpp"
#include "forwardstep/sim.hpp"

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace fstep {

/// Shortest round-trip decimal form.
std::string format_number(double x);

/// Header names of the trajectory table, "t" first.
std::vector<std::string> trajectory_columns(const RunRecord& r);
void write_trajectory(std::ostream& os, const ScenarioConfig& c, const RunRecord& r);
void write_events(std::ostream& os, const ScenarioConfig& c, const RunRecord& r);

struct ThresholdCheck {
    std::string metric;
    std::string side;   // max | min
    double limit = 0.0;
    double value = 0.0;
    bool pass = false;
};

/// Compares record metrics with the configured thresholds; a missing metric fails.
std::vector<ThresholdCheck> check_thresholds(const ScenarioConfig& c, const RunRecord& r);
bool run_passed(const RunRecord& r, const std::vector<ThresholdCheck>& checks);

/// key=value summary: identity, status, metrics, threshold checks and the verdict.
void write_summary(std::ostream& os, const ScenarioConfig& c, const RunRecord& r,
                   const std::vector<ThresholdCheck>& checks, const std::vector<std::string>& warnings);

/// Writes trajectory.csv, events.csv, summary.txt and resolved_config.yaml into `dir`
/// (created if needed). Returns true when the run completed and every threshold passed.
bool write_run(const std::filesystem::path& dir, const ScenarioConfig& c, const RunRecord& r,
               const std::vector<std::string>& warnings);

/// Parses a summary.txt body.
std::map<std::string, std::string> read_summary(std::istream& in);

struct ReportRow {
    std::string run;        // directory relative to the report root
    std::string scenario;
    std::string name;
    std::string status;
    std::string verdict;    // PASS | FAIL
    std::vector<std::pair<std::string, std::string>> metrics;
    std::string runtime;
};

struct Report {
    std::vector<ReportRow> rows;
    int passed = 0;
    int failed = 0;
};

/// Collects every run directory below `root` (a directory holding resolved_config.yaml
/// or summary.txt). Throws ConfigError listing run directories whose summary is missing,
/// or when none exist.
Report collect_report(const std::filesystem::path& root);
void write_report_text(std::ostream& os, const Report& r);
void write_report_csv(std::ostream& os, const Report& r);

}  // namespace fstep
