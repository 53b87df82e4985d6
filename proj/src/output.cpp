#include "forwardstep/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fstep {

namespace fs = std::filesystem;

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

void provenance(std::ostream& os, const ScenarioConfig& c, const std::string& what) {
    os << "# forwardstep " << what << "\n";
    os << "# scenario=" << to_string(c.kind) << " name=" << c.name << " seed=" << c.seed << "\n";
    os << "# step=" << format_number(c.integrator.step) << " horizon=" << format_number(c.integrator.horizon)
       << " stride=" << c.integrator.stride << "\n";
}

void append_vec(std::vector<std::string>& cols, const std::string& prefix, long n) {
    for (long k = 0; k < n; ++k) cols.push_back(prefix + "_" + std::to_string(k));
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::vector<std::string> trajectory_columns(const RunRecord& r) {
    std::vector<std::string> cols{"t"};
    if (r.samples.empty()) return cols;
    const Frame& f = r.samples.front();
    for (std::size_t i = 0; i < f.agents.size(); ++i) {
        const auto& a = f.agents[i];
        const std::string id = "a" + std::to_string(i);
        append_vec(cols, id + "_y", a.y.size());
        append_vec(cols, id + "_ydot", a.ydot.size());
        append_vec(cols, id + "_tau", a.tau.size());
        cols.push_back(id + "_V");
        for (const auto& e : r.agent_extra_names) cols.push_back(id + "_" + e);
    }
    append_vec(cols, "ref_y", f.y0.size());
    append_vec(cols, "ref_ydot", f.y0dot.size());
    return cols;
}

void write_trajectory(std::ostream& os, const ScenarioConfig& c, const RunRecord& r) {
    provenance(os, c, "trajectory");
    const auto cols = trajectory_columns(r);
    for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
    os << "\n";
    for (const auto& f : r.samples) {
        std::vector<std::string> row{format_number(f.t)};
        auto push = [&](const Vec& v) {
            for (long k = 0; k < v.size(); ++k) row.push_back(format_number(v(k)));
        };
        for (const auto& a : f.agents) {
            push(a.y);
            push(a.ydot);
            push(a.tau);
            row.push_back(format_number(a.lyapunov));
            for (std::size_t e = 0; e < r.agent_extra_names.size(); ++e)
                row.push_back(e < a.extra.size() ? format_number(a.extra[e]) : "nan");
        }
        push(f.y0);
        push(f.y0dot);
        // Keep the table rectangular even if an aborted frame is short.
        row.resize(cols.size(), "nan");
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
        os << "\n";
    }
}

void write_events(std::ostream& os, const ScenarioConfig& c, const RunRecord& r) {
    provenance(os, c, "events");
    os << "t,kind,agent,value,detail\n";
    for (const auto& e : r.events)
        os << format_number(e.t) << "," << e.kind << "," << e.agent << "," << format_number(e.value) << ","
           << csv_field(e.detail) << "\n";
    for (const auto& j : r.torque_jumps)
        os << format_number(j.t) << ",torque-jump,-1," << format_number(j.jump) << ",\n";
}

std::vector<ThresholdCheck> check_thresholds(const ScenarioConfig& c, const RunRecord& r) {
    std::vector<ThresholdCheck> out;
    for (const auto& [key, limit] : c.thresholds.max) {
        const double v = r.metric(key);
        out.push_back({key, "max", limit, v, !std::isnan(v) && v <= limit});
    }
    for (const auto& [key, limit] : c.thresholds.min) {
        const double v = r.metric(key);
        out.push_back({key, "min", limit, v, !std::isnan(v) && v >= limit});
    }
    return out;
}

bool run_passed(const RunRecord& r, const std::vector<ThresholdCheck>& checks) {
    return r.completed() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

void write_summary(std::ostream& os, const ScenarioConfig& c, const RunRecord& r,
                   const std::vector<ThresholdCheck>& checks, const std::vector<std::string>& warnings) {
    os << "scenario=" << to_string(c.kind) << "\n";
    os << "name=" << c.name << "\n";
    os << "seed=" << c.seed << "\n";
    os << "status=" << r.status << "\n";
    os << "steps=" << r.steps << "\n";
    os << "samples=" << r.samples.size() << "\n";
    os << "runtime_s=" << format_number(std::round(r.runtime_s * 1e3) / 1e3) << "\n";
    for (const auto& [k, v] : r.metrics) os << "metric." << k << "=" << format_number(v) << "\n";
    for (const auto& ch : checks)
        os << "check." << ch.side << "." << ch.metric << "=" << (ch.pass ? "pass" : "fail") << " "
           << format_number(ch.value) << " " << (ch.side == "max" ? "<=" : ">=") << " "
           << format_number(ch.limit) << "\n";
    for (std::size_t k = 0; k < warnings.size(); ++k) os << "warning." << k << "=" << warnings[k] << "\n";
    os << "result=" << (run_passed(r, checks) ? "PASS" : "FAIL") << "\n";
}

bool write_run(const fs::path& dir, const ScenarioConfig& c, const RunRecord& r,
               const std::vector<std::string>& warnings) {
    fs::create_directories(dir);
    const auto checks = check_thresholds(c, r);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("trajectory.csv");
        write_trajectory(out, c, r);
    }
    {
        auto out = open("events.csv");
        write_events(out, c, r);
    }
    {
        auto out = open("resolved_config.yaml");
        out << emit_config(c);
    }
    {
        auto out = open("summary.txt");
        write_summary(out, c, r, checks, warnings);
    }
    return run_passed(r, checks);
}

std::map<std::string, std::string> read_summary(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

Report collect_report(const fs::path& root) {
    if (!fs::is_directory(root)) throw ConfigError("report directory " + root.string() + " does not exist");
    std::vector<fs::path> runs;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename();
        if (name == "summary.txt" || name == "resolved_config.yaml") runs.push_back(e.path().parent_path());
    }
    std::sort(runs.begin(), runs.end());
    runs.erase(std::unique(runs.begin(), runs.end()), runs.end());
    if (runs.empty()) throw ConfigError("no run summaries found under " + root.string());

    std::vector<std::string> missing;
    Report rep;
    for (const auto& d : runs) {
        std::ifstream in(d / "summary.txt");
        if (!in) {
            missing.push_back((d / "summary.txt").string());
            continue;
        }
        const auto kv = read_summary(in);
        ReportRow row;
        row.run = fs::relative(d, root).generic_string();
        auto get = [&](const std::string& k) {
            const auto it = kv.find(k);
            return it == kv.end() ? std::string() : it->second;
        };
        row.scenario = get("scenario");
        row.name = get("name");
        row.status = get("status");
        row.verdict = get("result") == "PASS" ? "PASS" : "FAIL";
        row.runtime = get("runtime_s");
        for (const char* k : {"consensus_error", "consensus_velocity", "tracking_error", "tracking_rate_error"}) {
            const auto v = get(std::string("metric.") + k);
            if (!v.empty()) row.metrics.emplace_back(k, v);
        }
        (row.verdict == "PASS" ? rep.passed : rep.failed) += 1;
        rep.rows.push_back(std::move(row));
    }
    if (!missing.empty()) {
        std::string msg = "missing run summaries:";
        for (const auto& m : missing) msg += " " + m;
        throw ConfigError(msg);
    }
    return rep;
}

void write_report_text(std::ostream& os, const Report& r) {
    for (const auto& row : r.rows) {
        os << row.verdict << "  " << row.run << "  " << row.scenario << "  status=" << row.status;
        for (const auto& [k, v] : row.metrics) os << "  " << k << "=" << v;
        os << "  runtime_s=" << row.runtime << "\n";
    }
    os << "total=" << r.rows.size() << " passed=" << r.passed << " failed=" << r.failed << "\n";
}

void write_report_csv(std::ostream& os, const Report& r) {
    os << "run,scenario,name,status,verdict,consensus_error,consensus_velocity,tracking_error,"
          "tracking_rate_error,runtime_s\n";
    for (const auto& row : r.rows) {
        os << csv_field(row.run) << "," << row.scenario << "," << csv_field(row.name) << "," << row.status << ","
           << row.verdict;
        for (const char* k : {"consensus_error", "consensus_velocity", "tracking_error", "tracking_rate_error"}) {
            std::string v;
            for (const auto& [mk, mv] : row.metrics)
                if (mk == k) v = mv;
            os << "," << v;
        }
        os << "," << row.runtime << "\n";
    }
}

}  // namespace fstep
