// Command-line harness: run, suite, validate, report.
#include "forwardstep/config.hpp"
#include "forwardstep/output.hpp"
#include "forwardstep/sim.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace fstep;

namespace {

constexpr int kFail = 1;
constexpr int kConfigError = 2;

fs::path output_root(const std::string& given) {
    if (!given.empty()) return given;
    if (const char* env = std::getenv("FORWARDSTEP_OUT"); env && *env) return env;
    return "forwardstep-out";
}

std::string run_name(const ScenarioConfig& c, const fs::path& config) {
    return c.name.empty() ? config.stem().string() : c.name;
}

bool run_one(const fs::path& config, std::vector<std::string> sets, const fs::path& dir) {
    const auto loaded = load_config_file(config.string(), sets);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    const RunRecord rec = run(loaded.config);
    const bool ok = write_run(dir, loaded.config, rec, loaded.warnings);
    std::cout << (ok ? "PASS " : "FAIL ") << dir.string() << " status=" << rec.status;
    for (const auto& [k, v] : rec.metrics)
        if (k == "consensus_error" || k == "tracking_error") std::cout << " " << k << "=" << format_number(v);
    std::cout << " runtime_s=" << format_number(rec.runtime_s) << "\n";
    return ok;
}

// A suite directory either holds suite.yaml:
//   runs:
//     - config: file.yaml
//       name: optional-run-name
//       set: [key=value, ...]
//       sweep: {key: integrator.step, values: [...], metric: torque_jump_max}
// or, without it, every *.yaml file is run once. Sweep points pass when they complete.
struct SuiteEntry {
    fs::path config;
    std::string name;
    std::vector<std::string> sets;
    std::string sweep_key;
    std::vector<double> sweep_values;
    std::string sweep_metric;
};

std::vector<SuiteEntry> load_suite(const fs::path& dir) {
    std::vector<SuiteEntry> out;
    const fs::path manifest = dir / "suite.yaml";
    if (fs::exists(manifest)) {
        YAML::Node root;
        try {
            root = YAML::LoadFile(manifest.string());
        } catch (const YAML::Exception& e) {
            throw ConfigError(manifest.string() + ":" + std::to_string(e.mark.line + 1) + ":" +
                              std::to_string(e.mark.column + 1) + ": " + e.msg);
        }
        if (!root["runs"] || !root["runs"].IsSequence()) throw ConfigError(manifest.string() + ": 'runs' list required");
        for (const auto& n : root["runs"]) {
            SuiteEntry e;
            if (!n["config"]) throw ConfigError(manifest.string() + ": every run needs 'config'");
            e.config = dir / n["config"].as<std::string>();
            if (n["name"]) e.name = n["name"].as<std::string>();
            if (n["set"])
                for (const auto& s : n["set"]) e.sets.push_back(s.as<std::string>());
            if (const auto sw = n["sweep"]) {
                e.sweep_key = sw["key"].as<std::string>();
                e.sweep_values = sw["values"].as<std::vector<double>>();
                e.sweep_metric = sw["metric"] ? sw["metric"].as<std::string>() : "torque_jump_max";
            }
            out.push_back(std::move(e));
        }
        return out;
    }
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir))
        if (f.is_regular_file() && f.path().extension() == ".yaml") files.push_back(f.path());
    std::sort(files.begin(), files.end());
    for (auto& f : files) out.push_back({f, "", {}, "", {}, ""});
    if (out.empty()) throw ConfigError("no scenario files in " + dir.string());
    return out;
}

bool run_suite(const fs::path& dir, const fs::path& root) {
    bool all = true;
    for (const auto& e : load_suite(dir)) {
        const std::string name = e.name.empty() ? e.config.stem().string() : e.name;
        if (e.sweep_key.empty()) {
            all = run_one(e.config, e.sets, root / name) && all;
            continue;
        }
        std::vector<double> hs, values;
        for (double v : e.sweep_values) {
            auto sets = e.sets;
            sets.push_back(e.sweep_key + "=" + format_number(v));
            auto loaded = load_config_file(e.config.string(), sets);
            // Sweep points run on shortened horizons; only completion is judged.
            loaded.config.thresholds = {};
            const RunRecord rec = run(loaded.config);
            const fs::path sub = root / name / (e.sweep_key + "=" + format_number(v));
            all = write_run(sub, loaded.config, rec, loaded.warnings) && all;
            hs.push_back(v);
            values.push_back(rec.metric(e.sweep_metric));
            std::cout << name << " " << e.sweep_key << "=" << format_number(v) << " " << e.sweep_metric << "="
                      << format_number(values.back()) << " status=" << rec.status << "\n";
        }
        fs::create_directories(root / name);
        std::ofstream out(root / name / "scaling.csv", std::ios::binary);
        out << "# forwardstep sweep of " << e.sweep_metric << " over " << e.sweep_key << "\n";
        out << e.sweep_key << "," << e.sweep_metric << "\n";
        for (std::size_t k = 0; k < hs.size(); ++k) out << format_number(hs[k]) << "," << format_number(values[k]) << "\n";
        bool positive = std::all_of(values.begin(), values.end(), [](double v) { return v > 0.0; });
        if (hs.size() >= 2 && positive)
            out << "# exponent=" << format_number(scaling_exponent(hs, values)) << "\n";
    }
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forwardstepping control simulations"};
    app.require_subcommand(1);

    std::string config, out_dir, dir;
    std::vector<std::string> sets;
    std::int64_t seed = -1;

    auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its tables");
    run_cmd->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "Output directory (default $FORWARDSTEP_OUT/<name>)");
    run_cmd->add_option("--set", sets, "Override key.path=value")->take_all();
    run_cmd->add_option("--seed", seed, "Seed override")->check(CLI::NonNegativeNumber);

    auto* suite_cmd = app.add_subcommand("suite", "Run every scenario of a directory");
    suite_cmd->add_option("--dir", dir, "Suite directory")->required()->check(CLI::ExistingDirectory);
    suite_cmd->add_option("--out", out_dir, "Output root (default $FORWARDSTEP_OUT)");

    auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a scenario file");
    validate_cmd->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);

    auto* report_cmd = app.add_subcommand("report", "Aggregate run summaries");
    report_cmd->add_option("--dir", dir, "Directory holding run outputs")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            if (seed >= 0) sets.push_back("seed=" + std::to_string(seed));
            fs::path target = out_dir;
            if (target.empty()) {
                const auto loaded = load_config_file(config, sets);
                target = output_root("") / run_name(loaded.config, config);
            }
            return run_one(config, sets, target) ? 0 : kFail;
        }
        if (*suite_cmd) return run_suite(dir, output_root(out_dir)) ? 0 : kFail;
        if (*validate_cmd) {
            const auto loaded = load_config_file(config);
            for (const auto& w : loaded.warnings) std::cout << "warning: " << w << "\n";
            std::cout << "ok " << to_string(loaded.config.kind) << "\n";
            return 0;
        }
        if (*report_cmd) {
            const Report rep = collect_report(dir);
            write_report_text(std::cout, rep);
            std::ofstream txt(fs::path(dir) / "report.txt", std::ios::binary);
            write_report_text(txt, rep);
            std::ofstream csv(fs::path(dir) / "report.csv", std::ios::binary);
            write_report_csv(csv, rep);
            return rep.failed == 0 ? 0 : kFail;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFail;
    }
    return 0;
}
