#pragma once

// Batch experiment runner behind the `vloc` command-line tool.
//
// Output files (all CSV files start with a header row):
//   per_vehicle.csv  trial,vehicle_id,true_x,true_y,fix_x,fix_y,est_x,est_y,gps_err_m,dlea_err_m
//   summary.csv      deviation,avg_gps_error_m,avg_dlea_error_m,trials,convergence_failures
//                    (sweeps over a parameter other than deviation append a column named
//                    after that parameter)
//   manifest.txt     key = value run metadata, config snapshot and output digests
//   trace.ldr        optional; `round,from,to,payload-kind,payload-digest` per message,
//                    each trial introduced by a `# trial <n>` line

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "vloc/cli/kv_config.hpp"
#include "vloc/digest.hpp"
#include "vloc/netsim/message.hpp"
#include "vloc/scenario/experiment.hpp"

namespace vloc::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsageError = 1, kConfigError = 2, kRuntimeError = 3 };

struct RunOptions {
    std::string config_path;  ///< empty: built-in defaults
    std::string out_dir = "out";
    std::vector<std::pair<std::string, std::string>> overrides;  ///< applied after the file
    bool trace = false;
    int workers = 1;
};

struct SweepSpec {
    std::string parameter = "deviation";
    std::vector<std::string> values = {"5", "10", "15"};
};

struct SummaryRow {
    double deviation = 0.0;
    double avg_gps = 0.0;
    double avg_dlea = 0.0;
    int trials = 0;
    std::size_t convergence_failures = 0;
    std::size_t failed_trials = 0;
    std::string swept_value;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", v);
    return buf;
}

inline std::string timestamp_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

/// Pooled means over every vehicle row of every successful trial.
inline SummaryRow summarize(const scenario::ScenarioConfig& config,
                            const std::vector<scenario::TrialResult>& results) {
    SummaryRow row;
    row.deviation = config.gps_error.stddev.x();
    row.trials = static_cast<int>(results.size());
    std::size_t n = 0;
    for (const auto& r : results) {
        if (r.error) {
            ++row.failed_trials;
            continue;
        }
        row.convergence_failures += r.convergence_failures();
        for (const auto& v : r.report.per_vehicle) {
            row.avg_gps += v.gps_error;
            row.avg_dlea += v.dlea_error;
            ++n;
        }
    }
    if (n > 0) {
        row.avg_gps /= static_cast<double>(n);
        row.avg_dlea /= static_cast<double>(n);
    }
    return row;
}

inline void write_per_vehicle_csv(const std::filesystem::path& path,
                                  const std::vector<scenario::TrialResult>& results) {
    std::ofstream out(path, std::ios::binary);
    out << "trial,vehicle_id,true_x,true_y,fix_x,fix_y,est_x,est_y,gps_err_m,dlea_err_m\n";
    using detail::fmt;
    for (const auto& r : results) {
        if (r.error) continue;
        for (std::size_t i = 0; i < r.snapshot.vehicles.size(); ++i) {
            const auto& v = r.snapshot.vehicles[i];
            const auto& fix = r.fixes.at(v.id).position;
            const auto& est = r.protocol.finals.at(v.id).position;
            const auto& err = r.report.per_vehicle[i];
            out << r.trial << ',' << v.id << ',' << fmt(v.position.x()) << ',' << fmt(v.position.y())
                << ',' << fmt(fix.x()) << ',' << fmt(fix.y()) << ',' << fmt(est.x()) << ','
                << fmt(est.y()) << ',' << fmt(err.gps_error) << ',' << fmt(err.dlea_error) << '\n';
        }
    }
}

inline void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows,
                              const std::string& extra_column = "") {
    std::ofstream out(path, std::ios::binary);
    out << "deviation,avg_gps_error_m,avg_dlea_error_m,trials,convergence_failures";
    if (!extra_column.empty()) out << ',' << extra_column;
    out << '\n';
    for (const auto& r : rows) {
        out << detail::fmt(r.deviation) << ',' << detail::fmt(r.avg_gps) << ','
            << detail::fmt(r.avg_dlea) << ',' << r.trials << ',' << r.convergence_failures;
        if (!extra_column.empty()) out << ',' << r.swept_value;
        out << '\n';
    }
}

inline void write_trace_file(const std::filesystem::path& path,
                             const std::vector<scenario::TrialResult>& results) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& r : results) {
        out << "# trial " << r.trial << '\n';
        netsim::write_trace(out, r.protocol.trace);
    }
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& command,
                           const scenario::ScenarioConfig& config, const std::string& started,
                           const std::vector<std::filesystem::path>& outputs) {
    std::ofstream out(dir / "manifest.txt", std::ios::binary);
    out << "version = " << kVersion << '\n'
        << "command = " << command << '\n'
        << "seed = " << config.seed << '\n'
        << "started = " << started << '\n'
        << "finished = " << detail::timestamp_utc() << '\n';
    std::istringstream cfg(render_config(config));
    for (std::string line; std::getline(cfg, line);) out << "config." << line << '\n';
    for (const auto& p : outputs) {
        out << "digest." << std::filesystem::relative(p, dir).generic_string() << " = "
            << file_digest(p.string()) << '\n';
    }
}

/// Loads the config file (if any), applies overrides and validates.
inline ParsedConfig resolve_config(const std::string& config_path,
                                   const std::vector<std::pair<std::string, std::string>>& overrides) {
    ParsedConfig parsed = config_path.empty() ? ParsedConfig{} : load_config(config_path);
    for (const auto& [k, v] : overrides) {
        if (const std::string err = set_key(parsed.config, k, v); !err.empty()) {
            parsed.diagnostics.push_back({0, k, "command-line override: " + err});
        } else {
            parsed.key_lines.erase(k);
        }
    }
    parsed.diagnostics = check_config(parsed);
    return parsed;
}

namespace detail {

inline bool report_diagnostics(const ParsedConfig& parsed, const std::string& source, std::ostream& err) {
    for (const auto& d : parsed.diagnostics) err << "config error: " << d.format(source) << '\n';
    return parsed.diagnostics.empty();
}

struct PointOutcome {
    SummaryRow row;
    std::vector<std::filesystem::path> files;
    bool runtime_error = false;
};

inline PointOutcome run_point(const scenario::ScenarioConfig& config, const std::filesystem::path& dir,
                              const RunOptions& opts, std::ostream& err) {
    PointOutcome o;
    std::filesystem::create_directories(dir);
    const auto results = scenario::run_trials(config, opts.workers);
    for (const auto& r : results) {
        if (r.error) {
            err << "trial " << r.trial << " failed: " << *r.error << '\n';
            o.runtime_error = true;
        }
    }
    o.row = summarize(config, results);
    write_per_vehicle_csv(dir / "per_vehicle.csv", results);
    o.files.push_back(dir / "per_vehicle.csv");
    if (opts.trace) {
        write_trace_file(dir / "trace.ldr", results);
        o.files.push_back(dir / "trace.ldr");
    }
    return o;
}

}  // namespace detail

inline int run_command(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    const auto parsed = resolve_config(opts.config_path, opts.overrides);
    if (!detail::report_diagnostics(parsed, opts.config_path, err)) return kConfigError;
    const std::string started = detail::timestamp_utc();
    try {
        const std::filesystem::path dir(opts.out_dir);
        auto point = detail::run_point(parsed.config, dir, opts, err);
        write_summary_csv(dir / "summary.csv", {point.row});
        point.files.push_back(dir / "summary.csv");
        write_manifest(dir, "run", parsed.config, started, point.files);
        out << "deviation " << point.row.deviation << ": avg GPS error " << point.row.avg_gps
            << " m, avg DLEA error " << point.row.avg_dlea << " m over " << point.row.trials
            << " trials (" << point.row.convergence_failures << " convergence failures)\n";
        return point.runtime_error ? kRuntimeError : kOk;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

inline int sweep_command(const RunOptions& opts, const SweepSpec& sweep, std::ostream& out,
                         std::ostream& err) {
    if (sweep.values.empty()) {
        err << "config error: sweep needs at least one value\n";
        return kConfigError;
    }
    const auto& keys = config_keys();
    if (sweep.parameter != "deviation" &&
        std::find(keys.begin(), keys.end(), sweep.parameter) == keys.end()) {
        err << "config error: " << sweep.parameter << ": not a configuration parameter\n";
        return kConfigError;
    }
    std::vector<scenario::ScenarioConfig> points;
    for (const auto& value : sweep.values) {
        auto overrides = opts.overrides;
        overrides.emplace_back(sweep.parameter, value);
        const auto parsed = resolve_config(opts.config_path, overrides);
        if (!detail::report_diagnostics(parsed, opts.config_path, err)) return kConfigError;
        points.push_back(parsed.config);
    }

    const std::string started = detail::timestamp_utc();
    try {
        const std::filesystem::path dir(opts.out_dir);
        std::vector<SummaryRow> rows;
        std::vector<std::filesystem::path> files;
        bool runtime_error = false;
        for (std::size_t i = 0; i < points.size(); ++i) {
            auto point = detail::run_point(points[i], dir / (sweep.parameter + "_" + sweep.values[i]),
                                           opts, err);
            point.row.swept_value = sweep.values[i];
            runtime_error = runtime_error || point.runtime_error;
            rows.push_back(point.row);
            files.insert(files.end(), point.files.begin(), point.files.end());
            out << sweep.parameter << " = " << sweep.values[i] << ": avg GPS error " << point.row.avg_gps
                << " m, avg DLEA error " << point.row.avg_dlea << " m\n";
        }
        write_summary_csv(dir / "summary.csv", rows, sweep.parameter == "deviation" ? "" : sweep.parameter);
        files.push_back(dir / "summary.csv");
        write_manifest(dir, "sweep " + sweep.parameter, points.front(), started, files);
        return runtime_error ? kRuntimeError : kOk;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

/// Checks the configuration without running it and prints the effective values.
inline int validate_command(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    const auto parsed = resolve_config(opts.config_path, opts.overrides);
    out << render_config(parsed.config);
    if (!detail::report_diagnostics(parsed, opts.config_path, err)) return kConfigError;
    out << "# configuration is valid\n";
    return kOk;
}

}  // namespace vloc::cli
