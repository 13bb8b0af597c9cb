#pragma once

// Flat `key = value` configuration files. Blank lines and text after `#`
// are ignored. Keys mirror the ScenarioConfig fields; `deviation` is a
// shorthand that sets both gps_std_x and gps_std_y.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vloc/scenario/config.hpp"

namespace vloc::cli {

struct ConfigDiagnostic {
    int line = 0;  ///< 1-based; 0 when not tied to a file line
    std::string field;
    std::string message;

    std::string format(const std::string& source = "") const {
        std::string out = source;
        if (line > 0) out += (out.empty() ? "line " : ":") + std::to_string(line);
        if (!out.empty()) out += ": ";
        if (!field.empty()) out += field + ": ";
        return out + message;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [p, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && p == last;
}

template <typename Int>
bool parse_int(const std::string& s, Int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Keys accepted by set_key, in the order render_config prints them.
inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "road_length",  "road_width",     "lanes",
        "lane_width",   "comm_range",     "arrival_rate",
        "mean_velocity", "gps_mean_x",    "gps_mean_y",
        "gps_std_x",    "gps_std_y",      "distance_error_std",
        "ranging_mode", "weight_mode",    "satellites",
        "elevation_min_deg", "elevation_max_deg", "common_noise_std",
        "clock_bias_std", "cnr_jitter_std", "pseudorange_noise_scale",
        "seed",         "trials"};
    return keys;
}

/// Applies one key. Returns an error message, or an empty string on success.
inline std::string set_key(scenario::ScenarioConfig& c, const std::string& key, const std::string& value) {
    auto num = [&](double& field) -> std::string {
        return detail::parse_double(value, field) ? "" : "expected a number, got '" + value + "'";
    };
    auto integer = [&](int& field) -> std::string {
        return detail::parse_int(value, field) ? "" : "expected an integer, got '" + value + "'";
    };
    if (key == "road_length") return num(c.road_length);
    if (key == "road_width") return num(c.road_width);
    if (key == "lanes") return integer(c.lanes);
    if (key == "lane_width") return num(c.lane_width);
    if (key == "comm_range") return num(c.comm_range);
    if (key == "arrival_rate") return num(c.arrival_rate);
    if (key == "mean_velocity") return num(c.mean_velocity);
    if (key == "gps_mean_x") return num(c.gps_error.mean.x());
    if (key == "gps_mean_y") return num(c.gps_error.mean.y());
    if (key == "gps_std_x") return num(c.gps_error.stddev.x());
    if (key == "gps_std_y") return num(c.gps_error.stddev.y());
    if (key == "deviation") {
        double d = 0.0;
        if (!detail::parse_double(value, d)) return "expected a number, got '" + value + "'";
        c.gps_error.stddev = Point2(d, d);
        return "";
    }
    if (key == "distance_error_std") return num(c.distance_error_std);
    if (key == "ranging_mode") {
        if (value == "full") c.ranging_mode = netsim::RangingMode::full;
        else if (value == "abstract") c.ranging_mode = netsim::RangingMode::abstract;
        else return "expected 'full' or 'abstract', got '" + value + "'";
        return "";
    }
    if (key == "weight_mode") {
        if (value == "subset") c.weight_mode = dlea::WeightMode::subset;
        else if (value == "neighbors") c.weight_mode = dlea::WeightMode::neighbors;
        else return "expected 'subset' or 'neighbors', got '" + value + "'";
        return "";
    }
    if (key == "satellites") return integer(c.satellites);
    if (key == "elevation_min_deg") return num(c.elevation_min_deg);
    if (key == "elevation_max_deg") return num(c.elevation_max_deg);
    if (key == "common_noise_std") return num(c.common_noise_std);
    if (key == "clock_bias_std") return num(c.clock_bias_std);
    if (key == "cnr_jitter_std") return num(c.cnr_jitter_std);
    if (key == "pseudorange_noise_scale") return num(c.pseudorange_noise_scale);
    if (key == "seed") {
        return detail::parse_int(value, c.seed) ? "" : "expected an unsigned integer, got '" + value + "'";
    }
    if (key == "trials") return integer(c.trials);
    return "unknown key";
}

inline std::string get_key(const scenario::ScenarioConfig& c, const std::string& key) {
    using detail::fmt_double;
    if (key == "road_length") return fmt_double(c.road_length);
    if (key == "road_width") return fmt_double(c.road_width);
    if (key == "lanes") return std::to_string(c.lanes);
    if (key == "lane_width") return fmt_double(c.lane_width);
    if (key == "comm_range") return fmt_double(c.comm_range);
    if (key == "arrival_rate") return fmt_double(c.arrival_rate);
    if (key == "mean_velocity") return fmt_double(c.mean_velocity);
    if (key == "gps_mean_x") return fmt_double(c.gps_error.mean.x());
    if (key == "gps_mean_y") return fmt_double(c.gps_error.mean.y());
    if (key == "gps_std_x") return fmt_double(c.gps_error.stddev.x());
    if (key == "gps_std_y") return fmt_double(c.gps_error.stddev.y());
    if (key == "deviation") return fmt_double(c.gps_error.stddev.x());
    if (key == "distance_error_std") return fmt_double(c.distance_error_std);
    if (key == "ranging_mode") return netsim::to_string(c.ranging_mode);
    if (key == "weight_mode") return c.weight_mode == dlea::WeightMode::subset ? "subset" : "neighbors";
    if (key == "satellites") return std::to_string(c.satellites);
    if (key == "elevation_min_deg") return fmt_double(c.elevation_min_deg);
    if (key == "elevation_max_deg") return fmt_double(c.elevation_max_deg);
    if (key == "common_noise_std") return fmt_double(c.common_noise_std);
    if (key == "clock_bias_std") return fmt_double(c.clock_bias_std);
    if (key == "cnr_jitter_std") return fmt_double(c.cnr_jitter_std);
    if (key == "pseudorange_noise_scale") return fmt_double(c.pseudorange_noise_scale);
    if (key == "seed") return std::to_string(c.seed);
    if (key == "trials") return std::to_string(c.trials);
    throw ConfigError("unknown key '" + key + "'");
}

struct ParsedConfig {
    scenario::ScenarioConfig config;
    std::vector<ConfigDiagnostic> diagnostics;
    std::map<std::string, int> key_lines;  ///< where each key was set

    bool ok() const { return diagnostics.empty(); }
};

/// Parses text on top of `base`. Syntax errors, unknown keys and duplicate
/// keys become diagnostics; parsing continues past them.
inline ParsedConfig parse_config(std::istream& in, scenario::ScenarioConfig base = {}) {
    ParsedConfig out;
    out.config = base;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            out.diagnostics.push_back({line_no, "", "expected 'key = value'"});
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) {
            out.diagnostics.push_back({line_no, "", "missing key"});
            continue;
        }
        if (auto prev = out.key_lines.find(key); prev != out.key_lines.end()) {
            out.diagnostics.push_back(
                {line_no, key, "duplicate key (first set on line " + std::to_string(prev->second) + ")"});
            continue;
        }
        if (const std::string err = set_key(out.config, key, value); !err.empty()) {
            out.diagnostics.push_back({line_no, key, err});
            continue;
        }
        out.key_lines[key] = line_no;
    }
    return out;
}

inline ParsedConfig parse_config_text(const std::string& text, scenario::ScenarioConfig base = {}) {
    std::istringstream in(text);
    return parse_config(in, base);
}

inline ParsedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParsedConfig p;
        p.diagnostics.push_back({0, "", "cannot read config file '" + path + "'"});
        return p;
    }
    return parse_config(in);
}

/// Semantic checks, with line numbers attached where the key came from the file.
inline std::vector<ConfigDiagnostic> check_config(const ParsedConfig& parsed) {
    std::vector<ConfigDiagnostic> out = parsed.diagnostics;
    for (const auto& d : scenario::validate(parsed.config)) {
        int line = 0;
        if (auto it = parsed.key_lines.find(d.field); it != parsed.key_lines.end()) line = it->second;
        out.push_back({line, d.field, d.message});
    }
    return out;
}

/// Effective configuration as `key = value` lines, parseable by parse_config.
inline std::string render_config(const scenario::ScenarioConfig& c) {
    std::string out;
    for (const auto& k : config_keys()) out += k + " = " + get_key(c, k) + "\n";
    return out;
}

}  // namespace vloc::cli
