#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vloc/dlea/subset.hpp"
#include "vloc/netsim/protocol.hpp"
#include "vloc/types.hpp"

namespace vloc::scenario {

/// Experiment parameters. Defaults reproduce the reference setup: a 500 m x
/// 9 m three-lane road, 150 m radio range, 50 vehicles/min at 50 km/h,
/// N(0, 10^2) GPS error per axis and N(0, 1^2) ranging error.
struct ScenarioConfig {
    double road_length = 500.0;        // [m]
    double road_width = 9.0;           // [m]
    int lanes = 3;
    double lane_width = 3.0;           // [m]
    double comm_range = 150.0;         // [m]
    double arrival_rate = 50.0;        // [vehicles/min]
    double mean_velocity = 50.0;       // [km/h]
    NoiseModel gps_error{Point2(0.0, 0.0), Point2(10.0, 10.0)};
    double distance_error_std = 1.0;   // [m], abstract ranging
    netsim::RangingMode ranging_mode = netsim::RangingMode::abstract;
    dlea::WeightMode weight_mode = dlea::WeightMode::subset;
    int satellites = 8;
    double elevation_min_deg = 15.0;
    double elevation_max_deg = 85.0;
    double common_noise_std = 3.0;         // [m], satellite-shared error
    double clock_bias_std = 3.0e4;         // [m]
    double cnr_jitter_std = 3.0;           // [dB-Hz]
    double pseudorange_noise_scale = 1.0;  // multiplies the c/cnr noise law; 0 disables it
    std::uint64_t seed = 1;
    int trials = 20;

    /// Mean longitudinal gap between consecutive vehicles [m]: the flow
    /// relation spacing = velocity / rate.
    double mean_spacing() const { return (mean_velocity * 1000.0 / 60.0) / arrival_rate; }

    RoadSpace road_space() const { return {0.0, road_length, 0.0, road_width}; }

    netsim::ProtocolConfig protocol_config() const {
        netsim::ProtocolConfig p;
        p.mode = ranging_mode;
        p.noise = gps_error;
        p.space = road_space();
        p.weight_mode = weight_mode;
        return p;
    }
};

struct Diagnostic {
    std::string field;
    std::string message;
};

inline std::vector<Diagnostic> validate(const ScenarioConfig& c) {
    std::vector<Diagnostic> out;
    auto positive = [&](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) out.push_back({name, "must be positive"});
    };
    auto non_negative = [&](const char* name, double v) {
        if (!(v >= 0.0) || !std::isfinite(v)) out.push_back({name, "must be non-negative"});
    };
    positive("road_length", c.road_length);
    positive("road_width", c.road_width);
    positive("lane_width", c.lane_width);
    positive("comm_range", c.comm_range);
    positive("arrival_rate", c.arrival_rate);
    positive("mean_velocity", c.mean_velocity);
    positive("gps_std_x", c.gps_error.stddev.x());
    positive("gps_std_y", c.gps_error.stddev.y());
    if (!std::isfinite(c.gps_error.mean.x())) out.push_back({"gps_mean_x", "must be finite"});
    if (!std::isfinite(c.gps_error.mean.y())) out.push_back({"gps_mean_y", "must be finite"});
    non_negative("distance_error_std", c.distance_error_std);
    non_negative("common_noise_std", c.common_noise_std);
    non_negative("clock_bias_std", c.clock_bias_std);
    non_negative("cnr_jitter_std", c.cnr_jitter_std);
    non_negative("pseudorange_noise_scale", c.pseudorange_noise_scale);
    if (c.lanes < 1) out.push_back({"lanes", "must be at least 1"});
    if (c.lanes >= 1 && c.lane_width > 0.0 &&
        std::abs(c.lanes * c.lane_width - c.road_width) > 1e-9 * std::max(1.0, c.road_width)) {
        out.push_back({"road_width", "lanes * lane_width (" + std::to_string(c.lanes * c.lane_width) +
                                         ") must equal road_width (" + std::to_string(c.road_width) + ")"});
    }
    if (c.satellites < 4) out.push_back({"satellites", "at least 4 satellites are required"});
    if (!(c.elevation_min_deg >= 5.0) || !(c.elevation_max_deg <= 90.0) ||
        !(c.elevation_min_deg <= c.elevation_max_deg)) {
        out.push_back({"elevation_min_deg", "elevation range must lie within [5, 90] degrees"});
    }
    if (c.trials < 1) out.push_back({"trials", "must be at least 1"});
    return out;
}

}  // namespace vloc::scenario
