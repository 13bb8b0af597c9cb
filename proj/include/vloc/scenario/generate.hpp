#pragma once

// Ground truth and noisy observations for one static traffic snapshot.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>

#include "vloc/geo.hpp"
#include "vloc/netsim/graph.hpp"
#include "vloc/ranging.hpp"
#include "vloc/scenario/config.hpp"
#include "vloc/types.hpp"

namespace vloc::scenario {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of trial `trial` (0-based): splitmix64(seed XOR splitmix64(trial)).
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
    return splitmix64(seed ^ splitmix64(trial));
}

/// Independent random streams derived from one trial seed.
enum class Stream : std::uint64_t { traffic = 1, gps = 2, distance = 3, constellation = 4, pseudorange = 5 };

inline std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
    return splitmix64(seed + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(s));
}

namespace detail {
inline double gaussian(std::mt19937_64& rng, double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(rng);
}
}  // namespace detail

/// Poisson-process placement along the road: exponential gaps with mean
/// config.mean_spacing(), each vehicle at the center of a uniformly drawn lane.
/// Ids are dense from 1 in order along the road.
inline TrafficSnapshot generate_traffic(const ScenarioConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(1.0 / config.mean_spacing());
    std::uniform_int_distribution<int> lane(0, config.lanes - 1);
    TrafficSnapshot snap;
    double x = gap(rng);
    VehicleId id = 1;
    while (x <= config.road_length) {
        const double y = (lane(rng) + 0.5) * config.lane_width;
        snap.vehicles.push_back({id++, Point2(x, y)});
        x += gap(rng);
    }
    return snap;
}

/// fix = truth + delta, delta ~ N(mean, stddev^2) independently per axis.
/// A zero standard deviation yields the mean offset exactly.
inline std::map<VehicleId, GpsFix> apply_gps_error(const TrafficSnapshot& snapshot,
                                                   const NoiseModel& noise, std::uint64_t seed) {
    if (!(noise.stddev.x() >= 0.0) || !(noise.stddev.y() >= 0.0)) {
        throw Error("GPS error standard deviation must be non-negative");
    }
    std::mt19937_64 rng(seed);
    std::map<VehicleId, GpsFix> fixes;
    for (const auto& v : snapshot.vehicles) {
        const double dx = detail::gaussian(rng, noise.mean.x(), noise.stddev.x());
        const double dy = detail::gaussian(rng, noise.mean.y(), noise.stddev.y());
        fixes[v.id] = GpsFix{v.id, v.position + Point2(dx, dy)};
    }
    return fixes;
}

/// One draw per undirected edge (ascending edge order): d~ = max(0, d + eps).
inline DistanceTable apply_distance_error(const TrafficSnapshot& snapshot,
                                          const netsim::NeighborGraph& graph, double stddev,
                                          std::uint64_t seed) {
    if (!(stddev >= 0.0)) throw Error("distance error standard deviation must be non-negative");
    std::mt19937_64 rng(seed);
    DistanceTable table;
    for (const auto& [a, b] : graph.edges()) {
        const double d = snapshot.true_distance(a, b);
        table.set(a, b, std::max(0.0, d + detail::gaussian(rng, 0.0, stddev)));
    }
    return table;
}

/// Carrier-to-noise ratio model: 35 + 10 sin(elevation) dB-Hz plus Gaussian
/// per-receiver jitter, clamped to [20, 55] dB-Hz.
inline double model_cnr(double elevation_rad, double jitter) {
    return std::clamp(35.0 + 10.0 * std::sin(elevation_rad) + jitter, 20.0, 55.0);
}

inline geo::Constellation make_scenario_constellation(const ScenarioConfig& config,
                                                      std::uint64_t seed) {
    const geo::WorldPoint center(0.5 * config.road_length, 0.5 * config.road_width, 0.0);
    auto c = geo::make_constellation(config.satellites, seed,
                                     {geo::deg2rad(config.elevation_min_deg),
                                      geo::deg2rad(config.elevation_max_deg)},
                                     center);
    std::mt19937_64 rng(splitmix64(seed));
    for (auto& s : c.satellites_mut()) s.common_noise = detail::gaussian(rng, 0.0, config.common_noise_std);
    return c;
}

/// Raw pseudoranges of every vehicle to every satellite:
/// PR = range + clock_bias + common_noise + eps, eps ~ N(0, (scale * c / cnr)^2).
inline std::map<VehicleId, ranging::PseudorangeSet> synthesize_pseudoranges(
    const TrafficSnapshot& snapshot, const geo::Constellation& constellation,
    const ScenarioConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::map<VehicleId, ranging::PseudorangeSet> out;
    for (const auto& v : snapshot.vehicles) {
        const geo::WorldPoint p(v.position.x(), v.position.y(), 0.0);
        ranging::PseudorangeSet set;
        set.receiver_id = v.id;
        set.clock_bias = detail::gaussian(rng, 0.0, config.clock_bias_std);
        for (const auto& sat : constellation.satellites()) {
            const double el = geo::elevation_angle(p, sat);
            const double cnr = model_cnr(el, detail::gaussian(rng, 0.0, config.cnr_jitter_std));
            const double eps = detail::gaussian(
                rng, 0.0, config.pseudorange_noise_scale * ranging::noncommon_noise_sigma(cnr));
            const double value = ranging::synthesize_pseudorange((sat.position - p).norm(),
                                                                 set.clock_bias, sat.common_noise, eps);
            set.observations.push_back({sat.id, value, cnr});
        }
        out[v.id] = std::move(set);
    }
    return out;
}

}  // namespace vloc::scenario
