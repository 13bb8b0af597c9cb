#pragma once

// Flat Cartesian world-frame geometry: satellite placement, line-of-sight
// unit vectors and elevation angles. Vehicles live on the z = 0 road plane.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vloc/error.hpp"

namespace vloc::geo {

using WorldPoint = Eigen::Vector3d;
using UnitVector = Eigen::Vector3d;

inline constexpr double kSatelliteRadius = 2.02e7;        // [m]
inline constexpr double kMinSatelliteDistance = 1.0e7;    // far-field bound [m]
inline constexpr double kMinSatelliteSeparation = 1.0e6;  // [m]
inline constexpr double kMinElevation = 5.0 * std::numbers::pi / 180.0;

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

struct SatelliteState {
    int id = 0;
    WorldPoint position = WorldPoint::Zero();
    double common_noise = 0.0;  ///< satellite-shared range error [m]
};

struct ElevationRange {
    double min_rad = deg2rad(15.0);
    double max_rad = deg2rad(85.0);
};

class Constellation {
public:
    Constellation() = default;

    explicit Constellation(std::vector<SatelliteState> satellites)
        : satellites_(std::move(satellites)) {
        if (satellites_.size() < 4) {
            throw InsufficientSatellitesError("constellation needs at least 4 satellites, got " +
                                              std::to_string(satellites_.size()));
        }
        for (std::size_t i = 0; i < satellites_.size(); ++i) {
            for (std::size_t j = i + 1; j < satellites_.size(); ++j) {
                if (satellites_[i].id == satellites_[j].id) {
                    throw Error("duplicate satellite id " + std::to_string(satellites_[i].id));
                }
            }
        }
    }

    const std::vector<SatelliteState>& satellites() const { return satellites_; }
    std::size_t size() const { return satellites_.size(); }

    const SatelliteState& find(int id) const {
        for (const auto& s : satellites_) {
            if (s.id == id) return s;
        }
        throw Error("unknown satellite id " + std::to_string(id));
    }

    /// Mutable access, used by scenario code to assign per-satellite common noise.
    std::vector<SatelliteState>& satellites_mut() { return satellites_; }

private:
    std::vector<SatelliteState> satellites_;
};

inline UnitVector unit_vector(const WorldPoint& receiver, const WorldPoint& target) {
    const WorldPoint d = target - receiver;
    const double n = d.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DegenerateGeometryError("unit vector between coincident points");
    }
    return d / n;
}

inline UnitVector unit_vector(const WorldPoint& receiver, const SatelliteState& sat) {
    return unit_vector(receiver, sat.position);
}

/// Angle between the receiver->satellite line and the z = 0 plane, in [-pi/2, pi/2].
inline double elevation_angle(const WorldPoint& receiver, const SatelliteState& sat) {
    const WorldPoint d = sat.position - receiver;
    const double horizontal = std::hypot(d.x(), d.y());
    if (horizontal == 0.0 && d.z() == 0.0) {
        throw DegenerateGeometryError("elevation of a satellite coincident with the receiver");
    }
    return std::atan2(d.z(), horizontal);
}

/// Places n satellites on a sphere of radius kSatelliteRadius around `center`
/// with azimuth ~ U[0, 2pi) and elevation ~ U[range]. Redraws a satellite that
/// lands within kMinSatelliteSeparation of an earlier one.
inline Constellation make_constellation(int n, std::uint64_t seed,
                                        ElevationRange range = {},
                                        const WorldPoint& center = WorldPoint::Zero()) {
    if (n < 4) {
        throw InsufficientSatellitesError("at least 4 satellites required, got " +
                                          std::to_string(n));
    }
    if (range.min_rad < kMinElevation - 1e-12 || range.max_rad > std::numbers::pi / 2 ||
        range.min_rad > range.max_rad) {
        throw Error("elevation range must lie within [5 deg, 90 deg]");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> azimuth(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> elevation(range.min_rad, range.max_rad);

    std::vector<SatelliteState> sats;
    sats.reserve(static_cast<std::size_t>(n));
    constexpr int kMaxAttempts = 1000;
    for (int i = 0; i < n; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            const double az = azimuth(rng);
            const double el = elevation(rng);
            const WorldPoint p =
                center + kSatelliteRadius * WorldPoint(std::cos(el) * std::cos(az),
                                                       std::cos(el) * std::sin(az), std::sin(el));
            placed = true;
            for (const auto& s : sats) {
                if ((s.position - p).norm() < kMinSatelliteSeparation) {
                    placed = false;
                    break;
                }
            }
            if (placed) sats.push_back({i + 1, p, 0.0});
        }
        if (!placed) {
            throw DegenerateGeometryError("cannot place satellite " + std::to_string(i + 1) +
                                          " with the required separation");
        }
    }
    return Constellation(std::move(sats));
}

}  // namespace vloc::geo
