#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vloc/error.hpp"

namespace vloc {

using VehicleId = std::uint32_t;
using Point2 = Eigen::Vector2d;

/// A vehicle's standalone GPS position fix on the road plane.
struct GpsFix {
    VehicleId vehicle_id = 0;
    Point2 position = Point2::Zero();
};

/// Per-axis Gaussian GPS error statistics.
struct NoiseModel {
    Point2 mean = Point2::Zero();
    Point2 stddev = Point2(10.0, 10.0);

    void validate() const {
        if (!(stddev.x() > 0.0) || !(stddev.y() > 0.0)) {
            throw Error("noise model standard deviations must be positive");
        }
    }
};

/// Rectangular box bounding every estimated position.
struct RoadSpace {
    double x_lb = 0.0;
    double x_ub = 500.0;
    double y_lb = 0.0;
    double y_ub = 9.0;

    void validate() const {
        if (!(x_lb < x_ub) || !(y_lb < y_ub)) {
            throw Error("road space bounds must satisfy lb < ub");
        }
    }
    double diagonal() const { return std::hypot(x_ub - x_lb, y_ub - y_lb); }
    Point2 clamp(const Point2& p) const {
        return {std::clamp(p.x(), x_lb, x_ub), std::clamp(p.y(), y_lb, y_ub)};
    }
    bool contains(const Point2& p) const {
        return p.x() >= x_lb && p.x() <= x_ub && p.y() >= y_lb && p.y() <= y_ub;
    }
};

/// Symmetric table of measured inter-vehicle distances.
class DistanceTable {
public:
    void set(VehicleId a, VehicleId b, double value) {
        if (a == b) throw Error("distance between a vehicle and itself");
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw InvalidRangeError("measured distance between " + std::to_string(a) + " and " +
                                    std::to_string(b) + " must be finite and non-negative");
        }
        values_[key(a, b)] = value;
    }

    double at(VehicleId a, VehicleId b) const {
        auto it = values_.find(key(a, b));
        if (it == values_.end()) {
            throw Error("no distance measurement for pair (" + std::to_string(a) + ", " +
                        std::to_string(b) + ")");
        }
        return it->second;
    }

    bool contains(VehicleId a, VehicleId b) const { return values_.count(key(a, b)) != 0; }
    std::size_t size() const { return values_.size(); }
    const std::map<std::pair<VehicleId, VehicleId>, double>& entries() const { return values_; }

private:
    static std::pair<VehicleId, VehicleId> key(VehicleId a, VehicleId b) {
        return a < b ? std::pair{a, b} : std::pair{b, a};
    }
    std::map<std::pair<VehicleId, VehicleId>, double> values_;
};

struct TrueVehicle {
    VehicleId id = 0;
    Point2 position = Point2::Zero();
};

/// Ground-truth vehicle positions for one static snapshot, ordered by id.
struct TrafficSnapshot {
    std::vector<TrueVehicle> vehicles;

    const TrueVehicle& find(VehicleId id) const {
        auto it = std::lower_bound(vehicles.begin(), vehicles.end(), id,
                                   [](const TrueVehicle& v, VehicleId key) { return v.id < key; });
        if (it != vehicles.end() && it->id == id) return *it;
        for (const auto& v : vehicles) {
            if (v.id == id) return v;
        }
        throw Error("unknown vehicle " + std::to_string(id));
    }
    double true_distance(VehicleId a, VehicleId b) const {
        return (find(a).position - find(b).position).norm();
    }
};

}  // namespace vloc
