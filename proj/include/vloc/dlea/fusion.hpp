#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vloc/dlea/solver.hpp"
#include "vloc/dlea/subset.hpp"
#include "vloc/error.hpp"
#include "vloc/types.hpp"

namespace vloc::dlea {

struct FinalEstimate {
    VehicleId vehicle_id = 0;
    Point2 position = Point2::Zero();
    std::vector<std::pair<VehicleId, double>> contributing_pivots;  ///< (pivot, normalized weight)
    bool fallback = false;  ///< true when the raw fix was used (isolated vehicle)
};

/// Weighted average of the tentative estimates of `vehicle` made by every
/// pivot in `own_subset` (the vehicle's own subset V^k). Each pivot s
/// contributes w_s / sum_{i in V^k} w_i.
inline FinalEstimate final_estimate(VehicleId vehicle, const Subset& own_subset,
                                    const std::map<VehicleId, const TentativeEstimateSet*>& tentatives,
                                    const std::map<VehicleId, int>& weights) {
    std::vector<VehicleId> missing;
    for (VehicleId s : own_subset.members) {
        auto t = tentatives.find(s);
        if (t == tentatives.end() || t->second == nullptr ||
            t->second->estimates.count(vehicle) == 0 || weights.count(s) == 0) {
            missing.push_back(s);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (VehicleId s : missing) list += (list.empty() ? "" : ", ") + std::to_string(s);
        throw IncompleteFusionError("vehicle " + std::to_string(vehicle) +
                                    " lacks tentative estimates from pivots: " + list);
    }

    double total = 0.0;
    for (VehicleId s : own_subset.members) {
        const int w = weights.at(s);
        if (w <= 0) throw Error("pivot weight must be positive");
        total += w;
    }
    FinalEstimate out;
    out.vehicle_id = vehicle;
    for (VehicleId s : own_subset.members) {
        const double nw = weights.at(s) / total;
        out.position += nw * tentatives.at(s)->estimates.at(vehicle);
        out.contributing_pivots.emplace_back(s, nw);
    }
    return out;
}

}  // namespace vloc::dlea
