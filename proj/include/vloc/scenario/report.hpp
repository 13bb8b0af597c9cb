#pragma once

#include <map>
#include <string>
#include <vector>

#include "vloc/dlea/fusion.hpp"
#include "vloc/error.hpp"
#include "vloc/types.hpp"

namespace vloc::scenario {

struct VehicleError {
    VehicleId id = 0;
    double gps_error = 0.0;   ///< |fix - truth| [m]
    double dlea_error = 0.0;  ///< |estimate - truth| [m]
};

struct ErrorReport {
    std::vector<VehicleError> per_vehicle;
    double avg_gps = 0.0;
    double avg_dlea = 0.0;
};

inline ErrorReport compute_error_report(const TrafficSnapshot& snapshot,
                                        const std::map<VehicleId, GpsFix>& fixes,
                                        const std::map<VehicleId, dlea::FinalEstimate>& finals) {
    ErrorReport r;
    for (const auto& v : snapshot.vehicles) {
        auto f = fixes.find(v.id);
        auto e = finals.find(v.id);
        if (f == fixes.end() || e == finals.end()) {
            throw IncompleteReportError("vehicle " + std::to_string(v.id) +
                                        " is missing a fix or a final estimate");
        }
        r.per_vehicle.push_back({v.id, (f->second.position - v.position).norm(),
                                 (e->second.position - v.position).norm()});
    }
    if (fixes.size() != snapshot.vehicles.size() || finals.size() != snapshot.vehicles.size()) {
        throw IncompleteReportError("fixes/estimates cover vehicles absent from the snapshot");
    }
    if (!r.per_vehicle.empty()) {
        for (const auto& row : r.per_vehicle) {
            r.avg_gps += row.gps_error;
            r.avg_dlea += row.dlea_error;
        }
        r.avg_gps /= static_cast<double>(r.per_vehicle.size());
        r.avg_dlea /= static_cast<double>(r.per_vehicle.size());
    }
    return r;
}

}  // namespace vloc::scenario
