#pragma once

#include <map>

#include "vloc/netsim/graph.hpp"
#include "vloc/types.hpp"

namespace vloc::test {

// Six vehicles laid out so that a 100 m radio range yields the seven edges
// 1-2, 1-3, 1-4, 1-5, 4-5, 4-6, 5-6: N_1 = {2,3,4,5} and N_6 = {4,5}.
inline TrafficSnapshot six_vehicle_snapshot() {
    TrafficSnapshot s;
    s.vehicles = {{1, {100.0, 100.0}}, {2, {20.0, 130.0}}, {3, {60.0, 30.0}},
                  {4, {170.0, 130.0}}, {5, {170.0, 60.0}}, {6, {240.0, 95.0}}};
    return s;
}
inline constexpr double kSixVehicleRange = 100.0;

inline RoadSpace six_vehicle_space() { return {0.0, 300.0, 0.0, 200.0}; }

inline std::map<VehicleId, GpsFix> exact_fixes(const TrafficSnapshot& s) {
    std::map<VehicleId, GpsFix> f;
    for (const auto& v : s.vehicles) f[v.id] = {v.id, v.position};
    return f;
}

inline DistanceTable exact_distances(const TrafficSnapshot& s, const netsim::NeighborGraph& g) {
    DistanceTable t;
    for (const auto& [a, b] : g.edges()) t.set(a, b, s.true_distance(a, b));
    return t;
}

}  // namespace vloc::test
