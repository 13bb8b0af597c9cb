#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vloc/error.hpp"
#include "vloc/types.hpp"

namespace vloc::netsim {

/// Undirected communication graph. Neighbor lists are kept sorted by id.
class NeighborGraph {
public:
    NeighborGraph() = default;

    void add_vehicle(VehicleId id) { adjacency_.try_emplace(id); }

    void add_edge(VehicleId a, VehicleId b) {
        if (a == b) throw Error("self edge on vehicle " + std::to_string(a));
        insert_sorted(adjacency_[a], b);
        insert_sorted(adjacency_[b], a);
    }

    bool contains(VehicleId id) const { return adjacency_.count(id) != 0; }

    bool has_edge(VehicleId a, VehicleId b) const {
        auto it = adjacency_.find(a);
        if (it == adjacency_.end()) return false;
        return std::binary_search(it->second.begin(), it->second.end(), b);
    }

    const std::vector<VehicleId>& neighbors(VehicleId id) const {
        auto it = adjacency_.find(id);
        if (it == adjacency_.end()) throw Error("unknown vehicle " + std::to_string(id));
        return it->second;
    }

    std::vector<VehicleId> vehicles() const {
        std::vector<VehicleId> ids;
        ids.reserve(adjacency_.size());
        for (const auto& [id, _] : adjacency_) ids.push_back(id);
        return ids;
    }

    /// Undirected edges as (lower id, higher id), ascending.
    std::vector<std::pair<VehicleId, VehicleId>> edges() const {
        std::vector<std::pair<VehicleId, VehicleId>> out;
        for (const auto& [id, nbrs] : adjacency_) {
            for (VehicleId n : nbrs) {
                if (id < n) out.emplace_back(id, n);
            }
        }
        return out;
    }

    std::size_t vehicle_count() const { return adjacency_.size(); }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (const auto& [_, nbrs] : adjacency_) twice += nbrs.size();
        return twice / 2;
    }

private:
    static void insert_sorted(std::vector<VehicleId>& v, VehicleId id) {
        auto it = std::lower_bound(v.begin(), v.end(), id);
        if (it == v.end() || *it != id) v.insert(it, id);
    }

    std::map<VehicleId, std::vector<VehicleId>> adjacency_;
};

/// Edge (i, j) iff the Euclidean distance between true positions is <= range.
inline NeighborGraph build_neighbor_graph(const TrafficSnapshot& snapshot, double range) {
    if (!(range > 0.0)) throw Error("communication range must be positive");
    NeighborGraph g;
    const auto& vs = snapshot.vehicles;
    for (const auto& v : vs) g.add_vehicle(v.id);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        for (std::size_t j = i + 1; j < vs.size(); ++j) {
            if ((vs[i].position - vs[j].position).norm() <= range) g.add_edge(vs[i].id, vs[j].id);
        }
    }
    return g;
}

}  // namespace vloc::netsim
