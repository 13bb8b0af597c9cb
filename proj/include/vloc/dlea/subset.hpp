#pragma once

#include <string>
#include <vector>

#include "vloc/error.hpp"
#include "vloc/netsim/graph.hpp"
#include "vloc/types.hpp"

namespace vloc::dlea {

/// A pivot together with all of its graph neighbors.
struct Subset {
    VehicleId pivot = 0;
    std::vector<VehicleId> members;  ///< ascending ids, pivot included

    std::size_t size() const { return members.size(); }
    bool contains(VehicleId id) const {
        return std::binary_search(members.begin(), members.end(), id);
    }
};

/// How a pivot's fusion weight is counted. `subset` uses |V^k| (the
/// definition); `neighbors` uses |N_k| = |V^k| - 1, which matches the
/// arithmetic of the published six-vehicle walkthrough.
enum class WeightMode { subset, neighbors };

struct PivotWeight {
    VehicleId pivot = 0;
    int weight = 0;
};

inline Subset build_subset(VehicleId pivot, const netsim::NeighborGraph& graph) {
    if (!graph.contains(pivot)) {
        throw Error("pivot " + std::to_string(pivot) + " is not in the graph");
    }
    const auto& nbrs = graph.neighbors(pivot);
    if (nbrs.empty()) {
        throw IsolatedVehicleError("vehicle " + std::to_string(pivot) + " has no neighbors");
    }
    Subset s;
    s.pivot = pivot;
    s.members = nbrs;
    s.members.insert(std::lower_bound(s.members.begin(), s.members.end(), pivot), pivot);
    return s;
}

/// Weight from the subset size alone, so receivers can derive it from a shared tentative set.
inline int weight_for_size(std::size_t subset_size, WeightMode mode = WeightMode::subset) {
    const int n = static_cast<int>(subset_size);
    return mode == WeightMode::subset ? n : n - 1;
}

inline PivotWeight pivot_weight(const Subset& subset, WeightMode mode = WeightMode::subset) {
    return {subset.pivot, weight_for_size(subset.size(), mode)};
}

}  // namespace vloc::dlea
