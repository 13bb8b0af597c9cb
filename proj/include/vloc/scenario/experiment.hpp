#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vloc/netsim/protocol.hpp"
#include "vloc/scenario/config.hpp"
#include "vloc/scenario/generate.hpp"
#include "vloc/scenario/report.hpp"

namespace vloc::scenario {

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    TrafficSnapshot snapshot;
    std::map<VehicleId, GpsFix> fixes;
    netsim::ProtocolResult protocol;
    ErrorReport report;
    std::optional<std::string> error;  ///< runtime failure; other fields are then partial

    std::size_t convergence_failures() const { return protocol.failed_pivots.size(); }
};

/// Noise-generation output for one trial: ground truth, graph and the
/// observations handed to the vehicles.
struct TrialInputs {
    TrafficSnapshot snapshot;
    netsim::NeighborGraph graph;
    netsim::Observations observations;
};

inline TrialInputs make_trial_inputs(const ScenarioConfig& config, std::uint64_t seed) {
    TrialInputs in;
    in.snapshot = generate_traffic(config, stream_seed(seed, Stream::traffic));
    in.graph = netsim::build_neighbor_graph(in.snapshot, config.comm_range);
    in.observations.fixes =
        apply_gps_error(in.snapshot, config.gps_error, stream_seed(seed, Stream::gps));
    if (config.ranging_mode == netsim::RangingMode::abstract) {
        in.observations.distances = apply_distance_error(in.snapshot, in.graph, config.distance_error_std,
                                                         stream_seed(seed, Stream::distance));
    } else {
        in.observations.constellation =
            make_scenario_constellation(config, stream_seed(seed, Stream::constellation));
        in.observations.pseudoranges = synthesize_pseudoranges(
            in.snapshot, in.observations.constellation, config, stream_seed(seed, Stream::pseudorange));
    }
    return in;
}

inline TrialResult run_trial(const ScenarioConfig& config, int trial) {
    TrialResult r;
    r.trial = trial;
    r.seed = trial_seed(config.seed, static_cast<std::uint64_t>(trial));
    try {
        auto in = make_trial_inputs(config, r.seed);
        r.snapshot = in.snapshot;
        r.fixes = in.observations.fixes;
        r.protocol = netsim::run_protocol(in.snapshot, in.graph, config.protocol_config(), in.observations);
        r.report = compute_error_report(r.snapshot, r.fixes, r.protocol.finals);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

/// Runs config.trials trials on `workers` threads. Results are ordered by
/// trial index regardless of completion order.
inline std::vector<TrialResult> run_trials(const ScenarioConfig& config, int workers = 1) {
    const int n = config.trials;
    std::vector<TrialResult> results(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int t = next++; t < n; t = next++) results[static_cast<std::size_t>(t)] = run_trial(config, t);
    };
    const int threads = std::clamp(workers, 1, std::max(1, n));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(work);
    }
    return results;
}

}  // namespace vloc::scenario
