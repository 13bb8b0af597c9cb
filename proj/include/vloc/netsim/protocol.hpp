#pragma once

// Synchronous message-passing execution of the five-step cooperative
// localization protocol:
//   1. pairwise ranging (pseudorange exchange + WLS-DD, or injected distances)
//   2. GPS fix sharing
//   3. each vehicle solves its tentative set as a pivot
//   4. tentative-set sharing
//   5. weighted fusion into final estimates
// Agents run in ascending id order within a round; rounds are separated by a
// barrier at which all emitted messages are delivered.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vloc/dlea/fusion.hpp"
#include "vloc/dlea/solver.hpp"
#include "vloc/dlea/subset.hpp"
#include "vloc/error.hpp"
#include "vloc/geo.hpp"
#include "vloc/netsim/graph.hpp"
#include "vloc/netsim/message.hpp"
#include "vloc/ranging.hpp"
#include "vloc/types.hpp"

namespace vloc::netsim {

enum class RangingMode { full, abstract };

inline const char* to_string(RangingMode m) { return m == RangingMode::full ? "full" : "abstract"; }

struct ProtocolConfig {
    RangingMode mode = RangingMode::abstract;
    NoiseModel noise;  ///< GPS error statistics assumed by the estimator
    RoadSpace space;
    dlea::WeightMode weight_mode = dlea::WeightMode::subset;
    dlea::SolverOptions solver;
};

/// Everything the vehicles observe. Built from ground truth by the scenario
/// generator, but contains no ground truth itself.
struct Observations {
    std::map<VehicleId, GpsFix> fixes;
    DistanceTable distances;                                 ///< abstract mode
    std::map<VehicleId, ranging::PseudorangeSet> pseudoranges;  ///< full mode
    geo::Constellation constellation;                        ///< full mode (broadcast ephemeris)
};

/// The per-vehicle estimator. It is constructed only from the vehicle's own
/// observations and mutated only by its round handlers and inbound messages.
class Estimator {
public:
    Estimator(VehicleId id, GpsFix fix, std::vector<VehicleId> neighbors)
        : id_(id), fix_(std::move(fix)), neighbors_(std::move(neighbors)) {
        fixes_[id_] = fix_.position;
    }

    VehicleId id() const { return id_; }
    const std::vector<VehicleId>& neighbors() const { return neighbors_; }
    bool isolated() const { return neighbors_.empty(); }

    void set_pseudoranges(ranging::PseudorangeSet set) { pseudoranges_ = std::move(set); }
    void inject_distance(VehicleId other, double d) { distances_.set(id_, other, d); }

    std::vector<Message> emit(Round round) const {
        std::vector<Message> out;
        auto broadcast = [&](const Payload& p) {
            for (VehicleId n : neighbors_) out.push_back({id_, n, round, p});
        };
        switch (round) {
            case Round::ranging:
                if (pseudoranges_) broadcast(PseudorangeShare{*pseudoranges_, fix_});
                break;
            case Round::fix_share: broadcast(fix_); break;
            case Round::tentative_share:
                if (tentative_) broadcast(*tentative_);
                break;
            default: break;
        }
        return out;
    }

    void consume(const Message& m, const geo::Constellation& constellation) {
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, PseudorangeShare>) {
                    range_to(p, constellation);
                } else if constexpr (std::is_same_v<T, GpsFix>) {
                    fixes_[p.vehicle_id] = p.position;
                } else {
                    received_[p.pivot] = p;
                }
            },
            m.payload);
    }

    void compute(Round round, const ProtocolConfig& cfg) {
        if (round == Round::tentative && !isolated()) solve(cfg);
        if (round == Round::fusion) fuse(cfg);
    }

    const std::optional<dlea::TentativeEstimateSet>& tentative() const { return tentative_; }
    const std::optional<dlea::FinalEstimate>& final_estimate() const { return final_; }
    bool solve_failed() const { return solve_failed_; }

private:
    // Both endpoints evaluate the pair in (lower id, higher id) order, so they
    // arrive at bit-identical distances without another exchange.
    void range_to(const PseudorangeShare& share, const geo::Constellation& constellation) {
        const VehicleId other = share.set.receiver_id;
        const bool self_first = id_ < other;
        const auto& set_a = self_first ? *pseudoranges_ : share.set;
        const auto& set_b = self_first ? share.set : *pseudoranges_;
        const Point2 pa2 = self_first ? fix_.position : share.reported.position;
        const Point2 pb2 = self_first ? share.reported.position : fix_.position;
        try {
            const auto sys = ranging::build_system(set_a, set_b, {pa2.x(), pa2.y(), 0.0},
                                                   {pb2.x(), pb2.y(), 0.0}, constellation);
            distances_.set(id_, other, ranging::wls_baseline(sys).distance);
        } catch (const Error& e) {
            throw Error("ranging pair (" + std::to_string(std::min(id_, other)) + ", " +
                        std::to_string(std::max(id_, other)) + "): " + e.what());
        }
    }

    void solve(const ProtocolConfig& cfg) {
        dlea::Subset subset;
        subset.pivot = id_;
        subset.members = neighbors_;
        subset.members.insert(std::lower_bound(subset.members.begin(), subset.members.end(), id_), id_);
        try {
            tentative_ = dlea::solve_tentative(subset, fixes_, distances_, cfg.noise, cfg.space, cfg.solver);
        } catch (const dlea::NonConvergenceError& e) {
            tentative_ = e.last_iterate();
            solve_failed_ = true;
        } catch (const Error& e) {
            throw Error("pivot " + std::to_string(id_) + ": " + e.what());
        }
    }

    void fuse(const ProtocolConfig& cfg) {
        if (isolated()) {
            final_ = dlea::FinalEstimate{id_, fix_.position, {}, true};
            return;
        }
        dlea::Subset own;
        own.pivot = id_;
        own.members = neighbors_;
        own.members.insert(std::lower_bound(own.members.begin(), own.members.end(), id_), id_);
        std::map<VehicleId, const dlea::TentativeEstimateSet*> sets;
        std::map<VehicleId, int> weights;
        if (tentative_) sets[id_] = &*tentative_;
        for (const auto& [pivot, set] : received_) sets[pivot] = &set;
        for (const auto& [pivot, set] : sets) {
            weights[pivot] = dlea::weight_for_size(set->estimates.size(), cfg.weight_mode);
        }
        final_ = dlea::final_estimate(id_, own, sets, weights);
    }

    VehicleId id_;
    GpsFix fix_;
    std::vector<VehicleId> neighbors_;
    std::optional<ranging::PseudorangeSet> pseudoranges_;
    DistanceTable distances_;
    std::map<VehicleId, Point2> fixes_;
    std::map<VehicleId, dlea::TentativeEstimateSet> received_;
    std::optional<dlea::TentativeEstimateSet> tentative_;
    std::optional<dlea::FinalEstimate> final_;
    bool solve_failed_ = false;
};

/// A simulated vehicle. The true position is carried for bookkeeping only;
/// the estimator is a separate object that never sees it.
struct VehicleAgent {
    VehicleId id = 0;
    Point2 true_position = Point2::Zero();
    Estimator estimator;
};

struct ProtocolResult {
    std::map<VehicleId, dlea::FinalEstimate> finals;
    std::map<VehicleId, dlea::TentativeEstimateSet> tentatives;
    std::vector<TraceRecord> trace;
    std::vector<ConsumeEvent> consumption;
    std::vector<VehicleId> isolated;
    std::vector<VehicleId> failed_pivots;      ///< solver hit its iteration budget
    std::vector<VehicleId> infeasible_pivots;  ///< measured distances do not fit the box
};

struct RoundCounts {
    std::array<std::size_t, 5> messages{};  ///< index = round - 1
    std::size_t total() const {
        std::size_t t = 0;
        for (auto m : messages) t += m;
        return t;
    }
};

/// Messages the protocol sends per round on `graph`.
inline RoundCounts exchanged_message_count(const NeighborGraph& graph,
                                           RangingMode mode = RangingMode::abstract) {
    const std::size_t directed = 2 * graph.edge_count();
    RoundCounts c;
    c.messages[0] = mode == RangingMode::full ? directed : 0;
    c.messages[1] = directed;
    c.messages[3] = directed;
    return c;
}

inline ProtocolResult run_protocol(const TrafficSnapshot& snapshot, const NeighborGraph& graph,
                                   const ProtocolConfig& config, const Observations& obs) {
    std::vector<VehicleAgent> agents;
    agents.reserve(snapshot.vehicles.size());
    for (const auto& v : snapshot.vehicles) {
        auto fix = obs.fixes.find(v.id);
        if (fix == obs.fixes.end()) {
            throw Error("vehicle " + std::to_string(v.id) + " has no GPS fix");
        }
        VehicleAgent agent{v.id, v.position, Estimator(v.id, fix->second, graph.neighbors(v.id))};
        if (config.mode == RangingMode::full) {
            auto pr = obs.pseudoranges.find(v.id);
            if (pr == obs.pseudoranges.end()) {
                throw Error("vehicle " + std::to_string(v.id) + " has no pseudoranges");
            }
            agent.estimator.set_pseudoranges(pr->second);
        } else {
            for (VehicleId n : graph.neighbors(v.id)) {
                agent.estimator.inject_distance(n, obs.distances.at(v.id, n));
            }
        }
        agents.push_back(std::move(agent));
    }
    std::sort(agents.begin(), agents.end(),
              [](const VehicleAgent& a, const VehicleAgent& b) { return a.id < b.id; });
    std::map<VehicleId, std::size_t> index;
    for (std::size_t i = 0; i < agents.size(); ++i) index[agents[i].id] = i;

    ProtocolResult result;
    std::uint64_t clock = 0;
    for (int r = 1; r <= 5; ++r) {
        const auto round = static_cast<Round>(r);

        std::vector<std::pair<Message, std::uint64_t>> in_flight;
        for (const auto& agent : agents) {
            for (auto& m : agent.estimator.emit(round)) {
                if (!graph.has_edge(m.from, m.to)) {
                    throw Error("message from " + std::to_string(m.from) + " to " +
                                std::to_string(m.to) + " crosses a non-edge");
                }
                const std::uint64_t stamp = clock++;
                result.trace.push_back({stamp, round, m.from, m.to, kind_of(m.payload),
                                        payload_digest(m.payload)});
                in_flight.emplace_back(std::move(m), stamp);
            }
        }

        // Barrier: deliver everything, then let each agent consume and compute.
        std::vector<std::vector<std::pair<const Message*, std::uint64_t>>> inbox(agents.size());
        for (const auto& [m, stamp] : in_flight) inbox[index.at(m.to)].emplace_back(&m, stamp);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            auto& est = agents[i].estimator;
            for (const auto& [m, stamp] : inbox[i]) {
                est.consume(*m, obs.constellation);
                result.consumption.push_back({clock++, est.id(), round, stamp});
            }
            est.compute(round, config);
        }
    }

    for (const auto& agent : agents) {
        const auto& est = agent.estimator;
        if (est.isolated()) result.isolated.push_back(agent.id);
        if (est.tentative()) {
            result.tentatives.emplace(agent.id, *est.tentative());
            if (est.solve_failed()) result.failed_pivots.push_back(agent.id);
            if (est.tentative()->status == dlea::SolveStatus::infeasible) {
                result.infeasible_pivots.push_back(agent.id);
            }
        }
        result.finals.emplace(agent.id, *est.final_estimate());
    }
    return result;
}

}  // namespace vloc::netsim
