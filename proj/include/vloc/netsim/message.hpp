#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "vloc/digest.hpp"
#include "vloc/dlea/solver.hpp"
#include "vloc/ranging.hpp"
#include "vloc/types.hpp"

namespace vloc::netsim {

/// Protocol steps, executed in order with a barrier in between.
enum class Round : int { ranging = 1, fix_share = 2, tentative = 3, tentative_share = 4, fusion = 5 };

/// Step 1 payload: the sender's raw pseudoranges plus its reported position,
/// which the receiver needs to evaluate line-of-sight vectors.
struct PseudorangeShare {
    ranging::PseudorangeSet set;
    GpsFix reported;
};

using Payload = std::variant<PseudorangeShare, GpsFix, dlea::TentativeEstimateSet>;

enum class PayloadKind { pseudorange_share, fix_share, tentative_share };

inline const char* to_string(PayloadKind k) {
    switch (k) {
        case PayloadKind::pseudorange_share: return "PseudorangeShare";
        case PayloadKind::fix_share: return "FixShare";
        case PayloadKind::tentative_share: return "TentativeShare";
    }
    return "?";
}

inline PayloadKind kind_of(const Payload& p) { return static_cast<PayloadKind>(p.index()); }

inline Round round_of(PayloadKind k) {
    switch (k) {
        case PayloadKind::pseudorange_share: return Round::ranging;
        case PayloadKind::fix_share: return Round::fix_share;
        case PayloadKind::tentative_share: return Round::tentative_share;
    }
    return Round::ranging;
}

struct Message {
    VehicleId from = 0;
    VehicleId to = 0;
    Round round = Round::ranging;
    Payload payload;
};

inline std::uint64_t payload_digest(const Payload& payload) {
    Fnv1a h;
    h.u64(payload.index());
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PseudorangeShare>) {
                h.u64(p.set.receiver_id);
                for (const auto& o : p.set.observations) {
                    h.u64(static_cast<std::uint64_t>(o.sat_id)).f64(o.value).f64(o.cnr);
                }
                h.u64(p.reported.vehicle_id).f64(p.reported.position.x()).f64(p.reported.position.y());
            } else if constexpr (std::is_same_v<T, GpsFix>) {
                h.u64(p.vehicle_id).f64(p.position.x()).f64(p.position.y());
            } else {
                h.u64(p.pivot).f64(p.objective_value);
                for (const auto& [id, pos] : p.estimates) h.u64(id).f64(pos.x()).f64(pos.y());
            }
        },
        payload);
    return h.value();
}

/// One emitted message as recorded in the trace. `clock` is a logical
/// timestamp shared with consumption events.
struct TraceRecord {
    std::uint64_t clock = 0;
    Round round = Round::ranging;
    VehicleId from = 0;
    VehicleId to = 0;
    PayloadKind kind = PayloadKind::fix_share;
    std::uint64_t digest = 0;
};

struct ConsumeEvent {
    std::uint64_t clock = 0;
    VehicleId agent = 0;
    Round round = Round::ranging;
    std::uint64_t message_clock = 0;  ///< clock of the consumed message's emission
};

/// Line-delimited trace export: `round,from,to,payload-kind,payload-digest`.
inline void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace) {
    for (const auto& r : trace) {
        out << static_cast<int>(r.round) << ',' << r.from << ',' << r.to << ',' << to_string(r.kind)
            << ',' << Fnv1a::to_hex(r.digest) << '\n';
    }
}

}  // namespace vloc::netsim
