#pragma once

// Pseudorange model and the double-difference inter-vehicle baseline
// estimators (plain and CNR-weighted least squares).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vloc/error.hpp"
#include "vloc/geo.hpp"
#include "vloc/types.hpp"

namespace vloc::ranging {

using vloc::VehicleId;

/// Condition number above which the geometry matrix is treated as rank deficient.
inline constexpr double kMaxConditionNumber = 1e10;

/// Standard deviation law of the non-common pseudorange noise: sigma = c / cnr.
inline constexpr double kNoiseCnrConstant = 30.0;  // [m * dB-Hz]

inline double noncommon_noise_sigma(double cnr_dbhz) { return kNoiseCnrConstant / cnr_dbhz; }

struct PseudorangeObservation {
    int sat_id = 0;
    double value = 0.0;  ///< [m]
    double cnr = 0.0;    ///< [dB-Hz]
};

struct PseudorangeSet {
    VehicleId receiver_id = 0;
    double clock_bias = 0.0;  ///< [m], kept for bookkeeping; never read by the estimators
    std::vector<PseudorangeObservation> observations;

    const PseudorangeObservation* find(int sat_id) const {
        for (const auto& o : observations) {
            if (o.sat_id == sat_id) return &o;
        }
        return nullptr;
    }
};

struct SingleDifference {
    int sat_id = 0;
    double value = 0.0;
};

struct DifferenceSystem {
    int reference_sat = 0;
    std::vector<int> sat_ids;   ///< satellite of each row
    Eigen::VectorXd dd;         ///< double differences [m]
    Eigen::MatrixXd geometry;   ///< rows e^i - e^0
    Eigen::VectorXd weights;    ///< diagonal of W

    Eigen::Index rows() const { return dd.size(); }
};

struct BaselineEstimate {
    Eigen::Vector3d vector = Eigen::Vector3d::Zero();  ///< receiver a -> receiver b [m]
    double distance = 0.0;
};

inline double synthesize_pseudorange(double true_range, double clock_bias, double common_noise,
                                     double noncommon_noise) {
    if (!(true_range > 0.0)) {
        throw InvalidRangeError("true range must be positive");
    }
    return true_range + clock_bias + common_noise + noncommon_noise;
}

inline double single_difference(double obs_a, double obs_b) { return obs_a - obs_b; }

inline double double_difference(double sd_i, double sd_j) { return sd_i - sd_j; }

/// Diagonal weight of one double-difference row from the two receivers' CNR.
inline double cnr_weight(double cnr_a, double cnr_b) {
    const double a2 = cnr_a * cnr_a;
    const double b2 = cnr_b * cnr_b;
    return a2 * b2 / (a2 + b2);
}

/// Forms D, H and W for the receiver pair (a, b). Satellites are matched by id;
/// the reference is the shared satellite with the highest min(cnr_a, cnr_b)
/// (ties go to the lowest id). Line-of-sight vectors are evaluated at the
/// midpoint of the two reported receiver positions.
inline DifferenceSystem build_system(const PseudorangeSet& set_a, const PseudorangeSet& set_b,
                                     const geo::WorldPoint& position_a,
                                     const geo::WorldPoint& position_b,
                                     const geo::Constellation& constellation) {
    struct Shared {
        int sat_id;
        const PseudorangeObservation* a;
        const PseudorangeObservation* b;
    };
    std::vector<Shared> shared;
    for (const auto& oa : set_a.observations) {
        if (const auto* ob = set_b.find(oa.sat_id)) shared.push_back({oa.sat_id, &oa, ob});
    }
    std::sort(shared.begin(), shared.end(),
              [](const Shared& l, const Shared& r) { return l.sat_id < r.sat_id; });
    if (shared.size() < 4) {
        throw InsufficientSatellitesError("receivers " + std::to_string(set_a.receiver_id) + " and " +
                                          std::to_string(set_b.receiver_id) + " share only " +
                                          std::to_string(shared.size()) + " satellites");
    }

    std::size_t ref = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < shared.size(); ++i) {
        const double q = std::min(shared[i].a->cnr, shared[i].b->cnr);
        if (q > best) {
            best = q;
            ref = i;
        }
    }

    const geo::WorldPoint mid = 0.5 * (position_a + position_b);
    const auto& ref_obs = shared[ref];
    const geo::UnitVector e0 = geo::unit_vector(mid, constellation.find(ref_obs.sat_id));
    const double sd0 = single_difference(ref_obs.a->value, ref_obs.b->value);

    const auto n = static_cast<Eigen::Index>(shared.size() - 1);
    DifferenceSystem sys;
    sys.reference_sat = ref_obs.sat_id;
    sys.dd.resize(n);
    sys.geometry.resize(n, 3);
    sys.weights.resize(n);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < shared.size(); ++i) {
        if (i == ref) continue;
        const auto& s = shared[i];
        const double sd = single_difference(s.a->value, s.b->value);
        // R_a - R_b ~ e . (p_b - p_a) in the far field.
        sys.dd(row) = double_difference(sd, sd0);
        sys.geometry.row(row) =
            (geo::unit_vector(mid, constellation.find(s.sat_id)) - e0).transpose();
        sys.weights(row) = cnr_weight(s.a->cnr, s.b->cnr);
        sys.sat_ids.push_back(s.sat_id);
        ++row;
    }
    return sys;
}

namespace detail {

inline void check_conditioning(const Eigen::MatrixXd& m) {
    if (m.rows() < 3) {
        throw DegenerateGeometryError("fewer than 3 double-difference rows");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0) || smax / smin > kMaxConditionNumber) {
        throw DegenerateGeometryError("geometry matrix is rank deficient (condition number " +
                                      std::to_string(smin > 0.0 ? smax / smin : INFINITY) + ")");
    }
}

inline BaselineEstimate solve_rows(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    check_conditioning(a);
    BaselineEstimate est;
    est.vector = a.colPivHouseholderQr().solve(b);
    est.distance = est.vector.norm();
    return est;
}

}  // namespace detail

/// r = (H^T H)^-1 H^T D.
inline BaselineEstimate ls_baseline(const DifferenceSystem& sys) {
    return detail::solve_rows(sys.geometry, sys.dd);
}

/// r = (H^T W H)^-1 H^T W D, solved as least squares on rows scaled by sqrt(w).
inline BaselineEstimate wls_baseline(const DifferenceSystem& sys) {
    if ((sys.weights.array() <= 0.0).any()) {
        throw Error("weights must be strictly positive");
    }
    const Eigen::VectorXd s = sys.weights.array().sqrt();
    const Eigen::MatrixXd a = s.asDiagonal() * sys.geometry;
    const Eigen::VectorXd b = s.asDiagonal() * sys.dd;
    return detail::solve_rows(a, b);
}

}  // namespace vloc::ranging
