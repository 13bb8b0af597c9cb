#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vloc/dlea/solver.hpp"

using namespace vloc;
using namespace vloc::dlea;

namespace {

Subset star(VehicleId pivot, std::vector<VehicleId> neighbors) {
    netsim::NeighborGraph g;
    for (VehicleId n : neighbors) g.add_edge(pivot, n);
    return build_subset(pivot, g);
}

double objective_of(const TentativeEstimateSet& t, const std::map<VehicleId, Point2>& fixes,
                    const NoiseModel& noise) {
    std::vector<Point2> est, fix;
    for (const auto& [id, p] : t.estimates) {
        est.push_back(p);
        fix.push_back(fixes.at(id));
    }
    return objective(est, fix, noise);
}

void expect_feasible(const TentativeEstimateSet& t, const Subset& s, const DistanceTable& d,
                     const RoadSpace& space) {
    ASSERT_EQ(t.estimates.size(), s.size());
    for (VehicleId m : s.members) {
        ASSERT_TRUE(t.estimates.count(m));
        EXPECT_TRUE(space.contains(t.estimates.at(m))) << "vehicle " << m;
        if (m == s.pivot) continue;
        const double got = (t.estimates.at(m) - t.estimates.at(s.pivot)).norm();
        EXPECT_LT(std::abs(got - d.at(s.pivot, m)), 1e-4) << "pivot " << s.pivot << " neighbor " << m;
    }
    EXPECT_LT(t.max_violation, 1e-4);
}

}  // namespace

TEST(Solver, FeasibleFixesAreReturnedUnchanged) {
    const auto snap = test::six_vehicle_snapshot();
    const auto g = netsim::build_neighbor_graph(snap, test::kSixVehicleRange);
    const auto fixes = test::exact_fixes(snap);
    std::map<VehicleId, Point2> fx;
    for (const auto& [id, f] : fixes) fx[id] = f.position;
    const auto d = test::exact_distances(snap, g);
    for (VehicleId pivot : g.vehicles()) {
        const auto s = build_subset(pivot, g);
        const auto t = solve_tentative(s, fx, d, NoiseModel{}, test::six_vehicle_space());
        EXPECT_EQ(t.status, SolveStatus::converged);
        EXPECT_LT(t.objective_value, 1e-12);
        for (const auto& [id, p] : t.estimates) EXPECT_LT((p - fx.at(id)).norm(), 1e-6);
    }
}

TEST(Solver, OneDimensionalClosedForm) {
    const auto s = star(1, {2});
    DistanceTable d;
    d.set(1, 2, 12.0);
    const std::map<VehicleId, Point2> fixes = {{1, {0, 0}}, {2, {10, 0}}};
    const RoadSpace box{-100, 100, -100, 100};
    const auto t = solve_tentative(s, fixes, d, NoiseModel{}, box);
    EXPECT_EQ(t.status, SolveStatus::converged);
    EXPECT_NEAR(t.estimates.at(1).x(), -1.0, 1e-6);
    EXPECT_NEAR(t.estimates.at(2).x(), 11.0, 1e-6);
    EXPECT_NEAR(t.estimates.at(1).y(), 0.0, 1e-6);
    EXPECT_NEAR(t.estimates.at(2).y(), 0.0, 1e-6);
    EXPECT_NEAR(t.objective_value, 2.0 / 200.0, 1e-7);
}

TEST(Solver, ZeroDistanceMeansColocation) {
    const auto s = star(3, {4});
    DistanceTable d;
    d.set(3, 4, 0.0);
    const std::map<VehicleId, Point2> fixes = {{3, {10, 2}}, {4, {16, 6}}};
    const auto t = solve_tentative(s, fixes, d, NoiseModel{}, RoadSpace{0, 50, 0, 9});
    EXPECT_EQ(t.status, SolveStatus::converged);
    EXPECT_LT((t.estimates.at(3) - Point2(13, 4)).norm(), 1e-5);
    EXPECT_LT((t.estimates.at(4) - Point2(13, 4)).norm(), 1e-5);
}

TEST(Solver, EstimatesClampedIntoBox) {
    const auto s = star(1, {2});
    DistanceTable d;
    d.set(1, 2, 20.0);
    const std::map<VehicleId, Point2> fixes = {{1, {-15, 14}}, {2, {8, -3}}};
    const RoadSpace box{0, 500, 0, 9};
    const auto t = solve_tentative(s, fixes, d, NoiseModel{}, box);
    expect_feasible(t, s, d, box);
}

TEST(Solver, DistanceBeyondBoxIsFlaggedInfeasible) {
    const auto s = star(1, {2});
    DistanceTable d;
    d.set(1, 2, 600.0);
    const std::map<VehicleId, Point2> fixes = {{1, {100, 4}}, {2, {300, 4}}};
    const RoadSpace box{0, 500, 0, 9};
    TentativeEstimateSet t;
    ASSERT_NO_THROW(t = solve_tentative(s, fixes, d, NoiseModel{}, box));
    EXPECT_EQ(t.status, SolveStatus::infeasible);
    EXPECT_EQ(t.estimates.size(), 2u);
    for (const auto& [id, p] : t.estimates) EXPECT_TRUE(box.contains(p));
}

TEST(Solver, BudgetExhaustionCarriesLastIterate) {
    const auto s = star(1, {2});
    DistanceTable d;
    d.set(1, 2, 12.0);
    const std::map<VehicleId, Point2> fixes = {{1, {0, 0}}, {2, {10, 0}}};
    SolverOptions opts;
    opts.max_outer_iterations = 1;
    try {
        solve_tentative(s, fixes, d, NoiseModel{}, RoadSpace{-100, 100, -100, 100}, opts);
        FAIL() << "expected NonConvergenceError";
    } catch (const NonConvergenceError& e) {
        const auto& last = e.last_iterate();
        EXPECT_EQ(last.status, SolveStatus::not_converged);
        EXPECT_EQ(last.estimates.size(), 2u);
        EXPECT_GE(last.max_violation, 1e-4);
        EXPECT_EQ(last.history.size(), 1u);
    }
}

TEST(Solver, MissingInputsRejected) {
    const auto s = star(1, {2});
    DistanceTable d;
    d.set(1, 2, 5.0);
    EXPECT_THROW(solve_tentative(s, {{1, {0, 0}}}, d, NoiseModel{}, RoadSpace{}), Error);
    EXPECT_THROW(solve_tentative(s, {{1, {0, 0}}, {2, {1, 1}}}, DistanceTable{}, NoiseModel{}, RoadSpace{}),
                 Error);
    EXPECT_THROW(solve_tentative(s, {{1, {0, 0}}, {2, {1, 1}}}, d, NoiseModel{{0, 0}, {0, 1}}, RoadSpace{}),
                 Error);
    EXPECT_THROW(solve_tentative(s, {{1, {0, 0}}, {2, {1, 1}}}, d, NoiseModel{}, RoadSpace{5, 5, 0, 1}),
                 Error);
}

TEST(Solver, TwoVehicleGridOracle) {
    const RoadSpace box{0, 50, 0, 1};
    const std::map<VehicleId, Point2> fixes = {{1, {20.0, 0.3}}, {2, {33.0, 0.9}}};
    DistanceTable d;
    d.set(1, 2, 15.2);
    const NoiseModel noise{{0, 0}, {1, 1}};
    const auto t = solve_tentative(star(1, {2}), fixes, d, noise, box);
    expect_feasible(t, star(1, {2}), d, box);
    const double grid = test::grid_minimum(box, fixes, 1, {{2, 15.2}});
    EXPECT_NEAR(t.objective_value, grid, 1e-3);
}

TEST(Solver, PivotWithTwoNeighborsGridOracle) {
    const RoadSpace box{0, 50, 0, 1};
    const std::map<VehicleId, Point2> fixes = {{1, {21.0, 0.6}}, {2, {4.5, 0.1}}, {3, {39.0, 0.8}}};
    DistanceTable d;
    d.set(1, 2, 17.3);
    d.set(1, 3, 16.4);
    const NoiseModel noise{{0, 0}, {1, 1}};
    const auto s = star(1, {2, 3});
    const auto t = solve_tentative(s, fixes, d, noise, box);
    expect_feasible(t, s, d, box);
    const double grid = test::grid_minimum(box, fixes, 1, {{2, 17.3}, {3, 16.4}});
    EXPECT_NEAR(t.objective_value, grid, 1e-3);
    EXPECT_NEAR(t.objective_value, objective_of(t, fixes, noise), 1e-12);
}

namespace {

struct RandomStar {
    Subset subset;
    std::map<VehicleId, Point2> fixes;
    DistanceTable distances;
};

RandomStar random_star(std::mt19937_64& rng, const RoadSpace& box) {
    std::uniform_real_distribution<double> ux(box.x_lb + 100, box.x_ub - 100), uy(box.y_lb, box.y_ub);
    std::uniform_real_distribution<double> off(-100, 100);
    std::uniform_int_distribution<int> count(1, 6);
    std::normal_distribution<double> gps(0, 10), meas(0, 1);
    RandomStar r;
    const int n = count(rng);
    std::vector<VehicleId> nbrs;
    std::map<VehicleId, Point2> truth;
    truth[1] = {ux(rng), uy(rng)};
    for (int j = 0; j < n; ++j) {
        const auto id = static_cast<VehicleId>(j + 2);
        nbrs.push_back(id);
        truth[id] = {truth[1].x() + off(rng), uy(rng)};
    }
    r.subset = star(1, nbrs);
    for (const auto& [id, p] : truth) {
        r.fixes[id] = p + Point2(gps(rng), gps(rng));
        if (id != 1) r.distances.set(1, id, std::max(0.0, (p - truth[1]).norm() + meas(rng)));
    }
    return r;
}

// Keeps the pivot at its clamped fix and slides each neighbor along the ray
// towards its own fix until the distance constraint holds.
std::optional<double> projected_start_objective(const RandomStar& r, const RoadSpace& box,
                                                const NoiseModel& noise) {
    const Point2 p = box.clamp(r.fixes.at(1));
    std::vector<Point2> est{p}, fix{r.fixes.at(1)};
    for (VehicleId id : r.subset.members) {
        if (id == 1) continue;
        Point2 dir = box.clamp(r.fixes.at(id)) - p;
        if (dir.norm() == 0) dir = Point2(1, 0);
        const Point2 q = p + dir.normalized() * r.distances.at(1, id);
        if (!box.contains(q)) return std::nullopt;
        est.push_back(q);
        fix.push_back(r.fixes.at(id));
    }
    return objective(est, fix, noise);
}

}  // namespace

TEST(SolverProperties, RandomInstancesFeasibleMonotoneAndNoWorseThanProjectedStart) {
    std::mt19937_64 rng(31337);
    const RoadSpace box{0, 500, 0, 9};
    const NoiseModel noise{};
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto r = random_star(rng, box);
        const auto t = solve_tentative(r.subset, r.fixes, r.distances, noise, box);
        ASSERT_EQ(t.status, SolveStatus::converged) << "trial " << trial;
        expect_feasible(t, r.subset, r.distances, box);
        for (const auto& step : t.history) {
            EXPECT_LE(step.merit_end, step.merit_start + 1e-12 * std::max(1.0, std::abs(step.merit_start)));
        }
        if (const auto start = projected_start_objective(r, box, noise)) {
            EXPECT_LE(t.objective_value, *start + 1e-9) << "trial " << trial;
            ++compared;
        }
    }
    EXPECT_GT(compared, 50);
}

TEST(SolverProperties, LabelInvariance) {
    std::mt19937_64 rng(8);
    const RoadSpace box{0, 500, 0, 9};
    for (int trial = 0; trial < 30; ++trial) {
        const auto r = random_star(rng, box);
        const auto base = solve_tentative(r.subset, r.fixes, r.distances, NoiseModel{}, box);
        // Reverse the id order: vehicle i becomes 100 - i.
        auto relabel = [](VehicleId id) { return static_cast<VehicleId>(100 - id); };
        std::vector<VehicleId> nbrs;
        std::map<VehicleId, Point2> fixes;
        DistanceTable d;
        for (VehicleId m : r.subset.members) {
            fixes[relabel(m)] = r.fixes.at(m);
            if (m != 1) {
                nbrs.push_back(relabel(m));
                d.set(relabel(1), relabel(m), r.distances.at(1, m));
            }
        }
        const auto perm = solve_tentative(star(relabel(1), nbrs), fixes, d, NoiseModel{}, box);
        for (VehicleId m : r.subset.members) {
            EXPECT_LT((perm.estimates.at(relabel(m)) - base.estimates.at(m)).norm(), 1e-7);
        }
        EXPECT_NEAR(perm.objective_value, base.objective_value, 1e-9 * std::max(1.0, base.objective_value));
    }
}

TEST(SolverProperties, SigmaScalingLeavesArgminUnchanged) {
    std::mt19937_64 rng(21);
    const RoadSpace box{0, 500, 0, 9};
    for (int trial = 0; trial < 30; ++trial) {
        const auto r = random_star(rng, box);
        const NoiseModel base_noise{{0.5, -0.25}, {10, 6}};
        const auto base = solve_tentative(r.subset, r.fixes, r.distances, base_noise, box);
        for (double k : {0.1, 3.0}) {
            const NoiseModel scaled{base_noise.mean, base_noise.stddev * k};
            const auto t = solve_tentative(r.subset, r.fixes, r.distances, scaled, box);
            for (const auto& [id, p] : base.estimates) EXPECT_LT((t.estimates.at(id) - p).norm(), 1e-5);
            EXPECT_NEAR(t.objective_value * k * k, base.objective_value,
                        1e-6 * std::max(1.0, base.objective_value));
        }
    }
}

TEST(SolverProperties, SixVehicleNoisyFixes) {
    const auto snap = test::six_vehicle_snapshot();
    const auto g = netsim::build_neighbor_graph(snap, test::kSixVehicleRange);
    const auto d = test::exact_distances(snap, g);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gps(0, 10);
    for (int trial = 0; trial < 20; ++trial) {
        std::map<VehicleId, Point2> fixes;
        for (const auto& v : snap.vehicles) fixes[v.id] = v.position + Point2(gps(rng), gps(rng));
        for (VehicleId pivot : g.vehicles()) {
            const auto s = build_subset(pivot, g);
            const auto t = solve_tentative(s, fixes, d, NoiseModel{}, test::six_vehicle_space());
            EXPECT_EQ(t.status, SolveStatus::converged);
            expect_feasible(t, s, d, test::six_vehicle_space());
        }
    }
}
