// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../fixtures.hpp"
#include "../oracles.hpp"
#include "vloc/cli/runner.hpp"
#include "vloc/dlea/fusion.hpp"
#include "vloc/dlea/objective.hpp"
#include "vloc/dlea/solver.hpp"
#include "vloc/geo.hpp"
#include "vloc/netsim/protocol.hpp"
#include "vloc/ranging.hpp"
#include "vloc/scenario/experiment.hpp"

namespace fs = std::filesystem;
using namespace vloc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Outcome wls_zero_noise() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto c = geo::make_constellation(6, seed, {geo::deg2rad(15), geo::deg2rad(85)});
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> heading(0, 2 * M_PI), cnr(25, 50);
        const double h = heading(rng);
        const geo::WorldPoint a(0, 0, 0);
        const geo::WorldPoint b(100 * std::cos(h), 100 * std::sin(h), 0);
        ranging::PseudorangeSet sa{1, 0, {}}, sb{2, 0, {}};
        for (const auto& s : c.satellites()) {
            sa.observations.push_back({s.id, ranging::synthesize_pseudorange((s.position - a).norm(), 0, 0, 0), cnr(rng)});
            sb.observations.push_back({s.id, ranging::synthesize_pseudorange((s.position - b).norm(), 0, 0, 0), cnr(rng)});
        }
        const auto est = ranging::wls_baseline(ranging::build_system(sa, sb, a, b, c));
        worst = std::max(worst, (est.vector - (b - a)).norm());
    }
    const double t = seconds_since(t0);
    return {worst < 0.01 && t < 1.0, fmt("worst displacement error %.3g m over 50 geometries, %.3f s", worst, t)};
}

Outcome cancellation() {
    std::mt19937_64 rng(2);
    auto q = [&](double sd) { return std::round(std::normal_distribution<double>(0, sd)(rng) * 1024) / 1024; };
    std::uniform_real_distribution<double> range(2.0e7, 2.6e7);
    int mismatches = 0;
    for (int t = 0; t < 1000; ++t) {
        const double ri = std::round(range(rng) * 1024) / 1024, rj = std::round(range(rng) * 1024) / 1024;
        const double dri = q(50), drj = q(50), ta = q(3e4), tb = q(3e4), xi = q(5), xj = q(5);
        const double e0 = q(1), e1 = q(1), e2 = q(1), e3 = q(1);
        using ranging::synthesize_pseudorange;
        auto sd = [&](double r, double dr, double a, double b, double x, double ea, double eb) {
            return ranging::single_difference(synthesize_pseudorange(r, a, x, ea),
                                              synthesize_pseudorange(r + dr, b, x, eb));
        };
        if (sd(ri, dri, ta, tb, xi, e0, e1) != sd(ri, dri, ta, tb, 0.0, e0, e1)) ++mismatches;
        const double dd = ranging::double_difference(sd(ri, dri, ta, tb, xi, e0, e1), sd(rj, drj, ta, tb, xj, e2, e3));
        const double dd0 = ranging::double_difference(sd(ri, dri, 0, 0, xi, e0, e1), sd(rj, drj, 0, 0, xj, e2, e3));
        if (dd != dd0) ++mismatches;
    }
    return {mismatches == 0, std::to_string(mismatches) + " bitwise mismatches in 1000 draws"};
}

Outcome gradient() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0, 500), uy(0, 9), mu(-5, 5), s(1, 20);
    std::normal_distribution<double> offset(0, 30);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const NoiseModel noise{{mu(rng), mu(rng)}, {s(rng), s(rng)}};
        std::vector<Point2> est(5), fix(5);
        for (int i = 0; i < 5; ++i) {
            fix[i] = {ux(rng), uy(rng)};
            est[i] = fix[i] + Point2(offset(rng), offset(rng));
        }
        const auto g = dlea::objective_gradient(est, fix, noise);
        for (int i = 0; i < 5; ++i) {
            for (int axis = 0; axis < 2; ++axis) {
                const double h = 1e-6 * std::max(1.0, std::abs(est[i](axis)));
                auto p = est, m = est;
                p[i](axis) += h;
                m[i](axis) -= h;
                const double fd = (dlea::objective(p, fix, noise) - dlea::objective(m, fix, noise)) / (2 * h);
                worst = std::max(worst, std::abs(fd - g[i](axis)) / std::max(1.0, std::abs(g[i](axis))));
            }
        }
    }
    return {worst <= 1e-6, fmt("worst relative error %.3g", worst)};
}

dlea::Subset star(VehicleId pivot, std::vector<VehicleId> nbrs) {
    netsim::NeighborGraph g;
    for (VehicleId n : nbrs) g.add_edge(pivot, n);
    return dlea::build_subset(pivot, g);
}

Outcome grid_oracle() {
    const auto t0 = Clock::now();
    const RoadSpace box{0, 50, 0, 1};
    const NoiseModel noise{{0, 0}, {1, 1}};
    const std::map<VehicleId, Point2> f2 = {{1, {20.0, 0.3}}, {2, {33.0, 0.9}}};
    DistanceTable d2;
    d2.set(1, 2, 15.2);
    const auto t2 = dlea::solve_tentative(star(1, {2}), f2, d2, noise, box);
    const double g2 = test::grid_minimum(box, f2, 1, {{2, 15.2}});

    const std::map<VehicleId, Point2> f3 = {{1, {21.0, 0.6}}, {2, {4.5, 0.1}}, {3, {39.0, 0.8}}};
    DistanceTable d3;
    d3.set(1, 2, 17.3);
    d3.set(1, 3, 16.4);
    const auto t3 = dlea::solve_tentative(star(1, {2, 3}), f3, d3, noise, box);
    const double g3 = test::grid_minimum(box, f3, 1, {{2, 17.3}, {3, 16.4}});
    const double t = seconds_since(t0);
    const double gap = std::max(std::abs(t2.objective_value - g2), std::abs(t3.objective_value - g3));
    const double viol = std::max(t2.max_violation, t3.max_violation);
    return {gap <= 1e-3 && viol <= 1e-4 && t < 30.0,
            fmt("objective gap %.3g, violation %.3g m, %.2f s", gap, viol, t)};
}

Outcome closed_form() {
    DistanceTable d;
    d.set(1, 2, 12.0);
    const auto t = dlea::solve_tentative(star(1, {2}), {{1, {0, 0}}, {2, {10, 0}}}, d, NoiseModel{},
                                         RoadSpace{-100, 100, -100, 100});
    const double e1 = std::abs(t.estimates.at(1).x() + 1.0) + std::abs(t.estimates.at(1).y());
    const double e2 = std::abs(t.estimates.at(2).x() - 11.0) + std::abs(t.estimates.at(2).y());
    return {e1 <= 1e-6 && e2 <= 1e-6,
            fmt("estimates %.9f and %.9f", t.estimates.at(1).x(), t.estimates.at(2).x())};
}

Outcome fusion() {
    const auto g = netsim::build_neighbor_graph(test::six_vehicle_snapshot(), test::kSixVehicleRange);
    const auto s6 = dlea::build_subset(6, g);
    dlea::TentativeEstimateSet t4, t5, t6;
    t4.pivot = 4, t5.pivot = 5, t6.pivot = 6;
    t4.estimates[6] = {231.5, 91.25};
    t5.estimates[6] = {244.0, 99.75};
    t6.estimates[6] = {238.125, 102.5};
    const auto f = dlea::final_estimate(6, s6, {{4, &t4}, {5, &t5}, {6, &t6}}, {{4, 4}, {5, 4}, {6, 2}});
    const Point2 expected = (4.0 * t4.estimates[6] + 4.0 * t5.estimates[6] + 2.0 * t6.estimates[6]) / 10.0;
    double sum = 0.0;
    for (const auto& [p, w] : f.contributing_pivots) sum += w;
    const double err = (f.position - expected).norm();
    return {err <= 1e-12 && std::abs(sum - 1.0) <= 1e-12, fmt("error %.3g m, weight sum - 1 = %.3g", err, sum - 1.0)};
}

Outcome table_bands() {
    const auto t0 = Clock::now();
    std::vector<cli::SummaryRow> rows;
    std::size_t failures = 0;
    for (double dev : {5.0, 10.0, 15.0}) {
        scenario::ScenarioConfig c;
        c.trials = 20;
        c.gps_error.stddev = {dev, dev};
        const auto results = scenario::run_trials(c);
        rows.push_back(cli::summarize(c, results));
        failures += rows.back().failed_trials;
    }
    const double t = seconds_since(t0);
    bool ok = failures == 0 && t < 300.0;
    ok = ok && rows[1].avg_gps >= 11.5 && rows[1].avg_gps <= 15.5;
    ok = ok && rows[1].avg_dlea >= 2.0 && rows[1].avg_dlea <= 8.0;
    for (const auto& r : rows) ok = ok && r.avg_dlea / r.avg_gps <= 0.6;
    ok = ok && rows[0].avg_dlea < rows[1].avg_dlea && rows[1].avg_dlea < rows[2].avg_dlea;
    std::string detail;
    for (const auto& r : rows) {
        detail += fmt("dev %.0f: gps %.3f dlea %.3f ratio %.3f; ", r.deviation, r.avg_gps, r.avg_dlea,
                      r.avg_dlea / r.avg_gps);
    }
    return {ok, detail + fmt("%.1f s", t)};
}

Outcome protocol_fixpoint() {
    const auto s = test::six_vehicle_snapshot();
    const auto g = netsim::build_neighbor_graph(s, test::kSixVehicleRange);
    netsim::Observations obs;
    obs.fixes = scenario::apply_gps_error(s, NoiseModel{{0, 0}, {0, 0}}, 1);
    obs.distances = scenario::apply_distance_error(s, g, 0.0, 2);
    netsim::ProtocolConfig cfg;
    cfg.space = test::six_vehicle_space();
    const auto r = netsim::run_protocol(s, g, cfg, obs);
    double worst = 0.0;
    for (const auto& v : s.vehicles) worst = std::max(worst, (r.finals.at(v.id).position - v.position).norm());
    return {worst <= 1e-3 && r.finals.size() == 6, fmt("worst final error %.3g m", worst)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / ("vloc_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(base);
    int codes = 0;
    for (const char* sub : {"a", "b"}) {
        const std::string cmd = std::string(VLOC_CLI_PATH) + " run --seed 7 --out " + (base / sub).string() +
                                " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        codes += WIFEXITED(status) ? WEXITSTATUS(status) : 100;
    }
    bool same = codes == 0;
    for (const char* f : {"per_vehicle.csv", "summary.csv"}) {
        const auto a = slurp(base / "a" / f), b = slurp(base / "b" / f);
        same = same && !a.empty() && a == b;
    }
    fs::remove_all(base);
    return {same, same ? "per_vehicle.csv and summary.csv identical" : "outputs differ or run failed"};
}

Outcome purity() {
    scenario::ScenarioConfig c;
    bool same = true;
    std::size_t compared = 0;
    for (auto mode : {netsim::RangingMode::abstract, netsim::RangingMode::full}) {
        c.ranging_mode = mode;
        for (int trial = 0; trial < 3; ++trial) {
            const auto in = scenario::make_trial_inputs(c, scenario::trial_seed(c.seed, trial));
            auto sentinel = in.snapshot;
            for (auto& v : sentinel.vehicles) v.position = Point2::Constant(std::numeric_limits<double>::quiet_NaN());
            const auto a = netsim::run_protocol(in.snapshot, in.graph, c.protocol_config(), in.observations);
            const auto b = netsim::run_protocol(sentinel, in.graph, c.protocol_config(), in.observations);
            for (const auto& [id, f] : a.finals) {
                same = same && f.position == b.finals.at(id).position;
                ++compared;
            }
        }
    }
    return {same, std::to_string(compared) + " final estimates compared"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"zero-noise WLS-DD recovery", wls_zero_noise},
        {"cancellation exactness", cancellation},
        {"gradient correctness", gradient},
        {"oracle equivalence", grid_oracle},
        {"closed-form check", closed_form},
        {"fusion arithmetic", fusion},
        {"table band reproduction", table_bands},
        {"zero-noise protocol fixpoint", protocol_fixpoint},
        {"determinism", determinism},
        {"estimator purity", purity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
