#pragma once

// Constrained maximum-likelihood estimation of a pivot's subset:
//
//   minimize    A(x) = sum_i |x_i - fix_i - mu|^2_(2 sigma^2)
//   subject to  |x_j - x_pivot| = d_j   for every neighbor j of the pivot
//               x_i inside the road-space box
//
// Equalities are handled by an augmented Lagrangian outer loop. Each
// subproblem is minimized over the box with a projected Newton method
// (Bertsekas-style active set, Armijo search along the projection arc).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vloc/dlea/objective.hpp"
#include "vloc/dlea/subset.hpp"
#include "vloc/error.hpp"
#include "vloc/types.hpp"

namespace vloc::dlea {

struct SolverOptions {
    int max_outer_iterations = 50;
    int max_inner_iterations = 200;
    double feasibility_tolerance = 1e-4;  ///< [m], on |d_est - d_measured|
    double gradient_tolerance = 1e-6;     ///< projected-gradient infinity norm
};

enum class SolveStatus { converged, infeasible, not_converged };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::not_converged: return "not_converged";
    }
    return "?";
}

/// Augmented Lagrangian value (built on A * min(sigma)^2) at the start and end
/// of one subproblem solve.
struct OuterStep {
    double merit_start = 0.0;
    double merit_end = 0.0;
    double max_violation = 0.0;
    int inner_iterations = 0;
};

struct TentativeEstimateSet {
    VehicleId pivot = 0;
    std::map<VehicleId, Point2> estimates;
    double objective_value = 0.0;
    double max_violation = 0.0;  ///< [m]
    SolveStatus status = SolveStatus::converged;
    std::vector<OuterStep> history;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, TentativeEstimateSet last)
        : Error(what), last_(std::move(last)) {}
    const TentativeEstimateSet& last_iterate() const { return last_; }

private:
    TentativeEstimateSet last_;
};

namespace detail {

// One scalar equality constraint acting on the pivot and one neighbor.
// Radial: h = (|dx|^2 - d^2) / (2 max(d, 1)), which is ~ |dx| - d near the
// solution. Zero distances are imposed as two linear constraints dx = 0.
struct Constraint {
    enum Kind { radial, coincide_x, coincide_y } kind = radial;
    int member = 0;  // index of the neighbor in the variable vector
    double distance = 0.0;
    double scale = 1.0;
};

class StarProblem {
public:
    StarProblem(std::vector<Point2> fixes, int pivot, const std::vector<std::pair<int, double>>& dists,
                const NoiseModel& noise, const RoadSpace& box)
        : fixes_(std::move(fixes)), pivot_(pivot), noise_(noise) {
        const auto n = static_cast<Eigen::Index>(fixes_.size());
        lb_.resize(2 * n);
        ub_.resize(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            lb_(2 * i) = box.x_lb;
            ub_(2 * i) = box.x_ub;
            lb_(2 * i + 1) = box.y_lb;
            ub_(2 * i + 1) = box.y_ub;
        }
        for (const auto& [member, d] : dists) {
            if (d == 0.0) {
                constraints_.push_back({Constraint::coincide_x, member, 0.0, 1.0});
                constraints_.push_back({Constraint::coincide_y, member, 0.0, 1.0});
            } else {
                constraints_.push_back({Constraint::radial, member, d, 0.5 / std::max(d, 1.0)});
            }
            neighbors_.emplace_back(member, d);
        }
        lambda_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(constraints_.size()));
        const double min_sigma = std::min(noise.stddev.x(), noise.stddev.y());
        const double unit = min_sigma * min_sigma;
        ix_ = unit / (noise.stddev.x() * noise.stddev.x());
        iy_ = unit / (noise.stddev.y() * noise.stddev.y());
    }

    Eigen::Index dim() const { return lb_.size(); }
    const Eigen::VectorXd& lower() const { return lb_; }
    const Eigen::VectorXd& upper() const { return ub_; }
    double penalty() const { return rho_; }
    void set_penalty(double rho) { rho_ = rho; }
    Eigen::VectorXd& multipliers() { return lambda_; }

    Eigen::VectorXd project(Eigen::VectorXd x) const { return x.cwiseMax(lb_).cwiseMin(ub_); }

    std::vector<Point2> points(const Eigen::VectorXd& x) const {
        std::vector<Point2> p(fixes_.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = Point2(x(2 * static_cast<Eigen::Index>(i)), x(2 * static_cast<Eigen::Index>(i) + 1));
        }
        return p;
    }

    double objective(const Eigen::VectorXd& x) const {
        const auto p = points(x);
        return dlea::objective(p, fixes_, noise_);
    }

    Eigen::VectorXd constraint_values(const Eigen::VectorXd& x) const {
        Eigen::VectorXd h(static_cast<Eigen::Index>(constraints_.size()));
        for (std::size_t c = 0; c < constraints_.size(); ++c) {
            h(static_cast<Eigen::Index>(c)) = value(constraints_[c], x);
        }
        return h;
    }

    /// Largest |distance(pivot, neighbor) - measured| in meters.
    double max_violation(const Eigen::VectorXd& x) const {
        double v = 0.0;
        const Eigen::Vector2d p = x.segment<2>(2 * pivot_);
        for (const auto& [member, d] : neighbors_) {
            v = std::max(v, std::abs((x.segment<2>(2 * member) - p).norm() - d));
        }
        return v;
    }

    /// A(x) * min(sigma)^2, the objective the merit function is built on.
    double scaled_objective(const Eigen::VectorXd& x) const {
        double a = 0.0;
        for (Eigen::Index i = 0; i < dim() / 2; ++i) {
            const auto& f = fixes_[static_cast<std::size_t>(i)];
            const double rx = x(2 * i) - f.x() - noise_.mean.x();
            const double ry = x(2 * i + 1) - f.y() - noise_.mean.y();
            a += 0.5 * (ix_ * rx * rx + iy_ * ry * ry);
        }
        return a;
    }

    double merit(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd h = constraint_values(x);
        return scaled_objective(x) + lambda_.dot(h) + 0.5 * rho_ * h.squaredNorm();
    }

    Eigen::VectorXd merit_gradient(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g(dim());
        for (Eigen::Index i = 0; i < dim() / 2; ++i) {
            const auto& f = fixes_[static_cast<std::size_t>(i)];
            g(2 * i) = (x(2 * i) - f.x() - noise_.mean.x()) * ix_;
            g(2 * i + 1) = (x(2 * i + 1) - f.y() - noise_.mean.y()) * iy_;
        }
        for (std::size_t c = 0; c < constraints_.size(); ++c) {
            const auto& con = constraints_[c];
            const double coef = lambda_(static_cast<Eigen::Index>(c)) + rho_ * value(con, x);
            const Eigen::Vector2d gj = local_gradient(con, x);
            g.segment<2>(2 * con.member) += coef * gj;
            g.segment<2>(2 * pivot_) -= coef * gj;
        }
        return g;
    }

    Eigen::MatrixXd merit_hessian(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim(), dim());
        for (Eigen::Index i = 0; i < dim() / 2; ++i) {
            hess(2 * i, 2 * i) = ix_;
            hess(2 * i + 1, 2 * i + 1) = iy_;
        }
        for (std::size_t c = 0; c < constraints_.size(); ++c) {
            const auto& con = constraints_[c];
            const Eigen::Vector2d gj = local_gradient(con, x);
            const Eigen::Matrix2d outer = rho_ * gj * gj.transpose();
            Eigen::Matrix2d block = outer;
            if (con.kind == Constraint::radial) {
                const double coef = lambda_(static_cast<Eigen::Index>(c)) + rho_ * value(con, x);
                block += 2.0 * con.scale * coef * Eigen::Matrix2d::Identity();
            }
            const int j = con.member;
            hess.block<2, 2>(2 * j, 2 * j) += block;
            hess.block<2, 2>(2 * pivot_, 2 * pivot_) += block;
            hess.block<2, 2>(2 * j, 2 * pivot_) -= block;
            hess.block<2, 2>(2 * pivot_, 2 * j) -= block;
        }
        return hess;
    }

private:
    Eigen::Vector2d delta(const Constraint& c, const Eigen::VectorXd& x) const {
        return x.segment<2>(2 * c.member) - x.segment<2>(2 * pivot_);
    }

    double value(const Constraint& c, const Eigen::VectorXd& x) const {
        const Eigen::Vector2d d = delta(c, x);
        switch (c.kind) {
            case Constraint::radial: return c.scale * (d.squaredNorm() - c.distance * c.distance);
            case Constraint::coincide_x: return d.x();
            case Constraint::coincide_y: return d.y();
        }
        return 0.0;
    }

    // Gradient with respect to the neighbor's coordinates; the pivot's is its negation.
    Eigen::Vector2d local_gradient(const Constraint& c, const Eigen::VectorXd& x) const {
        switch (c.kind) {
            case Constraint::radial: return 2.0 * c.scale * delta(c, x);
            case Constraint::coincide_x: return {1.0, 0.0};
            case Constraint::coincide_y: return {0.0, 1.0};
        }
        return Eigen::Vector2d::Zero();
    }

    std::vector<Point2> fixes_;
    int pivot_;
    NoiseModel noise_;
    Eigen::VectorXd lb_, ub_;
    std::vector<Constraint> constraints_;
    std::vector<std::pair<int, double>> neighbors_;
    Eigen::VectorXd lambda_;
    double rho_ = 1.0;
    double ix_ = 1.0, iy_ = 1.0;
};

struct InnerResult {
    int iterations = 0;
    bool converged = false;
};

inline double projected_gradient_norm(const StarProblem& prob, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& g) {
    return (x - prob.project(x - g)).lpNorm<Eigen::Infinity>();
}

/// Minimizes the merit function over the box, starting from (and updating) x.
inline InnerResult minimize_box(const StarProblem& prob, Eigen::VectorXd& x, int max_iterations,
                                double gradient_tolerance) {
    InnerResult res;
    const Eigen::Index n = prob.dim();
    const auto& lb = prob.lower();
    const auto& ub = prob.upper();
    double f = prob.merit(x);
    for (int it = 0; it < max_iterations; ++it) {
        const Eigen::VectorXd g = prob.merit_gradient(x);
        const double pg = projected_gradient_norm(prob, x, g);
        if (pg < gradient_tolerance) {
            res.converged = true;
            return res;
        }
        res.iterations = it + 1;

        // Variables pinned at a bound by an outward-pointing gradient.
        const double eps = std::min(1e-8, pg);
        std::vector<Eigen::Index> free;
        std::vector<bool> active(static_cast<std::size_t>(n), false);
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lb = x(i) <= lb(i) + eps && g(i) > 0.0;
            const bool at_ub = x(i) >= ub(i) - eps && g(i) < 0.0;
            active[static_cast<std::size_t>(i)] = at_lb || at_ub;
            if (!active[static_cast<std::size_t>(i)]) free.push_back(i);
        }

        const Eigen::MatrixXd hess = prob.merit_hessian(x);
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (active[static_cast<std::size_t>(i)]) dir(i) = -g(i) / std::max(hess(i, i), 1e-12);
        }
        if (!free.empty()) {
            const auto m = static_cast<Eigen::Index>(free.size());
            Eigen::MatrixXd hf(m, m);
            Eigen::VectorXd gf(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                gf(a) = g(free[static_cast<std::size_t>(a)]);
                for (Eigen::Index b = 0; b < m; ++b) {
                    hf(a, b) = hess(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
                }
            }
            // Shift the spectrum until the reduced Hessian is positive definite.
            double shift = 0.0;
            const double base = std::max(1e-10, hf.diagonal().cwiseAbs().maxCoeff() * 1e-10);
            Eigen::VectorXd df;
            for (int attempt = 0; attempt < 60; ++attempt) {
                Eigen::LLT<Eigen::MatrixXd> llt(hf + shift * Eigen::MatrixXd::Identity(m, m));
                if (llt.info() == Eigen::Success) {
                    df = llt.solve(-gf);
                    if (df.allFinite()) break;
                }
                shift = shift == 0.0 ? base : shift * 10.0;
                df.resize(0);
            }
            if (df.size() != m) df = -gf;
            for (Eigen::Index a = 0; a < m; ++a) dir(free[static_cast<std::size_t>(a)]) = df(a);
        }

        // Armijo backtracking along the projection arc; fall back to steepest descent.
        auto search = [&](const Eigen::VectorXd& d) -> bool {
            double step = 1.0;
            for (int k = 0; k < 60; ++k) {
                const Eigen::VectorXd trial = prob.project(x + step * d);
                const double ft = prob.merit(trial);
                const double decrease = g.dot(trial - x);
                if (ft <= f + 1e-4 * decrease && decrease < 0.0) {
                    x = trial;
                    f = ft;
                    return true;
                }
                step *= 0.5;
            }
            return false;
        };
        if (!search(dir) && !search(-g)) {
            // No representable decrease left: x is stationary to working precision.
            res.converged = pg < 1e3 * gradient_tolerance;
            return res;
        }
    }
    const Eigen::VectorXd g = prob.merit_gradient(x);
    res.converged = projected_gradient_norm(prob, x, g) < gradient_tolerance;
    return res;
}

}  // namespace detail

/// Solves the pivot's constrained estimation problem. `fixes` must cover every
/// subset member and `distances` every (pivot, neighbor) pair. Neighbor-to-
/// neighbor distances are never constrained. Returns a result flagged
/// `infeasible` when a measured distance cannot fit inside the box; throws
/// NonConvergenceError (carrying the last iterate) when the iteration budget
/// runs out on a feasible instance.
inline TentativeEstimateSet solve_tentative(const Subset& subset,
                                            const std::map<VehicleId, Point2>& fixes,
                                            const DistanceTable& distances,
                                            const NoiseModel& noise, const RoadSpace& space,
                                            const SolverOptions& options = {}) {
    noise.validate();
    space.validate();
    std::vector<Point2> fix_vec;
    fix_vec.reserve(subset.size());
    int pivot_index = -1;
    std::vector<std::pair<int, double>> dists;
    bool infeasible = false;
    for (std::size_t i = 0; i < subset.members.size(); ++i) {
        const VehicleId id = subset.members[i];
        auto it = fixes.find(id);
        if (it == fixes.end()) {
            throw Error("no GPS fix for subset member " + std::to_string(id));
        }
        fix_vec.push_back(it->second);
        if (id == subset.pivot) {
            pivot_index = static_cast<int>(i);
        } else {
            const double d = distances.at(subset.pivot, id);
            if (d > space.diagonal()) infeasible = true;
            dists.emplace_back(static_cast<int>(i), d);
        }
    }
    if (pivot_index < 0) throw Error("pivot is not a member of its own subset");

    detail::StarProblem prob(fix_vec, pivot_index, dists, noise, space);
    Eigen::VectorXd x(prob.dim());
    for (std::size_t i = 0; i < fix_vec.size(); ++i) {
        const Point2 c = space.clamp(fix_vec[i]);
        x.segment<2>(2 * static_cast<Eigen::Index>(i)) = c;
    }

    // The merit function works on A * min(sigma)^2, so penalties and
    // tolerances are in meters and a common rescaling of sigma leaves the
    // iterates unchanged.
    const double rho0 = 10.0;
    const double rho_max = rho0 * 1e12;
    prob.set_penalty(rho0);

    // Iterate past the convergence thresholds towards much tighter internal
    // targets while progress continues; convergence is judged on the
    // configured tolerances.
    const double inner_target = 1e-3 * options.gradient_tolerance;
    const double violation_target = 1e-4 * options.feasibility_tolerance;

    TentativeEstimateSet out;
    out.pivot = subset.pivot;
    bool converged = false;
    double previous_violation = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int outer = 0; outer < options.max_outer_iterations; ++outer) {
        OuterStep step;
        step.merit_start = prob.merit(x);
        const auto inner = detail::minimize_box(prob, x, options.max_inner_iterations, inner_target);
        step.inner_iterations = inner.iterations;
        step.merit_end = prob.merit(x);
        step.max_violation = prob.max_violation(x);
        const double pg = detail::projected_gradient_norm(prob, x, prob.merit_gradient(x));
        out.history.push_back(step);

        converged = pg < options.gradient_tolerance &&
                    step.max_violation < options.feasibility_tolerance;
        if (converged) {
            if (step.max_violation < violation_target) break;
            stalled = step.max_violation > 0.5 * previous_violation ? stalled + 1 : 0;
            if (stalled >= 2) break;
        }
        prob.multipliers() += prob.penalty() * prob.constraint_values(x);
        if (step.max_violation > 0.25 * previous_violation) {
            prob.set_penalty(std::min(prob.penalty() * 10.0, rho_max));
        }
        previous_violation = step.max_violation;
    }

    const auto pts = prob.points(x);
    for (std::size_t i = 0; i < pts.size(); ++i) out.estimates.emplace(subset.members[i], pts[i]);
    out.objective_value = prob.objective(x);
    out.max_violation = prob.max_violation(x);
    if (infeasible) {
        out.status = SolveStatus::infeasible;
        return out;
    }
    if (!converged) {
        out.status = SolveStatus::not_converged;
        throw NonConvergenceError("pivot " + std::to_string(subset.pivot) +
                                      ": no convergence within the iteration budget (violation " +
                                      std::to_string(out.max_violation) + " m)",
                                  out);
    }
    out.status = SolveStatus::converged;
    return out;
}

}  // namespace vloc::dlea
