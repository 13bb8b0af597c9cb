#pragma once

// Negative log-likelihood of candidate positions given the GPS fixes, with
// the constant normalization term dropped:
//   A = sum_i (x_i - fx_i - mu_x)^2 / (2 sx^2) + (y_i - fy_i - mu_y)^2 / (2 sy^2)

#include <cassert>
#include <span>
#include <vector>

#include "vloc/types.hpp"

namespace vloc::dlea {

inline double objective(std::span<const Point2> estimates, std::span<const Point2> fixes,
                        const NoiseModel& noise) {
    assert(estimates.size() == fixes.size());
    const double cx = 0.5 / (noise.stddev.x() * noise.stddev.x());
    const double cy = 0.5 / (noise.stddev.y() * noise.stddev.y());
    double a = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double rx = estimates[i].x() - fixes[i].x() - noise.mean.x();
        const double ry = estimates[i].y() - fixes[i].y() - noise.mean.y();
        a += cx * rx * rx + cy * ry * ry;
    }
    return a;
}

inline std::vector<Point2> objective_gradient(std::span<const Point2> estimates,
                                              std::span<const Point2> fixes,
                                              const NoiseModel& noise) {
    assert(estimates.size() == fixes.size());
    const double ix = 1.0 / (noise.stddev.x() * noise.stddev.x());
    const double iy = 1.0 / (noise.stddev.y() * noise.stddev.y());
    std::vector<Point2> g(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        g[i] = Point2((estimates[i].x() - fixes[i].x() - noise.mean.x()) * ix,
                      (estimates[i].y() - fixes[i].y() - noise.mean.y()) * iy);
    }
    return g;
}

}  // namespace vloc::dlea
