#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "sarcnn/forward_model.hpp"

namespace sarcnn {

inline constexpr double default_backprojection_tolerance = 0.1;

struct BackprojectedImage {
    RoiGrid grid;
    Matrix<double> values;  // rescaled to [0, 1]
    double tolerance = default_backprojection_tolerance;
};

/// Backprojection accumulation for arbitrary antenna positions, without the smoothing check.
///
/// Each data value (i, s) is added to every pixel whose horizontal distance to antenna s
/// lies within tol of the ground-circle radius for t_i. Per-pixel sums are divided by hit
/// counts (unhit pixels stay 0) and the image is rescaled to [0, 1]. Antennas are visited
/// in lexicographic position order, so the result does not depend on column order.
inline Matrix<double> backproject_values(const Matrix<double>& data, std::span<const Point3> positions,
                                         const FastTimeAxis& axis, double wave_speed, const RoiGrid& grid,
                                         double tol) {
    grid.validate();
    axis.validate();
    require(tol > 0.0, "backproject: tolerance must be positive");
    require(wave_speed > 0.0, "backproject: wave speed must be positive");
    require(data.rows() == axis.n_t, "backproject: data rows must match the fast-time axis");
    require(data.cols() == positions.size(), "backproject: data columns must match antenna positions");

    std::vector<std::size_t> order(positions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Point3& p = positions[a];
        const Point3& q = positions[b];
        return std::tie(p.x, p.y, p.z) < std::tie(q.x, q.y, q.z);
    });

    // Per antenna: (radius, fast-time index) for samples whose sphere reaches the ground,
    // ascending in radius because t is ascending.
    struct Ring {
        double radius;
        std::size_t t_index;
    };
    std::vector<std::vector<Ring>> rings(positions.size());
    for (std::size_t s = 0; s < positions.size(); ++s) {
        for (std::size_t i = 0; i < axis.n_t; ++i) {
            const double t = axis.value(i);
            if (!(t > 0.0)) continue;
            if (auto r = ground_circle_radius(t, positions[s].z, wave_speed)) rings[s].push_back({*r, i});
        }
    }

    Matrix<double> image(grid.n, grid.n, 0.0);
    parallel_for(grid.n, [&](std::size_t p) {
        const double x = grid.coord(p);
        for (std::size_t q = 0; q < grid.n; ++q) {
            const double y = grid.coord(q);
            double acc = 0.0;
            std::size_t count = 0;
            for (std::size_t s : order) {
                const double d = std::hypot(x - positions[s].x, y - positions[s].y);
                const auto& rs = rings[s];
                auto it = std::lower_bound(rs.begin(), rs.end(), d - tol - 1e-9,
                                           [](const Ring& ring, double v) { return ring.radius < v; });
                for (; it != rs.end() && it->radius <= d + tol + 1e-9; ++it) {
                    if (std::abs(it->radius - d) <= tol) {
                        acc += data(it->t_index, s);
                        ++count;
                    }
                }
            }
            image(p, q) = count > 0 ? acc / static_cast<double>(count) : 0.0;
        }
    });
    rescale_unit(image);
    return image;
}

/// Reconstructs the scene from smoothed raw data along its flight track.
inline BackprojectedImage backproject(const RawSarData& data, const RoiGrid& grid,
                                      double tol = default_backprojection_tolerance) {
    if (!data.smoothed) fail(ErrorCode::state, "backproject: data must be smoothed first");
    require(tol > 0.0, "backproject: tolerance must be positive");
    const auto positions = flight_positions(data.track);
    return {grid, backproject_values(data.values, positions, data.axis, data.track.wave_speed, grid, tol), tol};
}

}  // namespace sarcnn
