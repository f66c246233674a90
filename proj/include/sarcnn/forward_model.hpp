#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sarcnn/error.hpp"
#include "sarcnn/matrix.hpp"
#include "sarcnn/parallel.hpp"
#include "sarcnn/scene.hpp"

namespace sarcnn {

inline constexpr double two_pi = 2.0 * M_PI;

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// Circular flight track at constant height; antenna k sits at angle 2*pi*k/n_positions.
struct FlightTrack {
    double radius = 20.0;
    double height = 0.0;
    std::size_t n_positions = 100;
    double wave_speed = 1.0;

    void validate() const {
        require(radius > 0.0, "FlightTrack: radius must be positive");
        require(height >= 0.0, "FlightTrack: height must be nonnegative");
        require(n_positions >= 1, "FlightTrack: need at least one antenna position");
        require(wave_speed > 0.0, "FlightTrack: wave speed must be positive");
    }
};

/// Evenly spaced fast-time samples, endpoints inclusive.
struct FastTimeAxis {
    double t_min = 5.0;
    double t_max = 23.0;
    std::size_t n_t = 100;

    void validate() const {
        require(t_min < t_max, "FastTimeAxis: t_min must be below t_max");
        require(n_t >= 2, "FastTimeAxis: need at least 2 samples");
    }
    double spacing() const { return (t_max - t_min) / static_cast<double>(n_t - 1); }
    double value(std::size_t i) const { return t_min + static_cast<double>(i) * spacing(); }
};

/// The literal [5, 23] fast-time interval with 100 samples.
inline FastTimeAxis fixed_time_axis() { return {5.0, 23.0, 100}; }

struct RawSarData {
    Matrix<double> values;  // n_t x n_positions
    FastTimeAxis axis;
    FlightTrack track;
    bool smoothed = false;
};

inline std::vector<Point3> flight_positions(const FlightTrack& track) {
    track.validate();
    std::vector<Point3> out;
    out.reserve(track.n_positions);
    for (std::size_t k = 0; k < track.n_positions; ++k) {
        const double theta = two_pi * static_cast<double>(k) / static_cast<double>(track.n_positions);
        out.push_back({track.radius * std::cos(theta), track.radius * std::sin(theta), track.height});
    }
    return out;
}

/// Radius of the ground intersection of the sphere c0*t/2 about an antenna at height h,
/// or nullopt when the sphere does not reach the ground.
inline std::optional<double> ground_circle_radius(double t, double h, double c0) {
    require(t > 0.0, "ground_circle_radius: t must be positive");
    const double half = c0 * t / 2.0;
    const double sq = half * half - h * h;
    if (!(sq > 0.0)) return std::nullopt;
    return std::sqrt(sq);
}

/// Bilinear interpolation of the map at (x, y); zero outside the grid extent.
inline double bilinear(const ReflectivityMap& map, double x, double y) {
    const RoiGrid& g = map.grid;
    const double delta = g.spacing();
    const double u = (x - g.z_min) / delta;
    const double v = (y - g.z_min) / delta;
    const double last = static_cast<double>(g.n - 1);
    if (!(u >= 0.0 && v >= 0.0 && u <= last && v <= last)) return 0.0;
    const std::size_t i0 = std::min(static_cast<std::size_t>(u), g.n - 2);
    const std::size_t j0 = std::min(static_cast<std::size_t>(v), g.n - 2);
    const double fu = u - static_cast<double>(i0);
    const double fv = v - static_cast<double>(j0);
    const Matrix<double>& m = map.values;
    return (1.0 - fu) * ((1.0 - fv) * m(i0, j0) + fv * m(i0, j0 + 1)) +
           fu * ((1.0 - fv) * m(i0 + 1, j0) + fv * m(i0 + 1, j0 + 1));
}

/// Arc samples used for a circle of radius r on a grid with the given spacing.
inline std::size_t arc_sample_count(double r, double spacing) {
    const double n = std::ceil(two_pi * r / (spacing / 2.0));
    return std::max<std::size_t>(64, static_cast<std::size_t>(n));
}

/// Line integrals of a fixed map over circles.
///
/// The quadrature is (2*pi*r/N) * sum_m V(c + r*(cos phi_m, sin phi_m)), phi_m = 2*pi*m/N,
/// summed in ascending m. Terms whose sample point cannot touch the nonzero support are
/// exactly zero; they are skipped, which leaves the sum bit-identical to the full loop.
class CircleIntegrator {
public:
    explicit CircleIntegrator(const ReflectivityMap& map) : map_(&map) {
        const RoiGrid& g = map.grid;
        std::size_t i_lo = g.n, i_hi = 0, j_lo = g.n, j_hi = 0;
        for (std::size_t i = 0; i < g.n; ++i) {
            for (std::size_t j = 0; j < g.n; ++j) {
                if (map.values(i, j) != 0.0) {
                    i_lo = std::min(i_lo, i);
                    i_hi = std::max(i_hi, i);
                    j_lo = std::min(j_lo, j);
                    j_hi = std::max(j_hi, j);
                }
            }
        }
        empty_ = i_lo > i_hi;
        if (empty_) return;
        // Two spacings of margin keep rounding in the sample coordinates harmless.
        const double margin = 2.0 * g.spacing();
        box_ = {g.coord(i_lo) - margin, g.coord(i_hi) + margin, g.coord(j_lo) - margin, g.coord(j_hi) + margin};
    }

    double operator()(Point2 center, double r) const {
        require(r > 0.0, "circle_integral: radius must be positive");
        if (empty_) return 0.0;
        const std::size_t n_arc = arc_sample_count(r, map_->grid.spacing());

        const double dx = std::max({box_.x0 - center.x, 0.0, center.x - box_.x1});
        const double dy = std::max({box_.y0 - center.y, 0.0, center.y - box_.y1});
        const double d_near = std::hypot(dx, dy);
        const double fx = std::max(std::abs(center.x - box_.x0), std::abs(center.x - box_.x1));
        const double fy = std::max(std::abs(center.y - box_.y0), std::abs(center.y - box_.y1));
        const double d_far = std::hypot(fx, fy);
        if (r < d_near || r > d_far) return 0.0;

        double sum = 0.0;
        auto accumulate = [&](std::size_t first, std::size_t last) {
            for (std::size_t m = first; m <= last; ++m) sum += sample(center, r, m, n_arc);
        };

        const bool outside = d_near > 0.0;
        if (!outside) {
            accumulate(0, n_arc - 1);
        } else {
            // Directions from an exterior point into a convex box span less than pi.
            const double beta = std::atan2((box_.y0 + box_.y1) / 2.0 - center.y, (box_.x0 + box_.x1) / 2.0 - center.x);
            double lo = 0.0, hi = 0.0;
            const std::array<Point2, 4> corners{
                {{box_.x0, box_.y0}, {box_.x0, box_.y1}, {box_.x1, box_.y0}, {box_.x1, box_.y1}}};
            for (const Point2& p : corners) {
                double off = std::atan2(p.y - center.y, p.x - center.x) - beta;
                off = std::remainder(off, two_pi);
                lo = std::min(lo, off);
                hi = std::max(hi, off);
            }
            const double scale = static_cast<double>(n_arc) / two_pi;
            const auto n = static_cast<long long>(n_arc);
            long long m_lo = static_cast<long long>(std::floor((beta + lo) * scale)) - 1;
            long long m_hi = static_cast<long long>(std::ceil((beta + hi) * scale)) + 1;
            if (m_hi - m_lo + 1 >= n) {
                accumulate(0, n_arc - 1);
            } else {
                const long long wrap = (m_lo >= 0) ? m_lo / n : -((-m_lo + n - 1) / n);
                m_lo -= wrap * n;
                m_hi -= wrap * n;
                if (m_hi < n) {
                    accumulate(static_cast<std::size_t>(m_lo), static_cast<std::size_t>(m_hi));
                } else {
                    accumulate(0, static_cast<std::size_t>(m_hi - n));
                    accumulate(static_cast<std::size_t>(m_lo), n_arc - 1);
                }
            }
        }
        return (two_pi * r / static_cast<double>(n_arc)) * sum;
    }

    /// One quadrature node; exposed so tests can rebuild the unclipped sum.
    double sample(Point2 center, double r, std::size_t m, std::size_t n_arc) const {
        const double phi = two_pi * static_cast<double>(m) / static_cast<double>(n_arc);
        const double x = center.x + r * std::cos(phi);
        const double y = center.y + r * std::sin(phi);
        if (x < box_.x0 || x > box_.x1 || y < box_.y0 || y > box_.y1) return 0.0;
        return bilinear(*map_, x, y);
    }

private:
    struct Box {
        double x0, x1, y0, y1;
    };
    const ReflectivityMap* map_;
    bool empty_ = true;
    Box box_{};
};

inline double circle_integral(const ReflectivityMap& map, Point2 center, double r) {
    return CircleIntegrator(map)(center, r);
}

/// Raw data: entry (i, j) is the circle integral about antenna j's ground position with
/// the ground-circle radius of fast time t_i, or 0 where the sphere misses the ground.
inline RawSarData simulate(const ReflectivityMap& map, const FlightTrack& track, const FastTimeAxis& axis) {
    map.grid.validate();
    track.validate();
    axis.validate();
    const auto positions = flight_positions(track);

    std::vector<std::optional<double>> radii(axis.n_t);
    for (std::size_t i = 0; i < axis.n_t; ++i) {
        const double t = axis.value(i);
        radii[i] = t > 0.0 ? ground_circle_radius(t, track.height, track.wave_speed) : std::nullopt;
    }

    RawSarData out{Matrix<double>(axis.n_t, track.n_positions, 0.0), axis, track, false};
    const CircleIntegrator integrate(map);
    parallel_for(track.n_positions, [&](std::size_t j) {
        const Point2 c{positions[j].x, positions[j].y};
        for (std::size_t i = 0; i < axis.n_t; ++i) {
            if (radii[i]) out.values(i, j) = integrate(c, *radii[i]);
        }
    });
    return out;
}

/// Fast-time taper exp(-((t - t_min)^-2 + (t_max - t)^-2)); zero at and beyond the endpoints.
inline double smoothing_window(double t, const FastTimeAxis& axis) {
    if (!(t > axis.t_min && t < axis.t_max)) return 0.0;
    const double a = t - axis.t_min;
    const double b = axis.t_max - t;
    return std::exp(-(1.0 / (a * a) + 1.0 / (b * b)));
}

inline RawSarData smooth(RawSarData raw) {
    if (raw.smoothed) fail(ErrorCode::state, "smooth: data is already smoothed");
    for (std::size_t i = 0; i < raw.values.rows(); ++i) {
        const double mu = smoothing_window(raw.axis.value(i), raw.axis);
        for (std::size_t j = 0; j < raw.values.cols(); ++j) raw.values(i, j) *= mu;
    }
    raw.smoothed = true;
    return raw;
}

/// Fast-time axis spanning the two-way travel times between the track and every grid pixel.
inline FastTimeAxis default_time_axis(const FlightTrack& track, const RoiGrid& grid, std::size_t n_t = 100) {
    grid.validate();
    const auto positions = flight_positions(track);
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = 0.0;
    for (const Point3& p : positions) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double dx = grid.coord(i) - p.x;
            for (std::size_t j = 0; j < grid.n; ++j) {
                const double dy = grid.coord(j) - p.y;
                const double d = std::sqrt(dx * dx + dy * dy + p.z * p.z);
                d_min = std::min(d_min, d);
                d_max = std::max(d_max, d);
            }
        }
    }
    require(d_min > 0.0, "default_time_axis: an antenna coincides with a grid pixel");
    FastTimeAxis axis{2.0 * d_min / track.wave_speed, 2.0 * d_max / track.wave_speed, n_t};
    axis.validate();
    return axis;
}

}  // namespace sarcnn
