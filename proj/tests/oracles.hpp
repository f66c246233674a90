#pragma once

// Reference computations that share no code with the library under test.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// Circle line integral by dense uniform angle sampling and nearest-pixel lookup.
/// `values` is n x n row-major over the inclusive grid [z_min, z_max]^2.
inline double circle_integral(const std::vector<double>& values, std::size_t n, double z_min, double z_max, double cx,
                              double cy, double r, std::size_t samples = 1000000) {
    const double h = (z_max - z_min) / static_cast<double>(n - 1);
    double sum = 0.0;
    for (std::size_t m = 0; m < samples; ++m) {
        const double phi = 2.0 * M_PI * (static_cast<double>(m) + 0.5) / static_cast<double>(samples);
        const double x = cx + r * std::cos(phi);
        const double y = cy + r * std::sin(phi);
        const double u = std::round((x - z_min) / h);
        const double v = std::round((y - z_min) / h);
        if (u < 0 || v < 0 || u > static_cast<double>(n - 1) || v > static_cast<double>(n - 1)) continue;
        sum += values[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)];
    }
    return 2.0 * M_PI * r * sum / static_cast<double>(samples);
}

/// Disk indicator on the inclusive grid, closed boundary.
inline std::vector<double> disk(std::size_t n, double z_min, double z_max, double cx, double cy, double r) {
    const double h = (z_max - z_min) / static_cast<double>(n - 1);
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double x = z_min + static_cast<double>(i) * h - cx;
            const double y = z_min + static_cast<double>(j) * h - cy;
            if (x * x + y * y <= r * r) v[i * n + j] = 1.0;
        }
    return v;
}

}  // namespace oracle
