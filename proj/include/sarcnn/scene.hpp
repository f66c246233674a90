#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sarcnn/error.hpp"
#include "sarcnn/matrix.hpp"
#include "sarcnn/random.hpp"

namespace sarcnn {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Square region of interest sampled on an n x n grid, endpoints inclusive.
struct RoiGrid {
    double z_min = -10.0;
    double z_max = 10.0;
    std::size_t n = 100;

    void validate() const {
        require(z_min < z_max, "RoiGrid: z_min must be below z_max");
        require(n >= 2, "RoiGrid: need at least 2 points per axis");
    }
    double spacing() const { return (z_max - z_min) / static_cast<double>(n - 1); }
    double coord(std::size_t i) const { return z_min + static_cast<double>(i) * spacing(); }

    friend bool operator==(const RoiGrid&, const RoiGrid&) = default;
};

struct Circle {
    double radius;
    friend bool operator==(const Circle&, const Circle&) = default;
};
struct Square {
    double side;
    friend bool operator==(const Square&, const Square&) = default;
};
/// Semi-axis a runs along z1, b along z2.
struct Ellipse {
    double a;
    double b;
    friend bool operator==(const Ellipse&, const Ellipse&) = default;
};
/// |dz1| + |dz2| <= d.
struct Rhombus {
    double d;
    friend bool operator==(const Rhombus&, const Rhombus&) = default;
};

using ShapeKind = std::variant<Circle, Square, Ellipse, Rhombus>;

struct ShapeSpec {
    ShapeKind kind;
    Point2 center;

    friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;

    void validate() const {
        std::visit(
            [](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Circle>) require(s.radius > 0, "circle radius must be positive");
                if constexpr (std::is_same_v<S, Square>) require(s.side > 0, "square side must be positive");
                if constexpr (std::is_same_v<S, Ellipse>) require(s.a > 0 && s.b > 0, "ellipse semi-axes must be positive");
                if constexpr (std::is_same_v<S, Rhombus>) require(s.d > 0, "rhombus half-diagonal must be positive");
            },
            kind);
        require(std::isfinite(center.x) && std::isfinite(center.y), "shape center must be finite");
    }

    /// Closed-set membership test.
    bool contains(double z1, double z2) const {
        const double dx = z1 - center.x;
        const double dy = z2 - center.y;
        return std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Circle>) {
                    return dx * dx + dy * dy <= s.radius * s.radius;
                } else if constexpr (std::is_same_v<S, Square>) {
                    const double h = s.side / 2.0;
                    return std::abs(dx) <= h && std::abs(dy) <= h;
                } else if constexpr (std::is_same_v<S, Ellipse>) {
                    return (dx * dx) / (s.a * s.a) + (dy * dy) / (s.b * s.b) <= 1.0;
                } else {
                    return std::abs(dx) + std::abs(dy) <= s.d;
                }
            },
            kind);
    }

    /// Analytic area of the shape (unclipped).
    double area() const {
        return std::visit(
            [](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Circle>) return M_PI * s.radius * s.radius;
                else if constexpr (std::is_same_v<S, Square>) return s.side * s.side;
                else if constexpr (std::is_same_v<S, Ellipse>) return M_PI * s.a * s.b;
                else return 2.0 * s.d * s.d;
            },
            kind);
    }

    std::string name() const {
        static constexpr const char* names[] = {"circle", "square", "ellipse", "rhombus"};
        return names[kind.index()];
    }
};

inline ShapeSpec circle(double radius, Point2 center) { return {Circle{radius}, center}; }
inline ShapeSpec square(double side, Point2 center) { return {Square{side}, center}; }
inline ShapeSpec ellipse(double a, double b, Point2 center) { return {Ellipse{a, b}, center}; }
inline ShapeSpec rhombus(double d, Point2 center) { return {Rhombus{d}, center}; }

/// Nonnegative reflectivity sampled on the ROI grid; values(i, j) sits at (coord(i), coord(j)).
struct ReflectivityMap {
    RoiGrid grid;
    Matrix<double> values;

    void validate() const {
        grid.validate();
        require(values.rows() == grid.n && values.cols() == grid.n, "ReflectivityMap: shape does not match grid");
        for (double v : values.values())
            require(std::isfinite(v) && v >= 0.0, "ReflectivityMap: values must be finite and nonnegative");
    }
};

enum class EmptyShapePolicy { reject, allow };

/// Characteristic function of the union of the shapes, evaluated at pixel coordinates.
inline ReflectivityMap render(const RoiGrid& grid, const std::vector<ShapeSpec>& shapes,
                              EmptyShapePolicy policy = EmptyShapePolicy::reject) {
    grid.validate();
    require(!shapes.empty(), "render: shape list is empty");
    for (const auto& s : shapes) s.validate();

    ReflectivityMap map{grid, Matrix<double>(grid.n, grid.n, 0.0)};
    for (const auto& shape : shapes) {
        bool hit = false;
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double z1 = grid.coord(i);
            for (std::size_t j = 0; j < grid.n; ++j) {
                if (shape.contains(z1, grid.coord(j))) {
                    map.values(i, j) = 1.0;
                    hit = true;
                }
            }
        }
        if (!hit && policy == EmptyShapePolicy::reject)
            fail(ErrorCode::invalid_argument, "render: " + shape.name() + " covers no grid point");
    }
    return map;
}

/// Both coordinates drawn independently and uniformly from [lo, hi].
inline Point2 sample_center(double lo, double hi, Rng& rng) {
    require(lo <= hi, "sample_center: lo must not exceed hi");
    const double x = uniform(rng, lo, hi);
    const double y = uniform(rng, lo, hi);
    return {x, y};
}

}  // namespace sarcnn
