#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sarcnn/backprojection.hpp"
#include "sarcnn/scene.hpp"

using namespace sarcnn;

namespace {

RawSarData simulate_smoothed(const std::vector<ShapeSpec>& shapes, double h, bool smoothed = true) {
    RoiGrid g;
    const FlightTrack track{20.0, h, 100, 1.0};
    auto raw = simulate(render(g, shapes), track, default_time_axis(track, g));
    return smoothed ? smooth(raw) : raw;
}

/// Centroid of the pixels at or above the 95th intensity percentile.
Point2 top_centroid(const RoiGrid& g, const Matrix<double>& img) {
    std::vector<double> sorted(img.values().begin(), img.values().end());
    std::sort(sorted.begin(), sorted.end());
    const double cut = sorted[static_cast<std::size_t>(0.95 * static_cast<double>(sorted.size()))];
    double sx = 0, sy = 0, n = 0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j)
            if (img(i, j) >= cut) {
                sx += g.coord(i);
                sy += g.coord(j);
                n += 1;
            }
    return {sx / n, sy / n};
}

}  // namespace

TEST(Backproject, ZeroDataGivesZeroImage) {
    RoiGrid g;
    RawSarData raw{Matrix<double>(100, 100, 0.0), {15.0, 70.0, 100}, {20.0, 5.0, 100, 1.0}, true};
    const auto img = backproject(raw, g);
    for (double v : img.values.values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(img.tolerance, 0.1);
}

TEST(Backproject, OutputSpansUnitInterval) {
    const auto img = backproject(simulate_smoothed({square(5.5, {4.0, 4.0})}, 5.0), RoiGrid{});
    EXPECT_EQ(img.values.min(), 0.0);
    EXPECT_EQ(img.values.max(), 1.0);
    for (double v : img.values.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Backproject, LocatesSingleBump) {
    RoiGrid g;
    Rng rng(11);
    for (int k = 0; k < 4; ++k) {
        const Point2 c = sample_center(-5.0, 5.0, rng);
        const auto img = backproject(simulate_smoothed({circle(2.0, c)}, 5.0), g);
        const Point2 found = top_centroid(g, img.values);
        EXPECT_LE(std::hypot(found.x - c.x, found.y - c.y), 2.0 * g.spacing()) << c.x << "," << c.y;
    }
}

TEST(Backproject, SmoothingSuppressesArtifacts) {
    RoiGrid g;
    const auto sq = square(5.5, {4.0, 4.0});
    const auto smoothed = simulate_smoothed({sq}, 5.0);
    const auto raw = simulate_smoothed({sq}, 5.0, false);
    const auto pos = flight_positions(raw.track);
    const auto with = backproject(smoothed, g).values;
    const auto without = backproject_values(raw.values, pos, raw.axis, 1.0, g, 0.1);
    // Outside the square dilated by one unit of length.
    double out_with = 0.0, out_without = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) {
            const double dx = std::max(std::abs(g.coord(i) - 4.0) - 2.75, 0.0);
            const double dy = std::max(std::abs(g.coord(j) - 4.0) - 2.75, 0.0);
            if (std::hypot(dx, dy) > 1.0) {
                out_with += with(i, j);
                out_without += without(i, j);
            }
        }
    EXPECT_LT(out_with, out_without);
}

TEST(Backproject, ConstantImageMapsToZeros) {
    // Data that is constant on every ring and a tolerance wide enough to reach every pixel.
    RoiGrid g;
    FlightTrack track{20.0, 0.0, 12, 1.0};
    const auto axis = default_time_axis(track, g, 400);
    RawSarData raw{Matrix<double>(400, 12, 3.0), axis, track, true};
    const auto img = backproject(raw, g, 1.0);
    for (double v : img.values.values()) EXPECT_EQ(v, 0.0);
}

TEST(Backproject, TinyToleranceLeavesUnhitPixelsFinite) {
    RoiGrid g;
    const auto data = simulate_smoothed({circle(2.0, {4.0, 4.0})}, 0.0);
    const auto img = backproject(data, g, 0.2 * g.spacing());
    for (double v : img.values.values()) EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(img.values.max(), 1.0);
}

TEST(Backproject, AntennaOrderIrrelevant) {
    RoiGrid g;
    const auto data = simulate_smoothed({rhombus(3.0, {-2.0, 4.0})}, 5.0);
    const auto pos = flight_positions(data.track);
    std::vector<std::size_t> perm(pos.size());
    for (std::size_t s = 0; s < perm.size(); ++s) perm[s] = (s * 37 + 11) % perm.size();
    std::vector<Point3> shuffled(pos.size());
    Matrix<double> cols(data.values.rows(), data.values.cols());
    for (std::size_t s = 0; s < perm.size(); ++s) {
        shuffled[s] = pos[perm[s]];
        for (std::size_t i = 0; i < cols.rows(); ++i) cols(i, s) = data.values(i, perm[s]);
    }
    const auto a = backproject_values(data.values, pos, data.axis, 1.0, g, 0.1);
    const auto b = backproject_values(cols, shuffled, data.axis, 1.0, g, 0.1);
    EXPECT_EQ(a, b);
}

TEST(Backproject, RejectsBadInput) {
    RoiGrid g;
    const auto raw = simulate_smoothed({circle(2.0, {4.0, 4.0})}, 5.0, false);
    try {
        backproject(raw, g);
        FAIL() << "unsmoothed data accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::state);
    }
    const auto sm = smooth(raw);
    EXPECT_THROW(backproject(sm, g, 0.0), Error);
    EXPECT_THROW(backproject(sm, g, -0.1), Error);
}
