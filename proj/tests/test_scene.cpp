#include <gtest/gtest.h>

#include <cmath>

#include "sarcnn/scene.hpp"

using namespace sarcnn;

namespace {

std::size_t count_ones(const ReflectivityMap& m) {
    std::size_t n = 0;
    for (double v : m.values.values()) n += v == 1.0;
    return n;
}

std::size_t index_of(const RoiGrid& g, double z) {
    return static_cast<std::size_t>(std::lround((z - g.z_min) / g.spacing()));
}

}  // namespace

TEST(RoiGrid, InclusiveEndpoints) {
    RoiGrid g;
    EXPECT_DOUBLE_EQ(g.spacing(), 20.0 / 99.0);
    EXPECT_DOUBLE_EQ(g.coord(0), -10.0);
    EXPECT_NEAR(g.coord(99), 10.0, 1e-12);
    EXPECT_THROW((RoiGrid{1.0, 1.0, 10}.validate()), Error);
    EXPECT_THROW((RoiGrid{-1.0, 1.0, 1}.validate()), Error);
}

TEST(Render, CircleCenterAndFarCorner) {
    // A grid whose coordinates include 4.5 exactly: [-10, 10] with 41 points has spacing 0.5.
    RoiGrid g{-10.0, 10.0, 41};
    const auto m = render(g, {circle(2.0, {4.5, 4.5})});
    EXPECT_EQ(m.values(index_of(g, 4.5), index_of(g, 4.5)), 1.0);
    EXPECT_EQ(m.values(0, 0), 0.0);
}

TEST(Render, ValuesAreBinary) {
    const auto m = render(RoiGrid{}, {ellipse(1.5, 3.0, {4.0, 5.0}), rhombus(3.0, {-3.0, 2.0})});
    for (double v : m.values.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(Render, DiskAreaMatchesAnalytic) {
    RoiGrid g;
    const auto m = render(g, {circle(2.0, {4.5, 4.5})});
    const double area = static_cast<double>(count_ones(m)) * g.spacing() * g.spacing();
    EXPECT_NEAR(area, M_PI * 4.0, 0.05 * M_PI * 4.0);
}

TEST(Render, AreaErrorShrinksUnderRefinement) {
    for (const auto& shape : {circle(2.0, {4.3, 4.7}), square(5.5, {4.1, 3.6}), ellipse(1.5, 3.0, {3.3, 5.2}),
                              rhombus(3.0, {5.1, 4.4})}) {
        auto err = [&](std::size_t n) {
            RoiGrid g{-10.0, 10.0, n};
            const auto m = render(g, {shape});
            return std::abs(static_cast<double>(count_ones(m)) * g.spacing() * g.spacing() - shape.area());
        };
        EXPECT_LE(err(400), 0.5 * err(100) + 1e-12) << shape.name();
    }
}

TEST(Render, ClosedBoundary) {
    // Square of side 1 centred on a grid point: its edges land on grid coordinates.
    RoiGrid g{-10.0, 10.0, 41};
    const auto m = render(g, {square(1.0, {0.0, 0.0})});
    EXPECT_EQ(count_ones(m), 9u);
}

TEST(Render, UnionIsElementwiseMax) {
    RoiGrid g;
    const std::vector<ShapeSpec> a{circle(2.0, {1.0, 1.0})};
    const std::vector<ShapeSpec> b{square(5.5, {2.0, 0.5})};
    const auto ma = render(g, a);
    const auto mb = render(g, b);
    const auto mab = render(g, {a[0], b[0]});
    for (std::size_t i = 0; i < ma.values.size(); ++i)
        EXPECT_EQ(mab.values.values()[i], std::max(ma.values.values()[i], mb.values.values()[i]));
}

TEST(Render, Idempotent) {
    const std::vector<ShapeSpec> shapes{rhombus(3.0, {4.2, 3.9})};
    EXPECT_EQ(render(RoiGrid{}, shapes).values, render(RoiGrid{}, shapes).values);
}

TEST(Render, RejectsBadInput) {
    RoiGrid g;
    EXPECT_THROW(render(g, {}), Error);
    EXPECT_THROW(render(g, {circle(0.0, {0, 0})}), Error);
    EXPECT_THROW(render(g, {square(-1.0, {0, 0})}), Error);
    EXPECT_THROW(render(g, {ellipse(1.0, 0.0, {0, 0})}), Error);
    EXPECT_THROW(render(g, {rhombus(-2.0, {0, 0})}), Error);
    // Entirely outside the grid.
    EXPECT_THROW(render(g, {circle(1.0, {50.0, 50.0})}), Error);
    const auto allowed = render(g, {circle(1.0, {50.0, 50.0})}, EmptyShapePolicy::allow);
    EXPECT_EQ(count_ones(allowed), 0u);
}

TEST(Render, EllipseAxesOrientation) {
    // Semi-axis a lies along z1 (the row index), b along z2.
    RoiGrid g{-10.0, 10.0, 201};
    const auto m = render(g, {ellipse(1.5, 3.0, {0.0, 0.0})});
    const std::size_t c = index_of(g, 0.0);
    EXPECT_EQ(m.values(c, index_of(g, 2.9)), 1.0);
    EXPECT_EQ(m.values(index_of(g, 2.9), c), 0.0);
}

TEST(SampleCenter, DegenerateInterval) {
    Rng rng(1);
    const Point2 p = sample_center(4.0, 4.0, rng);
    EXPECT_EQ(p.x, 4.0);
    EXPECT_EQ(p.y, 4.0);
}

TEST(SampleCenter, SupportBound) {
    Rng rng(2);
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 10000; ++i) {
        const Point2 p = sample_center(3.0, 6.0, rng);
        lo = std::min({lo, p.x, p.y});
        hi = std::max({hi, p.x, p.y});
    }
    EXPECT_GE(lo, 3.0);
    EXPECT_LE(hi, 6.0);
    EXPECT_LT(lo, 3.01);
    EXPECT_GT(hi, 5.99);
}

TEST(SampleCenter, DeterministicAndValidated) {
    Rng a(7), b(7);
    const Point2 p = sample_center(3.0, 6.0, a);
    const Point2 q = sample_center(3.0, 6.0, b);
    EXPECT_EQ(p, q);
    EXPECT_THROW(sample_center(6.0, 3.0, a), Error);
}
