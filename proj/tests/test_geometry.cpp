#include <gtest/gtest.h>

#include <random>

#include "driftsearch/geometry.hpp"

using namespace driftsearch;

TEST(ConvexHull, SinglePointIsDegeneratePolygon) {
    const std::vector<Vec2> pts{{3, 4}};
    const Polygon h = convex_hull(pts);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(h[0], (Vec2{3, 4}));
}

TEST(ConvexHull, SquareCornersWithInteriorPoints) {
    std::vector<Vec2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.7}, {0.5, 0}};
    const Polygon h = convex_hull(pts);
    ASSERT_EQ(h.size(), 4u);
    EXPECT_GT(signed_area(h), 0.0);
    EXPECT_DOUBLE_EQ(polygon_area(h), 1.0);
    for (const Vec2& c : {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}})
        EXPECT_NE(std::find(h.begin(), h.end(), c), h.end());
}

TEST(ConvexHull, CollinearPointsGiveSegment) {
    std::vector<Vec2> pts{{0, 0}, {2, 2}, {1, 1}, {3, 3}};
    const Polygon h = convex_hull(pts);
    ASSERT_EQ(h.size(), 2u);
    EXPECT_DOUBLE_EQ(distance(h[0], h[1]), std::sqrt(18.0));
}

TEST(ConvexHull, RandomPointsAreContained) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-50, 50);
    std::vector<Vec2> pts(100);
    for (auto& p : pts) p = {u(gen), u(gen)};
    const Polygon h = convex_hull(pts);
    EXPECT_TRUE(is_convex(h));
    EXPECT_GT(signed_area(h), 0.0);
    for (const auto& p : pts) EXPECT_TRUE(contains(h, p));
}

TEST(Polygon, ConvexityAndOrientation) {
    const Polygon cw{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    EXPECT_TRUE(is_convex(cw));
    EXPECT_LT(signed_area(cw), 0.0);
    EXPECT_GT(signed_area(counterclockwise(cw)), 0.0);
    const Polygon dart{{0, 0}, {2, 0}, {1, 0.3}, {1, 2}};
    EXPECT_FALSE(is_convex(dart));
}

TEST(Polygon, ContainsIncludesBoundary) {
    const Polygon sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    EXPECT_TRUE(contains(sq, {0.5, 0.5}));
    EXPECT_TRUE(contains(sq, {1.0, 0.5}));
    EXPECT_FALSE(contains(sq, {1.01, 0.5}));
}

TEST(Mat2, Determinant) {
    EXPECT_DOUBLE_EQ((Mat2{2, 1, 3, 4}).det(), 5.0);
    EXPECT_DOUBLE_EQ(Mat2::identity().det(), 1.0);
}
