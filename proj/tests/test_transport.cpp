#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "driftsearch/transport.hpp"

using namespace driftsearch;

namespace {

const Polygon kUnitSquare{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

// Largest |fraction inside [0,a)x[0,b) - ab| over random anchored boxes.
double star_discrepancy_estimate(const std::vector<Vec2>& pts, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double a = u(gen), b = u(gen);
        int inside = 0;
        for (const Vec2& p : pts) inside += (p.x < a && p.y < b);
        worst = std::max(worst, std::abs(double(inside) / pts.size() - a * b));
    }
    return worst;
}

}  // namespace

TEST(Halton, FirstPointsOfBases2And3) {
    EXPECT_DOUBLE_EQ(radical_inverse(1, 2), 0.5);
    EXPECT_DOUBLE_EQ(radical_inverse(6, 2), 0.375);
    EXPECT_DOUBLE_EQ(radical_inverse(5, 3), 7.0 / 9.0);
}

TEST(SeedHalton, EmptyWhenZero) {
    const auto e = seed_halton(SplashRegion(kUnitSquare, 0.0), 0);
    EXPECT_TRUE(e.empty());
    EXPECT_EQ(e.weight(), 0.0);
}

TEST(SeedHalton, UnitSquareFirstThree) {
    const auto e = seed_halton(SplashRegion(kUnitSquare, 2.5), 3);
    ASSERT_EQ(e.size(), 3u);
    EXPECT_DOUBLE_EQ(e.epoch, 2.5);
    EXPECT_DOUBLE_EQ(e.positions[0].x, 0.5);
    EXPECT_DOUBLE_EQ(e.positions[0].y, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(e.positions[1].x, 0.25);
    EXPECT_DOUBLE_EQ(e.positions[1].y, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(e.positions[2].x, 0.75);
    EXPECT_DOUBLE_EQ(e.positions[2].y, 1.0 / 9.0);
}

TEST(SeedHalton, RejectionContinuesSequenceIndex) {
    const Polygon tri{{0, 0}, {4, 0}, {0, 2}};
    const auto e = seed_halton(SplashRegion(tri, 0.0), 50);
    // Oracle: walk the Halton sequence and keep points under the hypotenuse.
    std::vector<Vec2> expected;
    for (std::uint64_t i = 1; expected.size() < 50; ++i) {
        double x = 0, y = 0, f = 0.5;
        for (std::uint64_t n = i; n > 0; n /= 2, f /= 2) x += f * double(n % 2);
        f = 1.0 / 3.0;
        for (std::uint64_t n = i; n > 0; n /= 3, f /= 3) y += f * double(n % 3);
        const Vec2 p{4 * x, 2 * y};
        if (p.x / 4 + p.y / 2 <= 1.0) expected.push_back(p);
    }
    for (std::size_t k = 0; k < 50; ++k) {
        EXPECT_NEAR(e.positions[k].x, expected[k].x, 1e-12);
        EXPECT_NEAR(e.positions[k].y, expected[k].y, 1e-12);
    }
}

TEST(SeedHalton, LowerDiscrepancyThanPseudoRandom) {
    const auto h = seed_halton(SplashRegion(kUnitSquare, 0.0), 1024);
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> r(1024);
    for (auto& p : r) p = {u(gen), u(gen)};
    std::mt19937_64 boxes_a(7), boxes_b(7);
    EXPECT_LT(star_discrepancy_estimate(h.positions, boxes_a), star_discrepancy_estimate(r, boxes_b));
}

TEST(SplashRegion, RejectsDegenerateOrConcave) {
    EXPECT_THROW(SplashRegion(Polygon{{0, 0}, {1, 1}, {2, 2}}, 0), ConfigError);
    EXPECT_THROW(SplashRegion(Polygon{{0, 0}, {1, 0}}, 0), ConfigError);
    EXPECT_THROW(SplashRegion(Polygon{{0, 0}, {2, 0}, {1, 0.3}, {1, 2}}, 0), ConfigError);
}

TEST(Advect, ZeroUniformAndRotation) {
    const auto e = seed_halton(SplashRegion({{10, 10}, {20, 10}, {20, 20}, {10, 20}}, 0.0), 200);
    const auto same = advect(e, ZeroFlow{}, 50.0);
    EXPECT_EQ(same.positions, e.positions);
    EXPECT_DOUBLE_EQ(same.epoch, 50.0);

    const auto moved = advect(e, UniformFlow({1.0, -0.5}), 4.0);
    ASSERT_EQ(moved.size(), e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        EXPECT_NEAR(moved.positions[k].x, e.positions[k].x + 4.0, 1e-9);
        EXPECT_NEAR(moved.positions[k].y, e.positions[k].y - 2.0, 1e-9);
    }

    const double omega = 2 * std::numbers::pi / 30.0;
    const auto back = advect(e, RigidRotation({0, 0}, omega), 30.0);
    for (std::size_t k = 0; k < e.size(); ++k) EXPECT_LT(distance(back.positions[k], e.positions[k]), 1e-5);
    EXPECT_DOUBLE_EQ(back.weight(), e.weight());
}

TEST(Advect, RejectsEndBeforeEpoch) {
    TracerEnsemble e{{{0, 0}}, 5.0};
    EXPECT_THROW(advect(e, ZeroFlow{}, 4.0), ConfigError);
}

TEST(Density, SingleTracerIsSymmetricUnitBump) {
    const GridSpec g(Domain(0, 40, 0, 40), 40, 40);
    const auto d = density(TracerEnsemble{{{20, 20}}, 0.0}, g, 3.0);
    EXPECT_FALSE(d.degenerate);
    EXPECT_NEAR(d.field.integral(), 1.0, 1e-12);
    for (int j = 0; j < 40; ++j)
        for (int i = 0; i < 40; ++i) {
            EXPECT_NEAR(d.field.at(i, j), d.field.at(39 - i, j), 1e-15);
            EXPECT_NEAR(d.field.at(i, j), d.field.at(j, i), 1e-15);
        }
    EXPECT_GT(d.field.at(19, 19), d.field.at(15, 19));
}

TEST(Density, TwoFarTracersSplitMassEvenly) {
    const GridSpec g(Domain(0, 100, 0, 40), 50, 20);
    const auto d = density(TracerEnsemble{{{20, 20}, {80, 20}}, 0.0}, g, 3.0);
    double left = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx() / 2; ++i) left += d.field.at(i, j) * g.cell_area();
    EXPECT_NEAR(left, 0.5, 1e-6);
    EXPECT_NEAR(d.field.integral(), 1.0, 1e-9);
}

TEST(Density, UniformTracersGiveUniformDensity) {
    const Domain dom(0, 100, 0, 100);
    const auto e = seed_halton(SplashRegion({{0, 0}, {100, 0}, {100, 100}, {0, 100}}, 0.0), 100000);
    const GridSpec g(dom, 64, 64);
    const auto d = density(e, g, 3.0);
    const double expected = 1.0 / dom.area();
    double worst = 0.0;
    for (double v : d.field.values()) worst = std::max(worst, std::abs(v - expected) / expected);
    EXPECT_LT(worst, 0.10);
}

TEST(Density, EmptyEnsembleIsDegenerate) {
    const GridSpec g(Domain(0, 1, 0, 1), 4, 4);
    const auto d = density(TracerEnsemble{}, g, 1.0);
    EXPECT_TRUE(d.degenerate);
    EXPECT_EQ(d.field.max_value(), 0.0);
    EXPECT_THROW(density(TracerEnsemble{}, g, 0.0), ConfigError);
}

TEST(Density, MassConservedAfterAdvection) {
    const Domain dom(0, 600, 0, 300);
    const DoubleGyre flow(dom, 6.0, 0.25, 2 * std::numbers::pi / 120.0);
    const DomainRestricted restricted(flow, dom);
    auto e = seed_halton(SplashRegion({{250, 120}, {350, 120}, {350, 180}, {250, 180}}, 0.0), 3000);
    const GridSpec g(dom, 64, 64);
    const double before = density(e, g, 3.0).field.integral();
    e = advect(e, restricted, 72.0);
    EXPECT_EQ(e.size(), 3000u);
    EXPECT_NEAR(density(e, g, 3.0).field.integral(), before, 1e-9);
    EXPECT_NEAR(before, 1.0, 1e-9);
}

TEST(EnsembleCsv, RoundTripAndErrors) {
    TracerEnsemble e{{{1.25, -3.5}, {1.0 / 3.0, 7.0}}, 12.5};
    std::istringstream in(ensemble_to_csv(e));
    const auto r = ensemble_from_csv(in);
    EXPECT_EQ(r.positions, e.positions);
    EXPECT_DOUBLE_EQ(r.epoch, 12.5);

    std::istringstream bad("# epoch_hours=1\nid,x_km,y_km,weight\n0,1,2,0.5\n1,abc,2,0.5\n");
    try {
        ensemble_from_csv(bad, "f.csv");
        FAIL();
    } catch (const ConfigError& err) {
        EXPECT_NE(std::string(err.what()).find("f.csv:4"), std::string::npos);
    }
    std::istringstream no_epoch("id,x_km,y_km,weight\n");
    EXPECT_THROW(ensemble_from_csv(no_epoch), ConfigError);
}
