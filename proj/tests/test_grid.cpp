#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mixsob/error.hpp"
#include "mixsob/grid.hpp"

using namespace mixsob;

TEST(Grid, SpacingAndCounts) {
    auto g = build_grid(3, 1.0, 3);
    EXPECT_DOUBLE_EQ(g.h, 1.0);
    EXPECT_EQ(g.node_count(), 27u);
    EXPECT_DOUBLE_EQ(build_grid(3, 2.0, 17).h, 0.25);
    auto g4 = build_grid(4, 1.0, 9);
    EXPECT_DOUBLE_EQ(g4.h, 0.25);
    EXPECT_EQ(g4.node_count(), 6561u);
    EXPECT_DOUBLE_EQ(g4.coord(4), 0.0);
}

TEST(Grid, RejectsBadInput) {
    EXPECT_THROW(build_grid(3, 1.0, 4), InvalidArgument);
    EXPECT_THROW(build_grid(2, 1.0, 5), InvalidArgument);
    EXPECT_THROW(build_grid(3, 0.0, 5), InvalidArgument);
    EXPECT_THROW(build_grid(3, -1.0, 5), InvalidArgument);
}

TEST(Grid, IndexRoundTrip) {
    auto g = build_grid(3, 1.0, 7);
    for (std::size_t i = 0; i < g.node_count(); i += 13) EXPECT_EQ(g.linear_index(g.multi_index(i)), i);
}

TEST(Mask, BallVolume) {
    auto g = build_grid(3, 1.5, 25);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    EXPECT_NEAR(mask->measure(), 4.0 * std::numbers::pi / 3.0, 0.05 * 4.18879);
    for (std::size_t k = 0; k < mask->interior_count(); ++k) {
        auto p = mask->node_point(k);
        EXPECT_LT(std::hypot(p[0], p[1], p[2]), 1.0);
    }
}

TEST(Mask, BallErrors) {
    auto g = build_grid(3, 1.5, 25);
    EXPECT_THROW(mask_ball(g, {0, 0, 0}, 0.01), InvalidArgument);
    EXPECT_THROW(mask_ball(g, {0, 0, 0}, 1.45), InvalidArgument);
    EXPECT_THROW(mask_ball(g, {0.5, 0, 0}, 1.0), InvalidArgument);
}

TEST(Mask, BallTranslation) {
    auto g = build_grid(3, 1.5, 25);
    auto a = mask_ball(g, {0, 0, 0}, 0.8);
    auto b = mask_ball(g, {g.h, 0, 0}, 0.8);
    ASSERT_EQ(a->interior_count(), b->interior_count());
    for (std::size_t k = 0; k < a->interior_count(); ++k) {
        auto ia = a->node_multi_index(k);
        auto ib = b->node_multi_index(k);
        EXPECT_EQ(ia[0] + 1, ib[0]);
        EXPECT_EQ(ia[1], ib[1]);
        EXPECT_EQ(ia[2], ib[2]);
        for (int d = 0; d < 6; ++d) EXPECT_NEAR(a->edge_fraction(k, d), b->edge_fraction(k, d), 1e-12);
    }
}

TEST(Mask, BoxVolumeAndErrors) {
    auto g = build_grid(3, 1.5, 41);
    auto box = mask_box(g, {1, 1, 1});
    EXPECT_NEAR(box->measure(), 8.0, 0.4);
    EXPECT_THROW(mask_box(g, {1.5, 1, 1}), InvalidArgument);
}

TEST(Mask, BoxStarShaped) {
    auto g = build_grid(3, 1.5, 21);
    auto box = mask_box(g, {1, 0.8, 0.6});
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, box->interior_count() - 1);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = box->node_point(pick(rng));
        for (int step = 0; step <= 10; ++step) {
            const double t = step / 10.0;
            EXPECT_TRUE(std::abs(t * p[0]) < 1 && std::abs(t * p[1]) < 0.8 && std::abs(t * p[2]) < 0.6);
        }
    }
}

TEST(Mask, PredicateMatchesBall) {
    auto g = build_grid(3, 1.5, 17);
    auto ball = mask_ball(g, {0, 0, 0}, 1.0);
    auto pred = mask_predicate(
        g, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < 1.0; }, "ball");
    ASSERT_EQ(ball->interior_count(), pred->interior_count());
    for (std::size_t k = 0; k < ball->interior_count(); ++k)
        for (int d = 0; d < 6; ++d) EXPECT_NEAR(ball->edge_fraction(k, d), pred->edge_fraction(k, d), 1e-12);
}

TEST(GridFunctionTest, SampleConstantAndExterior) {
    auto g = build_grid(3, 1.5, 17);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    auto u = sample(mask, [](std::span<const double>) { return 1.0; });
    for (double v : u.values()) EXPECT_EQ(v, 1.0);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, g.node_count() - 1);
    int checked = 0;
    while (checked < 100) {
        auto lin = pick(rng);
        if (mask->is_interior(lin)) continue;
        EXPECT_EQ(u.at_node(lin), 0.0);
        ++checked;
    }
}

TEST(GridFunctionTest, OddSampleSumsToZero) {
    auto g = build_grid(3, 1.5, 17);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    auto u = sample(mask, [](std::span<const double> x) { return x[0]; });
    double sum = 0;
    for (double v : u.values()) sum += v;
    EXPECT_NEAR(sum, 0.0, 1e-12);
}

TEST(GridFunctionTest, SampleRejectsNonFinite) {
    auto g = build_grid(3, 1.5, 9);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    EXPECT_THROW(sample(mask, [](std::span<const double>) { return std::nan(""); }), InvalidArgument);
}

TEST(Norms, ConstantAndHomogeneity) {
    auto g = build_grid(3, 1.5, 17);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    auto one = sample(mask, [](std::span<const double>) { return 1.0; });
    EXPECT_NEAR(lq_norm(one, 2.0), std::sqrt(mask->measure()), 1e-12);
    auto u = sample(mask, [](std::span<const double> x) { return std::cos(x[0]) - x[1] * x[2]; });
    for (double c : {-3.0, 0.5, 2.0})
        for (double q : {1.0, 2.0, 6.0}) EXPECT_NEAR(lq_norm(u.scaled(c), q), std::abs(c) * lq_norm(u, q), 1e-12);
    EXPECT_THROW(lq_norm(u, 0.5), InvalidArgument);
}

TEST(Norms, MonotoneInAbsoluteValue) {
    auto g = build_grid(3, 1.5, 13);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    auto u = sample(mask, [](std::span<const double> x) { return x[0] - 0.3; });
    std::vector<double> bigger(u.values().begin(), u.values().end());
    for (auto& v : bigger) v = std::abs(v) + 0.1;
    GridFunction w(mask, bigger);
    for (double q : {1.0, 2.0, 3.5, 6.0}) EXPECT_LE(lq_norm(u, q), lq_norm(w, q));
}

TEST(Exponent, TwoStar) {
    EXPECT_EQ(two_star(3), (Rational{6, 1}));
    EXPECT_EQ(two_star(4), (Rational{4, 1}));
    EXPECT_EQ(two_star(6), (Rational{3, 1}));
    EXPECT_EQ(two_star(5), (Rational{10, 3}));
    EXPECT_THROW(two_star(2), InvalidArgument);
}

TEST(Json, BitExactRoundTrip) {
    auto g = build_grid(3, 1.5, 13);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    auto u = sample(mask, [](std::span<const double> x) { return std::exp(-x[0]) / 3.0 + x[1] * 1e-17; });
    auto j = to_json(u);
    auto back = grid_function_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_TRUE(same_mask(u.mask(), back.mask()));
    ASSERT_EQ(u.size(), back.size());
    for (std::size_t k = 0; k < u.size(); ++k) EXPECT_EQ(u[k], back[k]);

    auto box = mask_box(g, {1, 0.7, 0.9});
    EXPECT_TRUE(same_mask(box, mask_from_json(nlohmann::json::parse(to_json(*box).dump()))));
}
