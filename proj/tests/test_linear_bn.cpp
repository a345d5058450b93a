#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mixsob/error.hpp"
#include "mixsob/linear_bn.hpp"
#include "mixsob/sobolev.hpp"

using namespace mixsob;

namespace {

const MixedForms& ball17() {
    static const MixedForms f(mask_ball(build_grid(3, 1.5, 17), {0, 0, 0}, 1.0), 0.5);
    return f;
}

const EigenResult& mixed17() {
    static const EigenResult e = first_eigen_mixed(ball17());
    return e;
}

const QuotientCurve& curve17() {
    static const QuotientCurve c = [] {
        CurveOptions o;
        o.keep_minimizers = true;
        return trace_curve(ball17(), lambda_grid(mixed17().lambda, 12), o);
    }();
    return c;
}

}  // namespace

TEST(QLambda, ReducesToRhoAtZero) {
    const auto& f = ball17();
    auto u = sample(f.mask(), [](std::span<const double> x) { return 1 - x[0] * x[0] - x[1] * x[1] - x[2] * x[2]; });
    EXPECT_DOUBLE_EQ(q_lambda(f, u, 0.0), f.rho_squared(u.values()));
}

TEST(QLambda, VanishesOnEigenfunctionAtEigenvalue) {
    const auto& e = mixed17();
    EXPECT_NEAR(lq_norm(e.eigenfunction, 2.0), 1.0, 1e-12);
    EXPECT_NEAR(q_lambda(ball17(), e.eigenfunction, e.lambda), 0.0, 1e-7);
}

TEST(QLambda, HoelderLowerBound) {
    const auto& f = ball17();
    const double vol = f.mask()->measure();
    // The discrete sharp constant stands in for S_n: the grid quotient
    // never drops below it.
    const double floor = estimate_sharp_constant(f).value;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> v(f.size());
        for (auto& x : v) x = U(rng);
        GridFunction u(f.mask(), v);
        u = u.scaled(1.0 / lq_norm(u, 6.0));
        EXPECT_GE(q_lambda(f, u, 1.0), floor - std::pow(vol, 2.0 / 3.0) * (1 + 1e-12));
        EXPECT_GE(q_lambda(f, u, 1.0), talenti_constant(3) - std::pow(vol, 4.0 / 3.0));
    }
}

TEST(Minimize, SignStructure) {
    const auto& e = mixed17();
    auto below = minimize_s_lambda(ball17(), 0.5 * e.lambda);
    auto at = minimize_s_lambda(ball17(), e.lambda);
    auto above = minimize_s_lambda(ball17(), 1.1 * e.lambda);
    EXPECT_GT(below.value, 0.0);
    EXPECT_LE(std::abs(at.value), 0.02 * talenti_constant(3));
    EXPECT_LT(above.value, 0.0);
    for (double v : below.minimizer.values()) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(lq_norm(below.minimizer, 6.0), 1.0, 1e-12);
    EXPECT_THROW(minimize_s_lambda(ball17(), 0.0), InvalidArgument);
}

TEST(Curve, MonotoneContinuousAndCrossesAtEigenvalue) {
    const auto& c = curve17();
    EXPECT_LE(c.max_increase, 1e-6);
    EXPECT_LE(c.max_jump, c.lipschitz_bound);
    ASSERT_TRUE(c.zero_crossing.has_value());
    EXPECT_NEAR(*c.zero_crossing / c.lambda_1, 1.0, 0.02);
    EXPECT_LT(c.lambda_1s, c.lambda_1);
    EXPECT_EQ(c.samples.back().regime, Regime::supercritical);
    EXPECT_LT(c.samples.back().value, 0.0);
    // The value at the smallest lambda is the discrete sharp constant up to
    // the lambda ||w||_2^2 shift.
    EXPECT_LE(c.samples.front().value, estimate_sharp_constant(ball17()).value + 1e-6);
}

TEST(Curve, ContinuityImprovesWithRefinement) {
    const double l1 = mixed17().lambda;
    CurveOptions o;
    auto coarse = trace_curve(ball17(), lambda_grid(l1, 6, 0.9), o);
    auto fine = trace_curve(ball17(), lambda_grid(l1, 12, 0.9), o);
    EXPECT_LT(fine.max_jump, coarse.max_jump);
}

TEST(Curve, RejectsShortOrUnsortedGrids) {
    EXPECT_THROW(trace_curve(ball17(), {1, 2, 3, 4}), InvalidArgument);
    EXPECT_THROW(trace_curve(ball17(), {1, 2, 4, 3, 5}), InvalidArgument);
    EXPECT_THROW(lambda_grid(10.0, 3), InvalidArgument);
}

TEST(Extraction, SolvesTheEquationBelowTheEigenvalue) {
    const auto& c = curve17();
    int checked = 0;
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        const auto& smp = c.samples[i];
        if (smp.lambda >= c.lambda_1) {
            EXPECT_THROW(extract_solution(smp.value, c.minimizers[i], ball17(), smp.lambda), InvalidArgument);
            continue;
        }
        auto sol = extract_solution(smp.value, c.minimizers[i], ball17(), smp.lambda);
        EXPECT_LT(sol.residual, 1e-5) << smp.lambda;
        EXPECT_LT(sol.identity_error, 1e-6);
        EXPECT_GE(sol.min_value, -1e-8);
        EXPECT_GT(sol.max_value, 0.0);
        EXPECT_TRUE(std::isfinite(sol.max_value));
        // Every extracted solution lies outside the small ball.
        EXPECT_FALSE(small_ball_check(sol.u));
        ++checked;
    }
    EXPECT_GE(checked, 5);
}

TEST(SmallBall, Threshold) {
    EXPECT_NEAR(std::pow(talenti_constant(3), 0.25), 1.5298, 1e-4);
    GridFunction zero(ball17().mask());
    EXPECT_TRUE(small_ball_check(zero));
    auto one = sample(ball17().mask(), [](std::span<const double>) { return 1.0; });
    EXPECT_EQ(small_ball_check(one.scaled(1.5 / lq_norm(one, 6.0))), true);
    EXPECT_EQ(small_ball_check(one.scaled(1.6 / lq_norm(one, 6.0))), false);
}
