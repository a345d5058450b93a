#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mixsob/operator_solver.hpp"
#include "mixsob/spectral.hpp"

using namespace mixsob;

namespace {

MaskPtr unit_ball(int m, double radius = 1.0) { return mask_ball(build_grid(3, 1.5, m), {0, 0, 0}, radius); }

}  // namespace

TEST(Spectral, LocalMatchesPiSquared) {
    MixedForms f(unit_ball(25), 0.5);
    auto r = first_eigen_local(f);
    EXPECT_NEAR(r.lambda, std::numbers::pi * std::numbers::pi, 0.02 * 9.8696);
    EXPECT_LE(r.residual, 1e-8);
    EXPECT_NEAR(lq_norm(r.eigenfunction, 2.0), 1.0, 1e-12);
}

TEST(Spectral, StartVectorScalingIrrelevant) {
    MixedForms f(unit_ball(13), 0.5);
    auto base = first_eigen_fractional(f);
    auto one = sample(f.mask(), [](std::span<const double>) { return 1.0; });
    auto scaled = first_eigen(f, FormPart::fractional, {}, one.scaled(1e3));
    EXPECT_NEAR(base.lambda, scaled.lambda, 1e-9 * base.lambda);
}

TEST(Spectral, FractionalSelfConvergence) {
    std::vector<double> lam;
    for (int m : {17, 25, 33}) lam.push_back(first_eigen_fractional(MixedForms(unit_ball(m), 0.5)).lambda);
    EXPECT_LT(std::abs(lam[2] - lam[1]), std::abs(lam[1] - lam[0]));
}

TEST(Spectral, EigenfunctionsNonnegative) {
    MixedForms f(unit_ball(17), 0.5);
    for (auto part : {FormPart::local, FormPart::fractional, FormPart::mixed}) {
        auto r = first_eigen(f, part);
        const auto v = r.eigenfunction.values();
        EXPECT_GE(*std::min_element(v.begin(), v.end()), -1e-8);
    }
}

TEST(Spectral, DomainMonotonicity) {
    auto g = build_grid(3, 1.5, 21);
    const double small = first_eigen_local(MixedForms(mask_ball(g, {0, 0, 0}, 1.0), 0.5)).lambda;
    const double large = first_eigen_local(MixedForms(mask_ball(g, {0, 0, 0}, 1.2), 0.5)).lambda;
    EXPECT_GT(small, large);
    const double fs = first_eigen_fractional(MixedForms(mask_ball(g, {0, 0, 0}, 1.0), 0.5)).lambda;
    const double fl = first_eigen_fractional(MixedForms(mask_ball(g, {0, 0, 0}, 1.2), 0.5)).lambda;
    EXPECT_GT(fs, fl);
}

TEST(Spectral, MixedOrderingAndBounds) {
    MixedForms f(unit_ball(17), 0.5);
    auto loc = first_eigen_local(f);
    auto frac = first_eigen_fractional(f);
    auto mix = first_eigen_mixed(f);
    EXPECT_LT(frac.lambda, mix.lambda);
    EXPECT_GE(mix.lambda, loc.lambda + frac.lambda - 1e-6);
    EXPECT_LE(mix.lambda, rho_squared(f, loc.eigenfunction) + 1e-10);

    OperatorSolver op(f, FormPart::mixed);
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = mix.lambda * mix.eigenfunction[i];
    EXPECT_LE(weak_residual(op, mix.eigenfunction.values(), g, 99), 1e-7);
}

TEST(Spectral, SingleNodeMaskIsDegenerate) {
    auto g = build_grid(3, 1.0, 5);
    auto mask = mask_predicate(
        g, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < 0.01; }, "dot");
    ASSERT_EQ(mask->interior_count(), 1u);
    MixedForms f(mask, 0.5);
    auto r = first_eigen_mixed(f);
    EXPECT_TRUE(r.degenerate);
    std::vector<double> one{1.0}, out(1);
    f.apply(FormPart::mixed, one, out);
    EXPECT_NEAR(r.lambda, out[0], 1e-12 * out[0]);
}

TEST(OperatorSolverTest, SolvesToTolerance) {
    MixedForms f(unit_ball(13), 0.3);
    OperatorSolver op(f, FormPart::mixed);
    std::vector<double> b(f.size()), x(f.size(), 0.0), Ax(f.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(0.1 * i);
    op.solve(b, x, 1e-12);
    op.apply(x, Ax);
    double rr = 0, bb = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        rr += (Ax[i] - b[i]) * (Ax[i] - b[i]);
        bb += b[i] * b[i];
    }
    EXPECT_LE(std::sqrt(rr / bb), 1e-12);
}
