#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mixsob/error.hpp"
#include "mixsob/sobolev.hpp"

using namespace mixsob;

namespace {

// [u]_s^2 of (1 - r^2)^2 on the unit ball of R^3, from an independent
// arbitrary-precision evaluation (interior double integral plus the
// exterior potential of the ball).
constexpr double kBumpGagliardo[3] = {33.3711581818, 28.0735414075, 44.4618789823};

// [U]_s^2 of the normalized Aubin-Talenti profile in R^4, from the Fourier
// side: the transform of (1 + r^2)^-1 is (2 pi)^2 K_1(k) / k.
constexpr double kTalenti4Gagliardo[3] = {1668.34578510855681, 374.796039485644154, 228.703470751588938};

RadialProfile bump_profile(double width = 1.0) {
    return custom_profile(
        3,
        [width](double r) {
            const double z = r / width;
            return z < 1 ? (1 - z * z) * (1 - z * z) : 0.0;
        },
        [width](double r) {
            const double z = r / width;
            return z < 1 ? -4 * z * (1 - z * z) / width : 0.0;
        },
        width, width, "bump");
}

}  // namespace

TEST(Talenti, ClosedForms) {
    EXPECT_NEAR(talenti_constant(3), 5.4778, 1e-3);
    EXPECT_NEAR(reciprocal_talenti_formula(3), 1.0 / 5.477904089531, 1e-12);
    for (int n = 3; n <= 10; ++n) {
        EXPECT_GT(reciprocal_talenti_formula(n), 0.0);
        EXPECT_NEAR(talenti_constant(n) * reciprocal_talenti_formula(n), 1.0, 1e-10);
    }
    EXPECT_THROW(talenti_constant(2), InvalidArgument);
}

TEST(Talenti, QuadratureAgrees) {
    EXPECT_NEAR(aubin_talenti_quotient(3) / talenti_constant(3), 1.0, 1e-3);
    EXPECT_NEAR(aubin_talenti_quotient(4) / talenti_constant(4), 1.0, 1e-3);
    EXPECT_NEAR(aubin_talenti_quotient(5) / talenti_constant(5), 1.0, 1e-3);
}

TEST(AubinTalentiTest, ScaleInvariantNorm) {
    for (double t : {0.5, 1.0, 2.0}) {
        auto at = aubin_talenti(3, t);
        EXPECT_NEAR(radial_lq_norm(at.profile, 6.0), 1.0, 1e-8);
        EXPECT_NEAR(radial_gradient_sq(at.profile) / talenti_constant(3), 1.0, 1e-4);
    }
}

TEST(AubinTalentiTest, DecayBound) {
    auto at = aubin_talenti(3, 1.0);
    double C = 0.0;
    std::vector<double> radii;
    for (double r = 1e-3; r < 1e4; r *= 1.7) radii.push_back(r);
    for (double r : radii) C = std::max(C, std::abs(at.profile(r)) / std::min(1.0, std::pow(r, -1.0)));
    for (double r : radii) EXPECT_LE(std::abs(at.profile(r)), C * std::min(1.0, std::pow(r, -1.0)) * (1 + 1e-12));
    EXPECT_LT(C, 2.0 * at.normalization);
}

TEST(Profiles, DerivativesMatchFiniteDifferences) {
    std::vector<RadialProfile> ps{aubin_talenti_profile(3, 0.7), u_eps_profile(4, 0.1), eta_profile(3, 0.05, 0.5),
                                  aubin_talenti_profile(5, 2.0)};
    for (const auto& p : ps) {
        for (double r : {0.01, 0.2, 0.3, 0.4, 0.7, 1.3}) {
            const double h = 1e-6 * std::max(r, 1e-3);
            const double fd = (p(r + h) - p(r - h)) / (2 * h);
            EXPECT_NEAR(p.derivative(r), fd, 1e-5 * std::max(std::abs(fd), 1e-3 * std::abs(p(r)))) << p.kind << " r=" << r;
        }
    }
}

TEST(Profiles, CutoffShape) {
    EXPECT_EQ(smooth_cutoff(0.0), 1.0);
    EXPECT_EQ(smooth_cutoff(0.5), 1.0);
    EXPECT_EQ(smooth_cutoff(1.0), 0.0);
    double prev = 1.0;
    for (double t = 0.5; t <= 1.0; t += 0.01) {
        EXPECT_LE(smooth_cutoff(t), prev);
        prev = smooth_cutoff(t);
    }
}

TEST(Kernel, ClosedFormMatchesAngularQuadrature) {
    for (double s : {0.25, 0.5, 0.75})
        for (double r : {0.1, 1.0, 3.0})
            for (double rho : {0.05, 0.9, 2.5, 1e-6})
                EXPECT_NEAR(angular_kernel(3, s, r, rho) / angular_kernel_numeric(3, s, r, rho), 1.0, 1e-10);
}

TEST(Kernel, FarFieldLimit) {
    // Far apart shells see each other as points: K -> sigma^2 r^(-n-2s).
    for (int n : {4, 5}) {
        const double r = 1e4, s = 0.4;
        EXPECT_NEAR(angular_kernel(n, s, r, 1.0) / (sphere_area(n) * sphere_area(n) * std::pow(r, -n - 2 * s)), 1.0, 1e-6);
    }
}

TEST(RadialGagliardo, CompactBumpMatchesOracle) {
    const double s_values[3] = {0.25, 0.5, 0.75};
    for (int i = 0; i < 3; ++i) {
        auto q = radial_gagliardo(bump_profile(), s_values[i]);
        EXPECT_NEAR(q.value / kBumpGagliardo[i], 1.0, 1e-8) << "s=" << s_values[i];
    }
}

TEST(RadialGagliardo, TalentiProfileInFourDimensions) {
    const double s_values[3] = {0.25, 0.5, 0.75};
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(radial_gagliardo(aubin_talenti_profile(4, 1.0), s_values[i]).value / kTalenti4Gagliardo[i], 1.0, 1e-9);
}

TEST(RadialGagliardo, ScalingLaw) {
    for (double s : {0.25, 0.5, 0.75}) {
        // Concentrating a compact bump at fixed 2*-norm.
        const double base = radial_gagliardo(bump_profile(), s).value;
        for (double t : {2.0, 4.0}) {
            auto b = bump_profile(1.0 / t);
            const double c = std::sqrt(t);
            auto scaled = custom_profile(3, [=](double r) { return c * b(r); }, [=](double r) { return c * b.derivative(r); },
                                         1.0 / t, 1.0 / t);
            EXPECT_NEAR(radial_gagliardo(scaled, s).value / base, std::pow(t, 2 * s - 2), 1e-6 * std::pow(t, 2 * s - 2));
        }
    }
    const double at1 = radial_gagliardo(aubin_talenti_profile(3, 1.0), 0.75).value;
    for (double t : {2.0, 4.0})
        EXPECT_NEAR(radial_gagliardo(aubin_talenti_profile(3, t), 0.75).value / at1, std::pow(t, -0.5), 1e-6);
}

TEST(RadialGagliardo, AubinTalentiFinitenessDependsOnOrder) {
    // Far shells of U contribute ~ R^(4-n-2s): infinite in R^3 for s <= 1/2.
    EXPECT_THROW(radial_gagliardo(aubin_talenti_profile(3, 1.0), 0.25), ConvergenceError);
    EXPECT_THROW(radial_gagliardo(aubin_talenti_profile(3, 1.0), 0.5), ConvergenceError);
    EXPECT_TRUE(std::isfinite(radial_gagliardo(aubin_talenti_profile(3, 1.0), 0.75).value));
}

TEST(RadialGagliardo, AgreesWithGridForms) {
    auto g = build_grid(3, 1.5, 25);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    FormOptions opt;
    opt.lattice_correction = true;
    MixedForms f(mask, 0.5, opt);
    auto b = bump_profile();
    auto u = sample(mask, [&](std::span<const double> x) { return b(std::hypot(x[0], x[1], x[2])); });
    EXPECT_NEAR(gagliardo_energy(f, u) / kBumpGagliardo[1], 1.0, 0.03);
}

TEST(SampledProfiles, GridMatchesRadial) {
    auto g = build_grid(3, 1.5, 33);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    auto at = aubin_talenti(3, 2.0);
    auto u = sample(mask, [&](std::span<const double> x) { return at(x); });
    for (std::size_t k = 0; k < u.size(); k += 97) {
        auto p = mask->node_point(k);
        EXPECT_NEAR(u[k], at.profile(std::hypot(p[0], p[1], p[2])), 1e-12);
    }
    auto truncated = custom_profile(3, [&](double r) { return r < 1 ? at.profile(r) : 0.0; },
                                    [&](double r) { return r < 1 ? at.profile.derivative(r) : 0.0; }, 0.5, 1.0);
    EXPECT_NEAR(lq_norm(u, 6.0) / radial_lq_norm(truncated, 6.0), 1.0, 0.02);
}

TEST(Scans, SpreadFitsExponentWhenFinite) {
    auto rep = spread_scan(3, 0.75, {1, 2, 4, 8, 16});
    ASSERT_FALSE(rep.divergent);
    ASSERT_TRUE(rep.fit.has_value());
    EXPECT_NEAR(rep.fit->slope, -0.5, 0.1);
    EXPECT_TRUE(rep.above_talenti);
    EXPECT_TRUE(rep.monotone);
    EXPECT_NEAR(rep.limit_estimate, talenti_constant(3), 1e-3);
}

TEST(Scans, SpreadExponentInFourDimensions) {
    auto rep = spread_scan(4, 0.5, {1, 2, 4, 8});
    ASSERT_TRUE(rep.fit.has_value());
    EXPECT_NEAR(rep.fit->slope, -1.0, 1e-6);
    EXPECT_TRUE(rep.above_talenti);
    EXPECT_NEAR(rep.limit_estimate, talenti_constant(4), 1e-3);
}

TEST(Scans, SpreadReportsDivergence) {
    auto rep = spread_scan(3, 0.5, {1, 2, 4, 8});
    EXPECT_TRUE(rep.divergent);
    EXPECT_FALSE(rep.fit.has_value());
    for (const auto& smp : rep.samples) EXPECT_FALSE(smp.finite);
    EXPECT_THROW(spread_scan(3, 0.75, {1, 2, 4}), InvalidArgument);
}

TEST(Scans, ShrinkGagliardoRatios) {
    for (double s : {0.25, 0.5, 0.75}) {
        auto rep = shrink_scan(3, 1.5, 13, 1.0, 0.0 + s,
                               [](std::span<const double> x) {
                                   const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                                   return r2 < 1 ? (1 - r2) * (1 - r2) : 0.0;
                               },
                               {1, 2, 4, 8});
        for (std::size_t i = 1; i < rep.samples.size(); ++i) {
            const double kr = rep.samples[i].parameter / rep.samples[i - 1].parameter;
            EXPECT_NEAR(rep.samples[i].gagliardo / rep.samples[i - 1].gagliardo, std::pow(kr, 2 * s - 2), 1e-6);
        }
        ASSERT_TRUE(rep.fit.has_value());
        EXPECT_NEAR(rep.fit->slope, 2 * s - 2, 1e-8);
        EXPECT_TRUE(rep.monotone);
    }
    EXPECT_THROW(shrink_scan(3, 1.5, 13, 1.0, 0.5, [](std::span<const double>) { return 1.0; }, {1, 2}), InvalidArgument);
}

TEST(SharpConstant, DecreasesWithResolutionAndConcentrates) {
    std::vector<double> values;
    for (int m : {17, 25}) {
        MixedForms f(mask_ball(build_grid(3, 1.5, m), {0, 0, 0}, 1.0), 0.5);
        auto est = estimate_sharp_constant(f);
        EXPECT_TRUE(est.first_step_decreased);
        EXPECT_GT(est.participation_drop, 0.3);
        EXPECT_GT(est.value, talenti_constant(3));
        values.push_back(est.value);
    }
    EXPECT_LT(values[1], values[0]);
}
