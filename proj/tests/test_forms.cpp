#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "mixsob/error.hpp"
#include "mixsob/forms.hpp"

using namespace mixsob;

namespace {

double pair(std::span<const double> a, std::span<const double> b, double vol) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * vol;
}

GridFunction bump(const MaskPtr& mask, double r0 = 1.0) {
    return sample(mask, [r0](std::span<const double> x) {
        const double r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (r0 * r0);
        return r2 < 1 ? (1 - r2) * (1 - r2) : 0.0;
    });
}

GridFunction random_function(const MaskPtr& mask, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> v(mask->interior_count());
    for (auto& x : v) x = nd(rng);
    return GridFunction(mask, v);
}

}  // namespace

TEST(Forms, RejectsBadOrder) {
    auto mask = mask_ball(build_grid(3, 1.5, 9), {0, 0, 0}, 1.0);
    EXPECT_THROW(MixedForms(mask, 0.0), InvalidArgument);
    EXPECT_THROW(MixedForms(mask, 1.0), InvalidArgument);
}

TEST(Forms, ConfinementAtBallCenter) {
    // Tail radius equal to the ball radius: at the center the whole exterior is analytic.
    auto g = build_grid(3, 1.5, 25);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    FormOptions opt;
    opt.tail_radius = 1.0;
    MixedForms f(mask, 0.5, opt);
    const auto center = mask->slot(g.linear_index(std::vector<int>{12, 12, 12}));
    ASSERT_GE(center, 0);
    EXPECT_NEAR(f.confinement()[center], 4 * std::numbers::pi, 0.01 * 4 * std::numbers::pi);
}

TEST(Forms, ConfinementIndependentOfTailRadius) {
    auto g = build_grid(3, 1.5, 13);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    MixedForms a(mask, 0.5);
    FormOptions opt;
    opt.tail_radius = 6.0;
    MixedForms b(mask, 0.5, opt);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.confinement()[i], b.confinement()[i], 2e-3 * b.confinement()[i]);
}

TEST(Forms, WeightsSymmetricAndMatchKernel) {
    auto g = build_grid(3, 1.5, 9);
    auto mask = mask_ball(g, {0, 0, 0}, 1.1);
    MixedForms f(mask, 0.3);
    double asym = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < f.size(); ++j) {
            asym = std::max(asym, std::abs(f.weight(i, j) - f.weight(j, i)));
            if (i == j) continue;
            auto pi = mask->node_point(i), pj = mask->node_point(j);
            const double r = std::hypot(pi[0] - pj[0], pi[1] - pj[1], pi[2] - pj[2]);
            EXPECT_NEAR(f.weight(i, j), std::pow(g.h, 6) * std::pow(r, -3.6), 1e-12 * f.weight(i, j));
        }
    EXPECT_EQ(asym, 0.0);
}

TEST(Forms, ConstantFunction) {
    auto g = build_grid(3, 1.5, 13);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    MixedForms f(mask, 0.5);
    auto one = sample(mask, [](std::span<const double>) { return 1.0; });
    EXPECT_NEAR(f.interaction_energy(one.values()), 0.0, 1e-14);
    double k = 0;
    for (double v : f.confinement()) k += v;
    EXPECT_NEAR(gagliardo_energy(f, one), 2 * k * g.cell_volume(), 1e-10);
}

TEST(Forms, ZeroAndHomogeneity) {
    auto g = build_grid(3, 1.5, 13);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    MixedForms f(mask, 0.5);
    GridFunction zero(mask);
    EXPECT_EQ(dirichlet_energy(f, zero), 0.0);
    EXPECT_EQ(gagliardo_energy(f, zero), 0.0);
    EXPECT_EQ(rho_squared(f, zero), 0.0);
    auto u = bump(mask);
    EXPECT_NEAR(dirichlet_energy(f, u.scaled(3)), 9 * dirichlet_energy(f, u), 1e-12 * dirichlet_energy(f, u));
    EXPECT_NEAR(rho_squared(f, u) - dirichlet_energy(f, u), gagliardo_energy(f, u), 1e-12 * rho_squared(f, u));
}

TEST(Forms, MaskMismatch) {
    auto g = build_grid(3, 1.5, 13);
    MixedForms f(mask_ball(g, {0, 0, 0}, 1.0), 0.5);
    auto other = mask_ball(g, {0, 0, 0}, 0.9);
    EXPECT_THROW(dirichlet_energy(f, bump(other)), InvalidArgument);
}

TEST(Forms, OperatorPairingLinearitySymmetry) {
    auto g = build_grid(3, 1.5, 13);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    std::mt19937_64 rng(11);
    for (bool corr : {false, true}) {
        FormOptions opt;
        opt.lattice_correction = corr;
        MixedForms f(mask, 0.4, opt);
        const double vol = g.cell_volume();
        for (int trial = 0; trial < 5; ++trial) {
            auto u = random_function(mask, rng);
            auto v = random_function(mask, rng);
            for (auto part : {FormPart::local, FormPart::fractional, FormPart::mixed}) {
                auto Au = apply_operator(f, u, part);
                auto Av = apply_operator(f, v, part);
                auto Auv = apply_operator(f, u + v, part);
                for (std::size_t i = 0; i < u.size(); ++i)
                    EXPECT_NEAR(Auv[i], Au[i] + Av[i], 1e-12 * (1 + std::abs(Auv[i])));
                const double e = f.energy(part, u.values());
                EXPECT_NEAR(pair(Au.values(), u.values(), vol), e, 1e-10 * e);
                const double uv = pair(Au.values(), v.values(), vol), vu = pair(Av.values(), u.values(), vol);
                EXPECT_NEAR(uv, vu, 1e-10 * e);
            }
        }
    }
}

TEST(Forms, PositiveDefinite) {
    auto g = build_grid(3, 1.5, 9);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    MixedForms f(mask, 0.5);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto u = random_function(mask, rng);
        EXPECT_GT(dirichlet_energy(f, u), 0.0);
        EXPECT_GT(gagliardo_energy(f, u), 0.0);
    }
}

TEST(Forms, PreconditionerDiagonalMatchesOperator) {
    auto g = build_grid(3, 1.5, 11);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    MixedForms f(mask, 0.5);
    auto P = f.preconditioner_matrix(FormPart::mixed);
    std::vector<double> e(f.size(), 0.0), out(f.size());
    for (std::size_t i = 0; i < f.size(); i += 7) {
        e[i] = 1.0;
        f.apply(FormPart::mixed, e, out);
        EXPECT_NEAR(P.coeff(static_cast<int>(i), static_cast<int>(i)), out[i], 1e-10 * out[i]);
        e[i] = 0.0;
    }
}

TEST(Forms, ExactScalingLaw) {
    // Same node values on a grid shrunk by k: Gagliardo energy times k^(2s-2)
    // after the u_k normalization, Dirichlet energy unchanged.
    const int m = 13;
    for (double s : {0.25, 0.5, 0.75}) {
        auto g1 = build_grid(3, 1.5, m);
        auto m1 = mask_ball(g1, {0, 0, 0}, 1.0);
        FormOptions o1;
        o1.tail_radius = 4.0;
        MixedForms f1(m1, s, o1);
        auto u1 = bump(m1);
        for (double k : {2.0, 4.0}) {
            auto gk = build_grid(3, 1.5 / k, m);
            auto mk = mask_ball(gk, {0, 0, 0}, 1.0 / k);
            FormOptions ok;
            ok.tail_radius = 4.0 / k;
            MixedForms fk(mk, s, ok);
            const double c = std::pow(k, 0.5);
            std::vector<double> vals(u1.values().begin(), u1.values().end());
            for (auto& v : vals) v *= c;
            GridFunction uk(mk, vals);
            EXPECT_NEAR(gagliardo_energy(fk, uk) / gagliardo_energy(f1, u1), std::pow(k, 2 * s - 2), 1e-10);
            EXPECT_NEAR(dirichlet_energy(fk, uk) / dirichlet_energy(f1, u1), 1.0, 1e-10);
        }
    }
}

TEST(Forms, EmbeddingProbeBounded) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-0.4, 0.4), W(0.3, 0.6);
    struct B { double cx, cy, cz, w; };
    std::vector<B> battery(50);
    for (auto& b : battery) b = {U(rng), U(rng), U(rng), W(rng)};
    for (int m : {17, 25}) {
        auto g = build_grid(3, 1.5, m);
        auto mask = mask_ball(g, {0, 0, 0}, 1.0);
        MixedForms f(mask, 0.5);
        double worst = 0;
        for (const auto& b : battery) {
            auto u = sample(mask, [&](std::span<const double> x) {
                const double r2 = (std::pow(x[0] - b.cx, 2) + std::pow(x[1] - b.cy, 2) + std::pow(x[2] - b.cz, 2)) / (b.w * b.w);
                return r2 < 1 ? (1 - r2) * (1 - r2) : 0.0;
            });
            const double ratio = embedding_constant_probe(f, u);
            EXPECT_TRUE(std::isfinite(ratio));
            EXPECT_NEAR(embedding_constant_probe(f, u.scaled(-2.5)), ratio, 1e-12 * ratio);
            worst = std::max(worst, ratio);
        }
        EXPECT_LT(worst, 50.0);
    }
    auto g = build_grid(3, 1.5, 13);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    EXPECT_THROW(embedding_constant_probe(MixedForms(mask, 0.5), GridFunction(mask)), InvalidArgument);
}

TEST(Forms, LatticeZetaKnownValues) {
    // Continuation of sum |z|^-a over Z^3 at a = 1 + 2s.
    EXPECT_NEAR(lattice_zeta(3, 1.5), -4.8227199, 1e-6);
    EXPECT_NEAR(lattice_zeta(3, 2.0), -8.9136329, 1e-6);
    EXPECT_NEAR(lattice_zeta(3, 2.5), -21.3915341, 1e-6);
}

TEST(Forms, WeightCacheBitIdentical) {
    auto g = build_grid(3, 1.5, 9);
    auto mask = mask_ball(g, {0, 0, 0}, 1.0);
    MixedForms f(mask, 0.5);
    auto path = std::filesystem::temp_directory_path() / "mixsob_weights_test.bin";
    write_weight_cache(f, path);
    auto cached = read_weight_cache(path, f.cache_key());
    auto fresh = weight_triangle(MixedForms(mask, 0.5));
    ASSERT_EQ(cached.size(), fresh.size());
    for (std::size_t i = 0; i < cached.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(cached[i]), std::bit_cast<std::uint64_t>(fresh[i]));
    EXPECT_THROW(read_weight_cache(path, MixedForms(mask, 0.6).cache_key()), InvalidArgument);
    std::filesystem::remove(path);
}
