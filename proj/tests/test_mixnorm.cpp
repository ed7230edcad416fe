#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mixctl/mixnorm.hpp"
#include "mixctl/scenario.hpp"

using namespace mixctl;
constexpr double pi = std::numbers::pi;

TEST(Helmholtz, Examples) {
    const Grid g = make_grid(64, 65);
    const ScalarField one = helmholtz_neumann_solve(ScalarField(g, 1.0));
    for (double x : one.values) EXPECT_NEAR(x, 1.0, 1e-12);
    const ScalarField c = ScalarField::sample(g, [](double x, double) { return std::cos(x); });
    const ScalarField pc = helmholtz_neumann_solve(c);
    for (std::size_t k = 0; k < c.values.size(); ++k) EXPECT_NEAR(pc.values[k], c.values[k] / 2, 1e-12);
    const ScalarField cy = ScalarField::sample(g, [](double, double y) { return std::cos(pi * y); });
    const ScalarField py = helmholtz_neumann_solve(cy);
    for (std::size_t k = 0; k < cy.values.size(); ++k)
        EXPECT_NEAR(py.values[k], cy.values[k] / (1 + pi * pi), 2 * g.hy * g.hy);
}

TEST(Helmholtz, ResidualAndSymmetry) {
    const Grid g = make_grid(32, 33);
    const ScalarField a = preset_theta(g, "blob"), b = preset_theta(g, "checkerboard");
    const ScalarField phi = helmholtz_neumann_solve(a);
    EXPECT_LE(lp_norm(apply_helmholtz(phi) - a, 2.0), 1e-12 * lp_norm(a, 2.0));
    EXPECT_NEAR(inner_product(helmholtz_neumann_solve(a), b), inner_product(a, helmholtz_neumann_solve(b)), 1e-12);
}

TEST(MixNorm, Examples) {
    const Grid g = make_grid(64, 65);
    EXPECT_NEAR(mix_norm(ScalarField(g, 1.0)), std::sqrt(2 * pi), 1e-12);
    EXPECT_NEAR(mix_norm(ScalarField::sample(g, [](double x, double) { return std::cos(x); })), std::sqrt(pi / 2), 1e-12);
    EXPECT_NEAR(mix_norm(ScalarField::sample(g, [](double, double y) { return std::cos(pi * y); })),
                std::sqrt(pi / (1 + pi * pi)), 1e-3);
}

TEST(MixNorm, BoundedByL2AndHomogeneous) {
    const Grid g = make_grid(32, 33);
    for (const char* name : {"stripe", "checkerboard", "blob"}) {
        const ScalarField t = preset_theta(g, name);
        EXPECT_LT(mix_norm(t), lp_norm(t, 2.0));
        ScalarField s = t;
        for (double& x : s.values) x *= -3.0;
        EXPECT_NEAR(mix_norm(s), 3.0 * mix_norm(t), 1e-12);
    }
}

TEST(MixNorm, SmallScalesCountLess) {
    const Grid g = make_grid(128, 9);
    double prev = 1e300;
    for (int k = 1; k <= 8; ++k) {
        const ScalarField t = ScalarField::sample(g, [k](double x, double) { return std::cos(k * x); });
        const double m = mix_norm(t);
        EXPECT_NEAR(m, lp_norm(t, 2.0) / std::sqrt(1.0 + k * k), 1e-10);
        EXPECT_LT(m, prev);
        prev = m;
    }
}

TEST(Cost, Examples) {
    const Grid g = make_grid(64, 65);
    const ControlTrajectory zero(g, 10, 0.1);
    EXPECT_EQ(cost(zero, ScalarField(g), 1e-3, 0.0).total, 0.0);
    const ScalarField c = ScalarField::sample(g, [](double x, double) { return std::cos(x); });
    EXPECT_NEAR(cost(zero, c, 1e-3, 0.0).total, pi / 4, 1e-12);
    const CostReport r = cost(constant_control(g, 10, 0.1, 1.0, 1.0), ScalarField(g), 2.0, 1e-2);
    EXPECT_NEAR(r.total, 4 * pi, 1e-12);
    EXPECT_DOUBLE_EQ(r.total, r.mix_term + r.control_term);
    EXPECT_EQ(r.gamma, 2.0);
    EXPECT_EQ(r.epsilon, 1e-2);
    EXPECT_THROW((void)cost(zero, c, 0.0, 0.0), ConfigError);
}
