#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mixctl/adjoint.hpp"
#include "mixctl/mixnorm.hpp"
#include "mixctl/scenario.hpp"

using namespace mixctl;
constexpr double pi = std::numbers::pi;

namespace {

struct Flow {
    Grid g;
    StokesConfig c;
    VelocityTrajectory v;
};

Flow make_flow(int nx, int ny, int nt, double dt, std::uint64_t seed) {
    Flow s{make_grid(nx, ny), {}, {}};
    s.c.dt = dt;
    s.c.nt = nt;
    s.v = solve_stokes(VectorField(s.g), random_control(s.g, nt, dt, seed), s.c);
    return s;
}

VelocityTrajectory random_directions(const Grid& g, int nt, double dt, std::uint64_t seed) {
    VelocityTrajectory w{dt, {}};
    for (int n = 0; n <= nt; ++n) w.snapshots.push_back(leray_project(white_noise_velocity(g, seed + n)));
    return w;
}

}  // namespace

TEST(TerminalCondition, Examples) {
    const Grid g = make_grid(64, 65);
    for (double x : terminal_condition(ScalarField(g, 0.3)).values) EXPECT_NEAR(x, 0.3, 1e-13);
    const ScalarField c = ScalarField::sample(g, [](double x, double) { return std::cos(x); });
    const ScalarField r = terminal_condition(c);
    for (std::size_t k = 0; k < c.values.size(); ++k) EXPECT_NEAR(r.values[k], c.values[k] / 2, 1e-12);
    const ScalarField cy = ScalarField::sample(g, [](double, double y) { return std::cos(pi * y); });
    const ScalarField ry = terminal_condition(cy);
    for (std::size_t k = 0; k < cy.values.size(); ++k) EXPECT_NEAR(ry.values[k], cy.values[k] / (1 + pi * pi), 1e-3);
}

TEST(SolveAdjoint, StationaryWithoutFlow) {
    const Grid g = make_grid(16, 9);
    const VelocityTrajectory v{0.1, std::vector<VectorField>(6, VectorField(g))};
    const ScalarTrajectory base = solve_forward(preset_theta(g, "checkerboard"), v, 0.0);
    const AdjointSolution a = solve_adjoint(base.terminal, base, v);
    const ScalarField rT = terminal_condition(base.terminal);
    for (int n = 0; n <= 5; ++n)
        for (std::size_t k = 0; k < rT.values.size(); ++k) EXPECT_NEAR(a.rho.at(n).values[k], rT.values[k], 1e-15);
}

TEST(SolveAdjoint, ConstantState) {
    const Flow s = make_flow(16, 9, 10, 0.02, 1);
    const ScalarTrajectory base = solve_forward(ScalarField(s.g, 1.5), s.v, 1e-2);
    const AdjointSolution a = solve_adjoint(base.terminal, base, s.v);
    for (int n = 0; n <= 10; ++n)
        for (double x : a.rho.at(n).values) EXPECT_NEAR(x, 1.5, 1e-13);
    EXPECT_LT(sup_grad_l2(a.rho), 1e-11);
}

TEST(SolveAdjoint, DualityWithTangent) {
    for (double eps : {0.0, 1e-2}) {
        const Flow s = make_flow(32, 17, 24, 0.01, 2);
        const ScalarTrajectory base = solve_forward(preset_theta(s.g, "blob"), s.v, eps);
        const AdjointSolution a = solve_adjoint(base.terminal, base, s.v);
        const VelocityTrajectory w = random_directions(s.g, s.c.nt, s.c.dt, 50);
        const ScalarTrajectory z = solve_tangent(w, base, s.v);
        const double lhs = inner_product(terminal_condition(base.terminal), z.terminal);
        const double rhs = spacetime_inner(a.velocity_sensitivity, w.snapshots, s.c.dt);
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::abs(lhs)) << "eps " << eps;
    }
}

TEST(SolveAdjoint, DualityAlongControlDirection) {
    const Flow s = make_flow(32, 17, 24, 0.01, 3);
    const ScalarTrajectory base = solve_forward(preset_theta(s.g, "stripe"), s.v, 1e-3);
    const AdjointSolution a = solve_adjoint(base.terminal, base, s.v);
    const ControlTrajectory h = random_control(s.g, s.c.nt, s.c.dt, 9);
    const ScalarTrajectory z = solve_linearized(h, base, s.v, s.c);
    const double lhs = inner_product(terminal_condition(base.terminal), z.terminal);
    const double rhs = control_inner(h, apply_L_star(a.velocity_sensitivity, s.c));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
}

TEST(SolveAdjoint, CheckpointStrideGivesSameSensitivity) {
    const Flow s = make_flow(16, 9, 13, 0.02, 4);
    const ScalarField th0 = preset_theta(s.g, "blob");
    const ScalarTrajectory full = solve_forward(th0, s.v, 1e-2);
    const ScalarTrajectory thin = solve_forward(th0, s.v, 1e-2, kDefaultCfl, 4);
    const AdjointSolution a = solve_adjoint(full.terminal, full, s.v);
    const AdjointSolution b = solve_adjoint(thin.terminal, thin, s.v);
    ASSERT_EQ(a.velocity_sensitivity.size(), b.velocity_sensitivity.size());
    for (std::size_t n = 0; n < a.velocity_sensitivity.size(); ++n) {
        EXPECT_EQ(a.velocity_sensitivity[n].u, b.velocity_sensitivity[n].u);
        EXPECT_EQ(a.velocity_sensitivity[n].v, b.velocity_sensitivity[n].v);
    }
}

TEST(SolveAdjoint, L2DriftSmallWithoutDiffusion) {
    const Problem p = reference_problem(64, 65);
    const auto v = solve_stokes(p.v0, random_control(p.grid, p.stokes.nt, p.stokes.dt, 5), p.stokes);
    const ScalarTrajectory base = solve_forward(p.theta0, v, 0.0);
    const AdjointSolution a = solve_adjoint(base.terminal, base, v);
    const double r0 = lp_norm(a.rho.at(0), 2.0), rT = lp_norm(a.rho.at(p.stokes.nt), 2.0);
    EXPECT_LE(std::abs(r0 - rT) / rT, 1e-3);
    EXPECT_TRUE(std::isfinite(sup_grad_l2(a.rho)));
    EXPECT_GT(sup_grad_l2(a.rho), 0.0);
}

TEST(SolveAdjointContinuous, AgreesWithDiscreteUnderRefinement) {
    double prev = 0.0;
    for (int r : {32, 64}) {
        Problem p = reference_problem(r, r + 1, 0.5, 2.0);
        const ControlTrajectory g = random_control(p.grid, p.stokes.nt, p.stokes.dt, 6);
        const auto v = solve_stokes(p.v0, g, p.stokes);
        const ScalarTrajectory base = solve_forward(p.theta0, v, 1e-2);
        const ControlTrajectory gd = apply_L_star(solve_adjoint(base.terminal, base, v).velocity_sensitivity, p.stokes);
        const ControlTrajectory gc =
            apply_L_star(solve_adjoint_continuous(base.terminal, base, v).velocity_sensitivity, p.stokes);
        ControlTrajectory d = gd;
        axpy(-1.0, gc, d);
        const double rel = control_norm(d) / control_norm(gd);
        EXPECT_LT(rel, 0.1) << "resolution " << r;
        if (prev > 0.0) EXPECT_LT(rel, prev);
        prev = rel;
    }
}
