#include <cmath>
#include <algorithm>
#include <numbers>

#include <gtest/gtest.h>

#include "mixctl/scenario.hpp"
#include "mixctl/transport.hpp"

using namespace mixctl;
constexpr double pi = std::numbers::pi;

namespace {

VelocityTrajectory steady(const VectorField& v, int nt, double dt) { return {dt, std::vector<VectorField>(nt + 1, v)}; }

VelocityTrajectory driven(const Grid& g, int nt, double dt, std::uint64_t seed, double amp = 1.0) {
    StokesConfig c;
    c.dt = dt;
    c.nt = nt;
    return solve_stokes(VectorField(g), random_control(g, nt, dt, seed, amp), c);
}

}  // namespace

TEST(TransportStep, NoFlowNoDiffusionIsIdentity) {
    const Grid g = make_grid(16, 9);
    const ScalarField th = preset_theta(g, "blob");
    const ScalarField out = transport_step(th, VectorField(g), VectorField(g), 0.0, 0.1);
    EXPECT_EQ(out.values, th.values);
}

TEST(TransportStep, UniformTranslation) {
    const Grid g = make_grid(128, 8);
    const auto ones = VectorField::sample(g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
    const double dt = g.hx / 2;
    const int nt = static_cast<int>(std::round(1.0 / dt));
    const ScalarField th0 = ScalarField::sample(g, [](double x, double) { return std::cos(x); });
    const ScalarTrajectory tr = solve_forward(th0, steady(ones, nt, 1.0 / nt), 0.0, 0.5, nt);
    const ScalarField exact = ScalarField::sample(g, [](double x, double) { return std::cos(x - 1.0); });
    EXPECT_LE(lp_norm(tr.terminal - exact, 2.0), 1e-3);
}

TEST(TransportStep, TranslationErrorDecreasesWithRefinement) {
    double prev = 0.0;
    for (int nx : {32, 64}) {
        const Grid g = make_grid(nx, 4);
        const auto ones = VectorField::sample(g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
        const int nt = 2 * nx;
        const ScalarField th0 = ScalarField::sample(g, [](double x, double) { return std::cos(x); });
        const ScalarTrajectory tr = solve_forward(th0, steady(ones, nt, 1.0 / nt), 0.0, 0.5, nt);
        const double err = lp_norm(tr.terminal - ScalarField::sample(g, [](double x, double) { return std::cos(x - 1.0); }), 2.0);
        if (prev > 0.0) EXPECT_LT(err, prev / 4);
        prev = err;
    }
}

TEST(TransportStep, HeatMode) {
    const Grid g = make_grid(64, 16);
    const double eps = 0.1;
    const int nt = 50;
    const ScalarField th0 = ScalarField::sample(g, [](double x, double) { return std::cos(x); });
    const ScalarTrajectory tr = solve_forward(th0, steady(VectorField(g), nt, 0.02), eps, 0.5, nt);
    const ScalarField exact = ScalarField::sample(g, [&](double x, double) { return std::exp(-eps) * std::cos(x); });
    EXPECT_LE(lp_norm(tr.terminal - exact, std::numeric_limits<double>::infinity()), 1e-5);
}

TEST(TransportStep, CflViolationReportsRequiredDt) {
    const Grid g = make_grid(16, 9);
    const auto fast = VectorField::sample(g, [](double, double) { return 10.0; }, [](double, double) { return 0.0; });
    try {
        (void)transport_step(ScalarField(g, 1.0), fast, fast, 0.0, 0.1);
        FAIL() << "expected CflError";
    } catch (const CflError& e) {
        EXPECT_LT(e.required_dt(), 0.1);
        EXPECT_NEAR(e.required_dt(), 0.5 * std::min(g.hx, g.hy) / 10.0, 1e-12);
    }
}

TEST(SolveForward, CflErrorNamesStep) {
    const Grid g = make_grid(16, 9);
    VelocityTrajectory v = steady(VectorField(g), 6, 0.05);
    v.snapshots[4] = VectorField::sample(g, [](double, double) { return 50.0; }, [](double, double) { return 0.0; });
    try {
        (void)solve_forward(ScalarField(g, 1.0), v, 0.0);
        FAIL() << "expected CflError";
    } catch (const CflError& e) {
        EXPECT_EQ(e.step(), 3);
        EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos);
    }
}

TEST(SolveForward, ConstantStaysConstant) {
    const Grid g = make_grid(32, 17);
    const auto v = driven(g, 40, 0.01, 3);
    for (double eps : {0.0, 1e-2}) {
        const ScalarTrajectory tr = solve_forward(ScalarField(g, 2.0), v, eps);
        for (const auto& s : tr.snapshots)
            for (double x : s.values) EXPECT_NEAR(x, 2.0, 1e-13);
    }
}

TEST(SolveForward, MassConserved) {
    const Grid g = make_grid(32, 17);
    const auto v = driven(g, 40, 0.01, 4);
    const ScalarField th0 = preset_theta(g, "blob");
    for (double eps : {0.0, 1e-2}) {
        ScalarField shifted = th0;
        for (double& x : shifted.values) x += 1.0;
        const ScalarTrajectory tr = solve_forward(shifted, v, eps);
        for (const auto& s : tr.snapshots)
            EXPECT_LE(std::abs(mass(s) - mass(shifted)), 1e-12 * std::abs(mass(shifted)) + 1e-14);
    }
}

TEST(SolveForward, L2NormConservedWithoutDiffusion) {
    const Problem p = reference_problem(64, 65);
    StokesConfig c = p.stokes;
    const auto v = solve_stokes(p.v0, random_control(p.grid, c.nt, c.dt, 5, 1.5), c);
    const ScalarTrajectory tr = solve_forward(p.theta0, v, 0.0, p.cfl, c.nt);
    EXPECT_LE(std::abs(lp_norm(tr.terminal, 2.0) / lp_norm(p.theta0, 2.0) - 1.0), 1e-3);
}

TEST(SolveForward, L2DecaysWithDiffusionAtRest) {
    const Grid g = make_grid(32, 17);
    const ScalarTrajectory tr = solve_forward(preset_theta(g, "checkerboard"), steady(VectorField(g), 20, 0.05), 0.05);
    for (int n = 0; n < 20; ++n) EXPECT_LE(lp_norm(tr.at(n + 1), 2.0), lp_norm(tr.at(n), 2.0));
}

namespace {

double overshoot(const ScalarField& th0, const ScalarTrajectory& tr) {
    double lo = th0.values[0], hi = th0.values[0];
    for (double x : th0.values) lo = std::min(lo, x), hi = std::max(hi, x);
    double over = 0.0;
    for (const auto& s : tr.snapshots)
        for (double x : s.values) over = std::max({over, x - hi, lo - x});
    return over / (hi - lo);
}

}  // namespace

TEST(SolveForward, OvershootBoundedAtReferenceResolution) {
    const Problem p = reference_problem(128, 129);
    const auto v = solve_stokes(p.v0, random_control(p.grid, p.stokes.nt, p.stokes.dt, 8, 1.5), p.stokes);
    EXPECT_LE(overshoot(p.theta0, solve_forward(p.theta0, v, 0.0)), 1e-2);
}

TEST(SolveForward, OvershootShrinksUnderRefinement) {
    double prev = 0.0;
    for (int r : {32, 64, 128}) {
        const Problem p = reference_problem(r, r + 1);
        const auto v = solve_stokes(p.v0, random_control(p.grid, p.stokes.nt, p.stokes.dt, 8, 1.5), p.stokes);
        const ScalarField th0 = preset_theta(p.grid, "blob");
        const double over = overshoot(th0, solve_forward(th0, v, 0.0));
        if (prev > 0.0) EXPECT_LT(over, 0.5 * prev) << "resolution " << r;
        prev = over;
    }
}

TEST(SolveForward, StrideKeepsEveryKthState) {
    const Grid g = make_grid(16, 9);
    const auto v = driven(g, 10, 0.02, 9);
    const ScalarField th0 = preset_theta(g, "stripe");
    const ScalarTrajectory full = solve_forward(th0, v, 1e-2);
    const ScalarTrajectory thin = solve_forward(th0, v, 1e-2, kDefaultCfl, 4);
    EXPECT_EQ(thin.snapshots.size(), 3u);
    EXPECT_EQ(thin.at(8).values, full.at(8).values);
    EXPECT_EQ(thin.terminal.values, full.terminal.values);
    EXPECT_THROW((void)thin.at(5), ConfigError);
}

TEST(Linearized, ZeroDirectionAndConstantBase) {
    const Grid g = make_grid(16, 9);
    StokesConfig c;
    c.dt = 0.02;
    c.nt = 10;
    const ControlTrajectory g0 = random_control(g, c.nt, c.dt, 1);
    const auto v = solve_stokes(VectorField(g), g0, c);
    const ScalarTrajectory base = solve_forward(preset_theta(g, "stripe"), v, 1e-2);
    const ScalarTrajectory z0 = solve_linearized(ControlTrajectory(g, c.nt, c.dt), base, v, c);
    EXPECT_EQ(lp_norm(z0.terminal, std::numeric_limits<double>::infinity()), 0.0);
    const ScalarTrajectory cb = solve_forward(ScalarField(g, 3.0), v, 1e-2);
    const ScalarTrajectory zc = solve_linearized(random_control(g, c.nt, c.dt, 2), cb, v, c);
    EXPECT_LT(lp_norm(zc.terminal, std::numeric_limits<double>::infinity()), 1e-13);
}

TEST(Linearized, LinearInDirection) {
    const Grid g = make_grid(16, 9);
    StokesConfig c;
    c.dt = 0.02;
    c.nt = 10;
    const auto v = solve_stokes(VectorField(g), random_control(g, c.nt, c.dt, 1), c);
    const ScalarTrajectory base = solve_forward(preset_theta(g, "stripe"), v, 1e-2);
    const ControlTrajectory a = random_control(g, c.nt, c.dt, 2), b = random_control(g, c.nt, c.dt, 3);
    ControlTrajectory ab = a;
    axpy(3.0, b, ab);
    ScalarField lhs = solve_linearized(ab, base, v, c).terminal;
    axpy(-1.0, solve_linearized(a, base, v, c).terminal, lhs);
    axpy(-3.0, solve_linearized(b, base, v, c).terminal, lhs);
    EXPECT_LT(lp_norm(lhs, std::numeric_limits<double>::infinity()), 1e-12);
}

TEST(Linearized, MatchesFiniteDifferenceOfForward) {
    const Grid g = make_grid(16, 9);
    StokesConfig c;
    c.dt = 0.02;
    c.nt = 10;
    const ControlTrajectory g0 = random_control(g, c.nt, c.dt, 1, 0.5);
    const ControlTrajectory h = random_control(g, c.nt, c.dt, 7);
    const ScalarField th0 = preset_theta(g, "checkerboard");
    const auto v = solve_stokes(VectorField(g), g0, c);
    const ScalarTrajectory base = solve_forward(th0, v, 1e-2);
    const ScalarField z = solve_linearized(h, base, v, c).terminal;
    double prev = 0.0;
    for (double delta : {1e-3, 1e-4}) {
        ControlTrajectory gp = g0;
        axpy(delta, h, gp);
        ScalarField fd = solve_forward(th0, solve_stokes(VectorField(g), gp, c), 1e-2).terminal;
        axpy(-1.0, base.terminal, fd);
        for (double& x : fd.values) x /= delta;
        const double err = lp_norm(fd - z, 2.0) / lp_norm(z, 2.0);
        EXPECT_LT(err, 1e-2);
        if (prev > 0.0) EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(Diagnostics, Columns) {
    const Grid g = make_grid(16, 9);
    const ScalarTrajectory tr = solve_forward(preset_theta(g, "stripe"), steady(VectorField(g), 4, 0.1), 0.0);
    const auto d = diagnostics(tr);
    ASSERT_EQ(d.size(), 5u);
    EXPECT_DOUBLE_EQ(d[4].t, 0.4);
    EXPECT_NEAR(d[0].l2, std::sqrt(pi), 1e-12);
    EXPECT_NEAR(d[0].mixnorm, std::sqrt(pi / 2), 1e-3);
}
