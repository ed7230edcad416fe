#include "mixctl/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace mixctl {

ScalarField preset_theta(const Grid& g, std::string_view name) {
    constexpr double pi = std::numbers::pi;
    if (name == "stripe") return ScalarField::sample(g, [&](double x, double) { return std::sin(2.0 * pi * x / g.lx); });
    if (name == "checkerboard")
        return ScalarField::sample(
            g, [&](double x, double y) { return std::sin(2.0 * pi * x / g.lx) * std::cos(pi * y / g.ly); });
    if (name == "blob") {
        const double sigma = 0.15 * std::min(g.lx, g.ly);
        ScalarField f = ScalarField::sample(g, [&](double x, double y) {
            const double dx = x - 0.5 * g.lx, dy = y - 0.5 * g.ly;
            return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        });
        const double mean = mass(f) / g.area();
        for (double& t : f.values) t -= mean;
        return f;
    }
    if (name == "constant") return ScalarField(g, 1.0);
    throw ConfigError("unknown initial-data preset '" + std::string(name) + "'");
}

int nt_for_cfl(const Grid& g, double horizon, double cfl, double vmax) {
    if (!(horizon > 0.0) || !(cfl > 0.0) || !(vmax > 0.0)) throw ConfigError("nt_for_cfl: arguments must be > 0");
    const double dt_max = cfl * std::min(g.hx, g.hy) / vmax;
    return std::max(1, static_cast<int>(std::ceil(horizon / dt_max - 1e-12)));
}

Problem reference_problem(int nx, int ny, double horizon, double vmax) {
    Problem p;
    p.grid = make_grid(nx, ny);
    p.theta0 = preset_theta(p.grid, "stripe");
    p.v0 = VectorField(p.grid);
    p.stokes.k = 1.0;
    p.stokes.nt = nt_for_cfl(p.grid, horizon, p.cfl, vmax);
    p.stokes.dt = horizon / p.stokes.nt;
    return p;
}

ControlTrajectory constant_control(const Grid& g, int nt, double dt, double bottom, double top) {
    ControlTrajectory c(g, nt, dt);
    for (auto& s : c.slices) {
        std::fill(s.bottom.begin(), s.bottom.end(), bottom);
        std::fill(s.top.begin(), s.top.end(), top);
    }
    return c;
}

ControlTrajectory random_control(const Grid& g, int nt, double dt, std::uint64_t seed, double amplitude, int x_modes,
                                 int t_modes) {
    constexpr double pi = std::numbers::pi;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ControlTrajectory c(g, nt, dt);
    const double horizon = nt * dt;
    for (int wall = 0; wall < 2; ++wall) {
        for (int m = 0; m < x_modes; ++m) {
            for (int q = 0; q < t_modes; ++q) {
                const double ac = normal(rng), as = m > 0 ? normal(rng) : 0.0;
                const double scale = amplitude / (1.0 + m + q);
                for (int n = 0; n <= nt; ++n) {
                    const double tp = std::cos(pi * q * n * dt / horizon);
                    auto& row = wall == 0 ? c.slices[n].bottom : c.slices[n].top;
                    for (int i = 0; i < g.nx; ++i) {
                        const double ph = 2.0 * pi * m * g.xface(i) / g.lx;
                        row[i] += scale * tp * (ac * std::cos(ph) + as * std::sin(ph));
                    }
                }
            }
        }
    }
    return c;
}

ControlTrajectory white_noise_control(const Grid& g, int nt, double dt, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ControlTrajectory c(g, nt, dt);
    for (auto& s : c.slices) {
        for (double& t : s.bottom) t = normal(rng);
        for (double& t : s.top) t = normal(rng);
    }
    return c;
}

VectorField white_noise_velocity(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    VectorField v(g);
    for (double& t : v.u) t = normal(rng);
    for (double& t : v.v) t = normal(rng);
    v.zero_wall_normal();
    return v;
}

}  // namespace mixctl
