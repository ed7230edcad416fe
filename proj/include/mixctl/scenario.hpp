#pragma once

#include <cstdint>
#include <string_view>

#include "mixctl/grid.hpp"
#include "mixctl/stokes.hpp"
#include "mixctl/transport.hpp"

namespace mixctl {

/// Everything in an optimal mixing problem except the control and the
/// regularization parameters.
struct Problem {
    Grid grid;
    ScalarField theta0;
    VectorField v0;
    StokesConfig stokes;
    double cfl = kDefaultCfl;
};

/// "stripe" sin(2 pi x/Lx), "checkerboard" sin(2 pi x/Lx) cos(pi y/Ly),
/// "blob" a mean-free Gaussian bump, "constant" 1.
[[nodiscard]] ScalarField preset_theta(const Grid& g, std::string_view name);

/// Steps needed on [0,T] so that velocities up to vmax satisfy the CFL bound.
[[nodiscard]] int nt_for_cfl(const Grid& g, double horizon, double cfl, double vmax);

/// Stripe initial data, v0 = 0, k = 1, horizon T, nt from the CFL bound at vmax.
[[nodiscard]] Problem reference_problem(int nx = 128, int ny = 129, double horizon = 1.0, double vmax = 4.0);

[[nodiscard]] ControlTrajectory constant_control(const Grid& g, int nt, double dt, double bottom, double top);

/// Smooth random control: a few low x-modes times a few low time modes with
/// standard normal coefficients, scaled by `amplitude`.
[[nodiscard]] ControlTrajectory random_control(const Grid& g, int nt, double dt, std::uint64_t seed,
                                               double amplitude = 1.0, int x_modes = 3, int t_modes = 3);

/// Independent standard normal samples at every wall node and time level.
[[nodiscard]] ControlTrajectory white_noise_control(const Grid& g, int nt, double dt, std::uint64_t seed);

[[nodiscard]] VectorField white_noise_velocity(const Grid& g, std::uint64_t seed);

}  // namespace mixctl
