#pragma once

#include "mixctl/grid.hpp"
#include "mixctl/stokes.hpp"

namespace mixctl {

/// Solves (-Lap + I) phi = theta with homogeneous Neumann walls.
[[nodiscard]] ScalarField helmholtz_neumann_solve(const ScalarField& theta);
/// Applies (-Lap + I) with the same discretization.
[[nodiscard]] ScalarField apply_helmholtz(const ScalarField& phi);

/// (H^1)' norm: sqrt((A^{-1} theta, theta)).
[[nodiscard]] double mix_norm(const ScalarField& theta);

struct CostReport {
    double mix_term = 0.0;      // 1/2 |theta(T)|^2_{(H^1)'}
    double control_term = 0.0;  // gamma/2 |g|^2
    double total = 0.0;
    double gamma = 0.0;
    double epsilon = 0.0;
};

[[nodiscard]] CostReport cost(const ControlTrajectory& g, const ScalarField& theta_T, double gamma, double epsilon);

}  // namespace mixctl
