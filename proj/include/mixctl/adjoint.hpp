#pragma once

#include <vector>

#include "mixctl/stokes.hpp"
#include "mixctl/transport.hpp"

namespace mixctl {

/// rho(T) = (-Lap + I)^{-1} theta(T), Neumann walls.
[[nodiscard]] ScalarField terminal_condition(const ScalarField& theta_T);

struct AdjointSolution {
    /// rho(t_n), n = 0..nt: the L^2 representative of d(mix term)/d theta(t_n).
    ScalarTrajectory rho;
    /// f(t_n) with d(mix term)/dv . w = spacetime_inner(f, w) for every velocity
    /// perturbation w; the discrete counterpart of theta grad(rho). f(t_0) is
    /// the sensitivity to the prescribed initial velocity.
    std::vector<VectorField> velocity_sensitivity;
};

/// Backward sweep built as the exact transpose of solve_forward, so that
///   (rho(T), z(T)) == spacetime_inner(velocity_sensitivity, w)
/// for the tangent solution z driven by w. A strided base is recomputed
/// segment by segment.
[[nodiscard]] AdjointSolution solve_adjoint(const ScalarField& theta_T, const ScalarTrajectory& base,
                                            const VelocityTrajectory& v);

/// Independent discretization of the backward transport-diffusion equation
/// (forward scheme run on -v in reversed time), with the sensitivity formed
/// from cell-centered theta grad(rho) averaged to faces. Cross-check only.
[[nodiscard]] AdjointSolution solve_adjoint_continuous(const ScalarField& theta_T, const ScalarTrajectory& base,
                                                       const VelocityTrajectory& v, double cfl = kDefaultCfl);

/// sup_n |grad rho(t_n)|_{L^2}.
[[nodiscard]] double sup_grad_l2(const ScalarTrajectory& rho);

}  // namespace mixctl
