#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mixctl/grid.hpp"

namespace mixctl {

struct StokesConfig {
    double k = 1.0;  // wall friction
    double dt = 0.01;
    int nt = 100;
    double div_tol_factor = 1e-10;  // div_tol = factor * |v|_inf / min(hx, hy)

    [[nodiscard]] double horizon() const { return dt * nt; }
    void validate() const;
};

/// Wall controls g(t_n) at n = 0..nt, piecewise linear in time.
/// With `mode_cap = K` only x-Fourier modes m < K may be nonzero.
struct ControlTrajectory {
    Grid grid;
    double dt = 0.0;
    std::vector<BoundarySlice> slices;
    std::optional<int> mode_cap;

    ControlTrajectory() = default;
    ControlTrajectory(const Grid& g, int nt, double dt_, double fill = 0.0)
        : grid(g), dt(dt_), slices(static_cast<std::size_t>(nt) + 1, BoundarySlice(g, fill)) {}

    [[nodiscard]] int nt() const { return static_cast<int>(slices.size()) - 1; }
};

struct VelocityTrajectory {
    double dt = 0.0;
    std::vector<VectorField> snapshots;  // nt + 1

    [[nodiscard]] int nt() const { return static_cast<int>(snapshots.size()) - 1; }
};

/// Trapezoidal time weight of sample n out of 0..nt (1/2 at the ends).
[[nodiscard]] double trapezoid_weight(int n, int nt);

/// L^2(0,T; L^2(walls)) inner product, trapezoidal in time.
[[nodiscard]] double control_inner(const ControlTrajectory& a, const ControlTrajectory& b);
[[nodiscard]] double control_norm(const ControlTrajectory& a);
ControlTrajectory& axpy(double a, const ControlTrajectory& x, ControlTrajectory& y);
ControlTrajectory scaled(const ControlTrajectory& x, double a);
/// Zeroes x-modes m >= mode_cap on every slice; no-op without a cap.
void apply_mode_cap(ControlTrajectory& g);

/// Space-time inner product sum_n w_n dt (a_n, b_n), trapezoidal in time.
[[nodiscard]] double spacetime_inner(std::span<const VectorField> a, std::span<const VectorField> b, double dt);

/// Helmholtz-Leray projection onto discretely divergence-free fields with
/// zero normal wall velocity.
[[nodiscard]] VectorField leray_project(const VectorField& u);
[[nodiscard]] double divergence_tolerance(const VectorField& v, double factor = 1e-10);
[[nodiscard]] double max_divergence(const VectorField& v);

/// One Crank-Nicolson step of the unsteady Stokes system with Navier slip
/// data at the midpoint (g_now + g_next)/2, followed by projection.
[[nodiscard]] VectorField stokes_step(const VectorField& v, const BoundarySlice& g_now,
                                      const BoundarySlice& g_next, const StokesConfig& cfg);

/// Full trajectory from v0 driven by g; g.nt() must equal cfg.nt.
[[nodiscard]] VelocityTrajectory solve_stokes(const VectorField& v0, const ControlTrajectory& g,
                                              const StokesConfig& cfg);

/// Control-to-velocity map from zero initial data.
[[nodiscard]] VelocityTrajectory apply_L(const ControlTrajectory& g, const StokesConfig& cfg);

/// Exact transpose of apply_L under spacetime_inner / control_inner:
///   spacetime_inner(L g, f) == control_inner(g, L* f).
[[nodiscard]] ControlTrajectory apply_L_star(std::span<const VectorField> f, const StokesConfig& cfg);

/// Linear extrapolation of u from the first two cell rows to each wall.
[[nodiscard]] BoundarySlice boundary_trace_tangential(const VectorField& v);

/// max over walls of |k u_wall -+ du/dy|_wall - g|, one-sided stencils.
[[nodiscard]] double navier_slip_residual(const VectorField& v, const BoundarySlice& g, double k);

/// Trapezoidal time integral of max |grad v| over all four components.
[[nodiscard]] double grad_v_infty_integral(const VelocityTrajectory& v);

}  // namespace mixctl
