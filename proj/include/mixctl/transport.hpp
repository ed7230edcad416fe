#pragma once

#include <span>
#include <vector>

#include "mixctl/grid.hpp"
#include "mixctl/stokes.hpp"

namespace mixctl {

/// Raised when a step would exceed the advective CFL bound.
class CflError : public NumericalError {
public:
    CflError(const std::string& what, int step, double dt, double required_dt)
        : NumericalError(what), step_(step), dt_(dt), required_dt_(required_dt) {}
    [[nodiscard]] int step() const { return step_; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] double required_dt() const { return required_dt_; }

private:
    int step_;
    double dt_;
    double required_dt_;
};

/// Scalar history theta(t_n). With stride s > 1 only every s-th state is kept
/// (n = 0, s, 2s, ...); `terminal` always holds theta(t_nt).
struct ScalarTrajectory {
    double dt = 0.0;
    double epsilon = 0.0;
    int nt = 0;
    int stride = 1;
    std::vector<ScalarField> snapshots;
    ScalarField terminal;

    [[nodiscard]] bool stored(int n) const { return n % stride == 0 && n / stride < static_cast<int>(snapshots.size()); }
    [[nodiscard]] const ScalarField& at(int n) const;
};

inline constexpr double kDefaultCfl = 0.5;

/// Largest dt admitted by the CFL bound for the given velocities.
[[nodiscard]] double cfl_dt_limit(const VectorField& a, const VectorField& b, double cfl);

/// One step: SSP-RK3 advection with third-order upwind-biased fluxes, then a
/// Crank-Nicolson Neumann diffusion solve when epsilon > 0.
[[nodiscard]] ScalarField transport_step(const ScalarField& theta, const VectorField& v_now,
                                         const VectorField& v_next, double epsilon, double dt,
                                         double cfl = kDefaultCfl);

[[nodiscard]] ScalarTrajectory solve_forward(const ScalarField& theta0, const VelocityTrajectory& v, double epsilon,
                                             double cfl = kDefaultCfl, int stride = 1);

/// Tangent-linear solve: z(0) = 0 driven by the velocity perturbation w.
[[nodiscard]] ScalarTrajectory solve_tangent(const VelocityTrajectory& w, const ScalarTrajectory& base,
                                             const VelocityTrajectory& v);

/// Gateaux derivative of theta along the control direction h (w = L h).
[[nodiscard]] ScalarTrajectory solve_linearized(const ControlTrajectory& h, const ScalarTrajectory& base,
                                                const VelocityTrajectory& v, const StokesConfig& cfg);

struct TransportDiagnostics {
    double t;
    double mass;
    double l1;
    double l2;
    double linf;
    double mixnorm;
};

[[nodiscard]] std::vector<TransportDiagnostics> diagnostics(const ScalarTrajectory& traj);

namespace detail {

// Advective tendency R(theta, v) = -div F, F = v C4(theta) + |v| D(theta) / 12.
ScalarField advect(const ScalarField& theta, const VectorField& v);
// dR/dv applied to w, with the upwind switch frozen at sign(v).
ScalarField advect_velocity_derivative(const ScalarField& theta, const VectorField& v, const VectorField& w);
// (dR/dtheta)^T lambda.
ScalarField advect_transpose(const ScalarField& lambda, const VectorField& v);
// out += scale * d(lambda . R(theta, v))/dv, face by face.
void accumulate_velocity_sensitivity(const ScalarField& lambda, const ScalarField& theta, const VectorField& v,
                                     double scale, VectorField& out);
// (I - c Lap)^{-1} (I + c Lap) with c = epsilon dt / 2; symmetric.
ScalarField diffuse(const ScalarField& theta, double epsilon, double dt);
VectorField average(const VectorField& a, const VectorField& b);
// One full transport step without stability checks.
ScalarField step(const ScalarField& theta, const VectorField& v_now, const VectorField& v_next, double epsilon,
                 double dt);

}  // namespace detail

}  // namespace mixctl
