#include "mixctl/adjoint.hpp"

#include <cmath>

#include "mixctl/mixnorm.hpp"

namespace mixctl {

ScalarField terminal_condition(const ScalarField& theta_T) { return helmholtz_neumann_solve(theta_T); }

namespace {

ScalarTrajectory empty_like(const ScalarTrajectory& base) {
    ScalarTrajectory r;
    r.dt = base.dt;
    r.epsilon = base.epsilon;
    r.nt = base.nt;
    r.snapshots.resize(static_cast<std::size_t>(base.nt) + 1);
    return r;
}

void to_l2_representative(std::vector<VectorField>& f, double dt) {
    const int nt = static_cast<int>(f.size()) - 1;
    for (int n = 0; n <= nt; ++n) {
        const double s = 1.0 / (trapezoid_weight(n, nt) * dt);
        for (double& t : f[n].u) t *= s;
        for (double& t : f[n].v) t *= s;
    }
}

}  // namespace

AdjointSolution solve_adjoint(const ScalarField& theta_T, const ScalarTrajectory& base, const VelocityTrajectory& v) {
    using namespace detail;
    if (base.nt != v.nt()) throw ConfigError("solve_adjoint: trajectory mismatch");
    const int nt = base.nt;
    const double dt = base.dt;
    const double eps = base.epsilon;
    const Grid& g = theta_T.grid;

    AdjointSolution out;
    out.rho = empty_like(base);
    out.velocity_sensitivity.assign(static_cast<std::size_t>(nt) + 1, VectorField(g));
    auto& f = out.velocity_sensitivity;

    ScalarField lambda = terminal_condition(theta_T);
    out.rho.snapshots[nt] = lambda;

    // states theta^c .. theta^{c+stride-1} of the segment being swept
    std::vector<ScalarField> segment;
    int segment_start = -1;

    for (int n = nt - 1; n >= 0; --n) {
        const int c = (n / base.stride) * base.stride;
        if (c != segment_start) {
            segment.clear();
            segment.push_back(base.at(c));
            for (int m = c; m < std::min(c + base.stride, nt) - 1; ++m)
                segment.push_back(step(segment.back(), v.snapshots[m], v.snapshots[m + 1], eps, dt));
            segment_start = c;
        }
        const ScalarField& th = segment[static_cast<std::size_t>(n - c)];
        const VectorField& va = v.snapshots[n];
        const VectorField& vb = v.snapshots[n + 1];
        const VectorField vc = average(va, vb);

        ScalarField t1 = th;
        axpy(dt, advect(th, va), t1);
        ScalarField t2 = t1;
        axpy(dt, advect(t1, vb), t2);
        for (std::size_t k = 0; k < t2.values.size(); ++k) t2.values[k] = 0.75 * th.values[k] + 0.25 * t2.values[k];

        const ScalarField mu3 = diffuse(lambda, eps, dt);
        accumulate_velocity_sensitivity(mu3, t2, vc, dt / 3.0, f[n]);
        accumulate_velocity_sensitivity(mu3, t2, vc, dt / 3.0, f[n + 1]);

        ScalarField mu2 = mu3;
        axpy(dt, advect_transpose(mu3, vc), mu2);
        for (double& t : mu2.values) t *= 2.0 / 3.0;
        accumulate_velocity_sensitivity(mu2, t1, vb, 0.25 * dt, f[n + 1]);

        ScalarField mu1 = mu2;
        axpy(dt, advect_transpose(mu2, vb), mu1);
        for (double& t : mu1.values) t *= 0.25;
        accumulate_velocity_sensitivity(mu1, th, va, dt, f[n]);

        ScalarField next = mu1;
        axpy(dt, advect_transpose(mu1, va), next);
        for (std::size_t k = 0; k < next.values.size(); ++k)
            next.values[k] += mu3.values[k] / 3.0 + 0.75 * mu2.values[k];
        if (!all_finite(next)) throw NumericalError("adjoint: non-finite rho at step " + std::to_string(n));
        lambda = std::move(next);
        out.rho.snapshots[n] = lambda;
    }
    out.rho.terminal = out.rho.snapshots[nt];
    to_l2_representative(f, dt);
    return out;
}

namespace {

// theta * grad(rho) with centered cell gradients, averaged to faces.
VectorField theta_grad_rho(const ScalarField& theta, const ScalarField& rho) {
    const Grid& g = theta.grid;
    ScalarField px(g), py(g);
    for (int j = 0; j < g.ny; ++j) {
        const int jm = j > 0 ? j - 1 : 0;
        const int jp = j + 1 < g.ny ? j + 1 : g.ny - 1;
        for (int i = 0; i < g.nx; ++i) {
            px.at(i, j) = theta.at(i, j) * (rho.at(g.wrap(i + 1), j) - rho.at(g.wrap(i - 1), j)) / (2.0 * g.hx);
            py.at(i, j) = theta.at(i, j) * (rho.at(i, jp) - rho.at(i, jm)) / (2.0 * g.hy);
        }
    }
    VectorField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.ux(i, j) = 0.5 * (px.at(g.wrap(i - 1), j) + px.at(i, j));
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.vy(i, j) = 0.5 * (py.at(i, j - 1) + py.at(i, j));
    return f;
}

VectorField negated(const VectorField& v) {
    VectorField m = v;
    for (double& t : m.u) t = -t;
    for (double& t : m.v) t = -t;
    return m;
}

}  // namespace

AdjointSolution solve_adjoint_continuous(const ScalarField& theta_T, const ScalarTrajectory& base,
                                         const VelocityTrajectory& v, double cfl) {
    if (base.nt != v.nt()) throw ConfigError("solve_adjoint_continuous: trajectory mismatch");
    if (base.stride != 1) throw ConfigError("solve_adjoint_continuous: base trajectory must store every step");
    const int nt = base.nt;
    AdjointSolution out;
    out.rho = empty_like(base);
    out.rho.snapshots[nt] = terminal_condition(theta_T);
    for (int n = nt - 1; n >= 0; --n) {
        const VectorField a = negated(v.snapshots[n + 1]);
        const VectorField b = negated(v.snapshots[n]);
        out.rho.snapshots[n] = transport_step(out.rho.snapshots[n + 1], a, b, base.epsilon, base.dt, cfl);
    }
    out.rho.terminal = out.rho.snapshots[nt];
    out.velocity_sensitivity.reserve(static_cast<std::size_t>(nt) + 1);
    for (int n = 0; n <= nt; ++n) out.velocity_sensitivity.push_back(theta_grad_rho(base.at(n), out.rho.snapshots[n]));
    return out;
}

double sup_grad_l2(const ScalarTrajectory& rho) {
    double m = 0.0;
    for (const auto& r : rho.snapshots) m = std::max(m, l2_norm(gradient(r)));
    return m;
}

}  // namespace mixctl
