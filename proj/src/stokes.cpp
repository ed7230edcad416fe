#include "mixctl/stokes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixctl/spectral.hpp"

namespace mixctl {

void StokesConfig::validate() const {
    if (!(k > 0.0)) throw ConfigError("stokes: friction k must be > 0");
    if (!(dt > 0.0)) throw ConfigError("stokes: dt must be > 0");
    if (nt < 1) throw ConfigError("stokes: nt must be >= 1");
}

double trapezoid_weight(int n, int nt) { return (n == 0 || n == nt) ? 0.5 : 1.0; }

double control_inner(const ControlTrajectory& a, const ControlTrajectory& b) {
    if (a.nt() != b.nt()) throw ConfigError("control_inner: trajectory length mismatch");
    double s = 0.0;
    for (int n = 0; n <= a.nt(); ++n) s += trapezoid_weight(n, a.nt()) * inner_product(a.slices[n], b.slices[n]);
    return s * a.dt;
}

double control_norm(const ControlTrajectory& a) { return std::sqrt(std::max(0.0, control_inner(a, a))); }

ControlTrajectory& axpy(double a, const ControlTrajectory& x, ControlTrajectory& y) {
    if (x.nt() != y.nt()) throw ConfigError("axpy: control length mismatch");
    for (int n = 0; n <= x.nt(); ++n) axpy(a, x.slices[n], y.slices[n]);
    return y;
}

ControlTrajectory scaled(const ControlTrajectory& x, double a) {
    ControlTrajectory y = x;
    for (auto& s : y.slices) {
        for (double& t : s.bottom) t *= a;
        for (double& t : s.top) t *= a;
    }
    return y;
}

void apply_mode_cap(ControlTrajectory& g) {
    if (!g.mode_cap) return;
    const int nx = g.grid.nx;
    const int rows = 2 * static_cast<int>(g.slices.size());
    std::vector<double> data(static_cast<std::size_t>(nx) * rows);
    for (std::size_t n = 0; n < g.slices.size(); ++n) {
        std::copy(g.slices[n].bottom.begin(), g.slices[n].bottom.end(), data.begin() + static_cast<std::ptrdiff_t>(2 * n * nx));
        std::copy(g.slices[n].top.begin(), g.slices[n].top.end(), data.begin() + static_cast<std::ptrdiff_t>((2 * n + 1) * nx));
    }
    const auto& ft = spectral::transform(nx, rows);
    const int nm = ft.modes();
    std::vector<std::complex<double>> hat(static_cast<std::size_t>(nm) * rows);
    ft.forward(data, hat);
    const int cap = std::max(0, *g.mode_cap);
    for (int r = 0; r < rows; ++r)
        for (int m = cap; m < nm; ++m) hat[static_cast<std::size_t>(r) * nm + m] = 0.0;
    ft.inverse(hat, data);
    for (std::size_t n = 0; n < g.slices.size(); ++n) {
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(2 * n * nx), nx, g.slices[n].bottom.begin());
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>((2 * n + 1) * nx), nx, g.slices[n].top.begin());
    }
}

double spacetime_inner(std::span<const VectorField> a, std::span<const VectorField> b, double dt) {
    if (a.size() != b.size() || a.empty()) throw ConfigError("spacetime_inner: length mismatch");
    const int nt = static_cast<int>(a.size()) - 1;
    double s = 0.0;
    for (int n = 0; n <= nt; ++n) s += trapezoid_weight(n, nt) * inner_product(a[n], b[n]);
    return s * dt;
}

namespace {

// Ghost closure u_ghost = alpha * u_adjacent + beta * g for k u_w -+ du/dy = g
// with u_w = (u_ghost + u_adjacent)/2.
struct RobinClosure {
    double alpha;
    double beta;
};

RobinClosure robin_closure(const Grid& g, double k) {
    const double a = 1.0 / g.hy + 0.5 * k;
    return {(1.0 / g.hy - 0.5 * k) / a, 1.0 / a};
}

std::span<double> interior_v(VectorField& w) {
    const std::size_t nx = static_cast<std::size_t>(w.grid.nx);
    return {w.v.data() + nx, nx * (w.grid.ny - 1)};
}

// Homogeneous velocity Laplacian: MAC second differences, Robin ghost on u,
// Dirichlet-zero on the wall rows of v.
VectorField apply_laplacian(const VectorField& w, double alpha) {
    const Grid& g = w.grid;
    VectorField out(g);
    const double cx = 1.0 / (g.hx * g.hx);
    const double cy = 1.0 / (g.hy * g.hy);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = w.ux(i, j);
            const double below = j > 0 ? w.ux(i, j - 1) : alpha * c;
            const double above = j + 1 < g.ny ? w.ux(i, j + 1) : alpha * c;
            out.ux(i, j) = cx * (w.ux(g.wrap(i + 1), j) - 2.0 * c + w.ux(g.wrap(i - 1), j)) +
                           cy * (above - 2.0 * c + below);
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = w.vy(i, j);
            out.vy(i, j) = cx * (w.vy(g.wrap(i + 1), j) - 2.0 * c + w.vy(g.wrap(i - 1), j)) +
                           cy * (w.vy(i, j + 1) - 2.0 * c + w.vy(i, j - 1));
        }
    }
    return out;
}

// In place: w <- (I - c L)^{-1} w.
void implicit_solve(VectorField& w, double c, double alpha) {
    const Grid& g = w.grid;
    const auto lam = spectral::x_symbol(g, true);
    spectral::modal_rational(spectral::robin_cells(g, alpha), lam, 1.0, -c, 1.0, 0.0, w.u, w.u);
    auto vin = interior_v(w);
    spectral::modal_rational(spectral::dirichlet_faces(g), lam, 1.0, -c, 1.0, 0.0, vin, vin);
    w.zero_wall_normal();
}

BoundarySlice midpoint(const BoundarySlice& a, const BoundarySlice& b) {
    BoundarySlice m = a;
    for (std::size_t i = 0; i < m.bottom.size(); ++i) {
        m.bottom[i] = 0.5 * (a.bottom[i] + b.bottom[i]);
        m.top[i] = 0.5 * (a.top[i] + b.top[i]);
    }
    return m;
}

void check_finite(const VectorField& v, int step) {
    if (!all_finite(v))
        throw NumericalError("stokes: non-finite velocity at step " + std::to_string(step));
}

}  // namespace

VectorField leray_project(const VectorField& u) {
    const Grid& g = u.grid;
    VectorField w = u;
    w.zero_wall_normal();
    ScalarField d = divergence(w);
    ScalarField q(g);
    spectral::modal_rational(spectral::neumann_cells(g), spectral::x_symbol(g, true), 0.0, 1.0, 1.0, 0.0,
                             d.values, q.values, true);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) w.ux(i, j) -= (q.at(i, j) - q.at(g.wrap(i - 1), j)) / g.hx;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) w.vy(i, j) -= (q.at(i, j) - q.at(i, j - 1)) / g.hy;
    return w;
}

double divergence_tolerance(const VectorField& v, double factor) {
    return factor * std::max(max_abs(v), 1e-300) / std::min(v.grid.hx, v.grid.hy);
}

double max_divergence(const VectorField& v) {
    const ScalarField d = divergence(v);
    return lp_norm(d, std::numeric_limits<double>::infinity());
}

VectorField stokes_step(const VectorField& v, const BoundarySlice& g_now, const BoundarySlice& g_next,
                        const StokesConfig& cfg) {
    const Grid& g = v.grid;
    require_same_grid(g, g_now.grid, "stokes_step");
    require_same_grid(g, g_next.grid, "stokes_step");
    const auto [alpha, beta] = robin_closure(g, cfg.k);
    const double c = 0.5 * cfg.dt;
    VectorField rhs = v;
    axpy(c, apply_laplacian(v, alpha), rhs);
    const BoundarySlice gm = midpoint(g_now, g_next);
    const double f = cfg.dt * beta / (g.hy * g.hy);
    for (int i = 0; i < g.nx; ++i) {
        rhs.ux(i, 0) += f * gm.bottom[i];
        rhs.ux(i, g.ny - 1) += f * gm.top[i];
    }
    implicit_solve(rhs, c, alpha);
    return leray_project(rhs);
}

VelocityTrajectory solve_stokes(const VectorField& v0, const ControlTrajectory& g, const StokesConfig& cfg) {
    cfg.validate();
    if (g.nt() != cfg.nt) throw ConfigError("solve_stokes: control has " + std::to_string(g.nt()) +
                                            " steps, config expects " + std::to_string(cfg.nt));
    VelocityTrajectory traj;
    traj.dt = cfg.dt;
    traj.snapshots.reserve(static_cast<std::size_t>(cfg.nt) + 1);
    traj.snapshots.push_back(v0);
    traj.snapshots.back().zero_wall_normal();
    for (int n = 0; n < cfg.nt; ++n) {
        traj.snapshots.push_back(stokes_step(traj.snapshots.back(), g.slices[n], g.slices[n + 1], cfg));
        check_finite(traj.snapshots.back(), n + 1);
    }
    return traj;
}

VelocityTrajectory apply_L(const ControlTrajectory& g, const StokesConfig& cfg) {
    return solve_stokes(VectorField(g.grid), g, cfg);
}

ControlTrajectory apply_L_star(std::span<const VectorField> f, const StokesConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(f.size()) != cfg.nt + 1) throw ConfigError("apply_L_star: expected nt+1 snapshots");
    const Grid& g = f.front().grid;
    const auto [alpha, beta] = robin_closure(g, cfg.k);
    const double c = 0.5 * cfg.dt;
    const double fb = cfg.dt * beta / (g.hy * g.hy);
    const double w_area = g.cell_area();

    ControlTrajectory out(g, cfg.nt, cfg.dt);
    VectorField mu(g);
    for (int n = cfg.nt; n >= 1; --n) {
        axpy(w_area * trapezoid_weight(n, cfg.nt) * cfg.dt, f[n], mu);
        mu.zero_wall_normal();
        VectorField z = leray_project(mu);
        implicit_solve(z, c, alpha);
        // sensitivity to the midpoint control of step n-1
        for (int i = 0; i < g.nx; ++i) {
            const double rb = fb * z.ux(i, 0);
            const double rt = fb * z.ux(i, g.ny - 1);
            out.slices[n - 1].bottom[i] += 0.5 * rb;
            out.slices[n].bottom[i] += 0.5 * rb;
            out.slices[n - 1].top[i] += 0.5 * rt;
            out.slices[n].top[i] += 0.5 * rt;
        }
        mu = z;
        axpy(c, apply_laplacian(z, alpha), mu);
    }
    for (int n = 0; n <= cfg.nt; ++n) {
        const double scale = 1.0 / (trapezoid_weight(n, cfg.nt) * cfg.dt * g.hx);
        for (double& t : out.slices[n].bottom) t *= scale;
        for (double& t : out.slices[n].top) t *= scale;
    }
    return out;
}

BoundarySlice boundary_trace_tangential(const VectorField& v) {
    const Grid& g = v.grid;
    BoundarySlice s(g);
    for (int i = 0; i < g.nx; ++i) {
        s.bottom[i] = 1.5 * v.ux(i, 0) - 0.5 * v.ux(i, 1);
        s.top[i] = 1.5 * v.ux(i, g.ny - 1) - 0.5 * v.ux(i, g.ny - 2);
    }
    return s;
}

double navier_slip_residual(const VectorField& v, const BoundarySlice& gs, double k) {
    const Grid& g = v.grid;
    const BoundarySlice wall = boundary_trace_tangential(v);
    const int n = g.ny;
    double r = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        // (T(v) n)_tau = -(du/dy + dv/dx) at y = 0 and +(du/dy + dv/dx) at y = Ly;
        // dv/dx vanishes on the wall rows where v = 0.
        const double dvdx_b = (v.vy(i, 0) - v.vy(g.wrap(i - 1), 0)) / g.hx;
        const double dvdx_t = (v.vy(i, n) - v.vy(g.wrap(i - 1), n)) / g.hx;
        const double dudy_b = (-2.0 * v.ux(i, 0) + 3.0 * v.ux(i, 1) - v.ux(i, 2)) / g.hy;
        const double dudy_t = (2.0 * v.ux(i, n - 1) - 3.0 * v.ux(i, n - 2) + v.ux(i, n - 3)) / g.hy;
        r = std::max(r, std::abs(k * wall.bottom[i] - (dudy_b + dvdx_b) - gs.bottom[i]));
        r = std::max(r, std::abs(k * wall.top[i] + (dudy_t + dvdx_t) - gs.top[i]));
    }
    return r;
}

namespace {

double max_gradient(const VectorField& v) {
    const Grid& g = v.grid;
    const int n = g.ny;
    double m = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < g.nx; ++i) {
            m = std::max(m, std::abs(v.ux(g.wrap(i + 1), j) - v.ux(i, j)) / g.hx);
            m = std::max(m, std::abs(v.vy(i, j + 1) - v.vy(i, j)) / g.hy);
        }
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < g.nx; ++i) m = std::max(m, std::abs(v.ux(i, j) - v.ux(i, j - 1)) / g.hy);
    for (int i = 0; i < g.nx; ++i) {
        m = std::max(m, std::abs(-2.0 * v.ux(i, 0) + 3.0 * v.ux(i, 1) - v.ux(i, 2)) / g.hy);
        m = std::max(m, std::abs(2.0 * v.ux(i, n - 1) - 3.0 * v.ux(i, n - 2) + v.ux(i, n - 3)) / g.hy);
    }
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < g.nx; ++i) m = std::max(m, std::abs(v.vy(i, j) - v.vy(g.wrap(i - 1), j)) / g.hx);
    return m;
}

}  // namespace

double grad_v_infty_integral(const VelocityTrajectory& v) {
    const int nt = v.nt();
    double s = 0.0;
    for (int n = 0; n <= nt; ++n) s += trapezoid_weight(n, nt) * max_gradient(v.snapshots[n]);
    return s * v.dt;
}

}  // namespace mixctl
