#include "mixctl/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mixctl/mixnorm.hpp"
#include "mixctl/spectral.hpp"

namespace mixctl {

const ScalarField& ScalarTrajectory::at(int n) const {
    if (n == nt) return terminal;
    if (!stored(n)) throw ConfigError("ScalarTrajectory: state " + std::to_string(n) + " not stored");
    return snapshots[static_cast<std::size_t>(n / stride)];
}

namespace detail {

namespace {

constexpr double kC4[4] = {-1.0 / 12.0, 7.0 / 12.0, 7.0 / 12.0, -1.0 / 12.0};
constexpr double kD[4] = {-1.0, 3.0, -3.0, 1.0};

inline int reflect(int j, int ny) { return j < 0 ? -1 - j : (j >= ny ? 2 * ny - 1 - j : j); }

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Calls fn(is_xface, face, stencil, 1/h) for every face carrying flux. `face`
// indexes v.u (x-faces) or v.v (y-faces); stencil holds cells i-2..i+1 around
// the face, so stencil[1] / stencil[2] are its left / right neighbours. Walls
// use the even reflection theta_{-1} = theta_0.
template <class Fn>
void for_each_face(const Grid& g, Fn&& fn) {
    std::size_t st[4];
    for (int j = 0; j < g.ny; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * g.nx;
        for (int i = 0; i < g.nx; ++i) {
            for (int s = 0; s < 4; ++s) st[s] = row + g.wrap(i - 2 + s);
            fn(true, row + i, st, 1.0 / g.hx);
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        const std::size_t rows[4] = {static_cast<std::size_t>(reflect(j - 2, g.ny)) * g.nx,
                                     static_cast<std::size_t>(j - 1) * g.nx, static_cast<std::size_t>(j) * g.nx,
                                     static_cast<std::size_t>(reflect(j + 1, g.ny)) * g.nx};
        for (int i = 0; i < g.nx; ++i) {
            for (int s = 0; s < 4; ++s) st[s] = rows[s] + i;
            fn(false, static_cast<std::size_t>(j) * g.nx + i, st, 1.0 / g.hy);
        }
    }
}

inline double stencil(const double* th, const std::size_t* st, const double* w) {
    return w[0] * th[st[0]] + w[1] * th[st[1]] + w[2] * th[st[2]] + w[3] * th[st[3]];
}

}  // namespace

ScalarField advect(const ScalarField& theta, const VectorField& v) {
    const Grid& g = theta.grid;
    ScalarField r(g);
    const double* th = theta.values.data();
    double* out = r.values.data();
    for_each_face(g, [&](bool xface, std::size_t f, const std::size_t* st, double inv_h) {
        const double vel = xface ? v.u[f] : v.v[f];
        const double flux = (vel * stencil(th, st, kC4) + std::abs(vel) * stencil(th, st, kD) / 12.0) * inv_h;
        out[st[1]] -= flux;
        out[st[2]] += flux;
    });
    return r;
}

ScalarField advect_velocity_derivative(const ScalarField& theta, const VectorField& v, const VectorField& w) {
    const Grid& g = theta.grid;
    ScalarField r(g);
    const double* th = theta.values.data();
    double* out = r.values.data();
    for_each_face(g, [&](bool xface, std::size_t f, const std::size_t* st, double inv_h) {
        const double vel = xface ? v.u[f] : v.v[f];
        const double dv = xface ? w.u[f] : w.v[f];
        const double flux = dv * (stencil(th, st, kC4) + sgn(vel) * stencil(th, st, kD) / 12.0) * inv_h;
        out[st[1]] -= flux;
        out[st[2]] += flux;
    });
    return r;
}

ScalarField advect_transpose(const ScalarField& lambda, const VectorField& v) {
    const Grid& g = lambda.grid;
    ScalarField r(g);
    const double* lam = lambda.values.data();
    double* out = r.values.data();
    for_each_face(g, [&](bool xface, std::size_t f, const std::size_t* st, double inv_h) {
        const double vel = xface ? v.u[f] : v.v[f];
        const double glam = (lam[st[2]] - lam[st[1]]) * inv_h;
        const double a = glam * vel;
        const double b = glam * std::abs(vel) / 12.0;
        for (int s = 0; s < 4; ++s) out[st[s]] += a * kC4[s] + b * kD[s];
    });
    return r;
}

void accumulate_velocity_sensitivity(const ScalarField& lambda, const ScalarField& theta, const VectorField& v,
                                     double scale, VectorField& out) {
    const double* lam = lambda.values.data();
    const double* th = theta.values.data();
    for_each_face(theta.grid, [&](bool xface, std::size_t f, const std::size_t* st, double inv_h) {
        const double vel = xface ? v.u[f] : v.v[f];
        const double glam = (lam[st[2]] - lam[st[1]]) * inv_h;
        const double face = stencil(th, st, kC4) + sgn(vel) * stencil(th, st, kD) / 12.0;
        (xface ? out.u[f] : out.v[f]) += scale * glam * face;
    });
}

ScalarField diffuse(const ScalarField& theta, double epsilon, double dt) {
    if (epsilon == 0.0) return theta;
    const Grid& g = theta.grid;
    const double c = 0.5 * epsilon * dt;
    ScalarField out(g);
    spectral::modal_rational(spectral::neumann_cells(g), spectral::x_symbol(g, false), 1.0, -c, 1.0, c,
                             theta.values, out.values);
    return out;
}

VectorField average(const VectorField& a, const VectorField& b) {
    VectorField m = a;
    for (std::size_t k = 0; k < m.u.size(); ++k) m.u[k] = 0.5 * (a.u[k] + b.u[k]);
    for (std::size_t k = 0; k < m.v.size(); ++k) m.v[k] = 0.5 * (a.v[k] + b.v[k]);
    return m;
}

}  // namespace detail

double cfl_dt_limit(const VectorField& a, const VectorField& b, double cfl) {
    const double vmax = std::max({max_abs(a), max_abs(b), 1e-300});
    return cfl * std::min(a.grid.hx, a.grid.hy) / vmax;
}

namespace {

void check_cfl(const VectorField& a, const VectorField& b, double dt, double cfl, int step) {
    const double limit = cfl_dt_limit(a, b, cfl);
    if (dt > limit) {
        std::ostringstream os;
        os << "transport: CFL violated at step " << step << " (dt = " << dt << ", required dt <= " << limit << ")";
        throw CflError(os.str(), step, dt, limit);
    }
}

void check_finite(const ScalarField& f, int step, const char* field) {
    if (!all_finite(f))
        throw NumericalError(std::string("transport: non-finite ") + field + " at step " + std::to_string(step));
}

ScalarField rk3_advect(const ScalarField& th, const VectorField& va, const VectorField& vb, double dt) {
    using detail::advect;
    const VectorField vc = detail::average(va, vb);
    ScalarField s1 = th;
    axpy(dt, advect(th, va), s1);
    ScalarField s2 = s1;
    axpy(dt, advect(s1, vb), s2);
    for (std::size_t k = 0; k < s2.values.size(); ++k) s2.values[k] = 0.75 * th.values[k] + 0.25 * s2.values[k];
    ScalarField s3 = s2;
    axpy(dt, advect(s2, vc), s3);
    for (std::size_t k = 0; k < s3.values.size(); ++k)
        s3.values[k] = th.values[k] / 3.0 + 2.0 / 3.0 * s3.values[k];
    return s3;
}

}  // namespace

ScalarField detail::step(const ScalarField& theta, const VectorField& v_now, const VectorField& v_next,
                         double epsilon, double dt) {
    return diffuse(rk3_advect(theta, v_now, v_next, dt), epsilon, dt);
}

ScalarField transport_step(const ScalarField& theta, const VectorField& v_now, const VectorField& v_next,
                           double epsilon, double dt, double cfl) {
    if (epsilon < 0.0) throw ConfigError("transport: epsilon must be >= 0");
    require_same_grid(theta.grid, v_now.grid, "transport_step");
    check_cfl(v_now, v_next, dt, cfl, 0);
    ScalarField out = detail::step(theta, v_now, v_next, epsilon, dt);
    check_finite(out, 0, "scalar");
    return out;
}

ScalarTrajectory solve_forward(const ScalarField& theta0, const VelocityTrajectory& v, double epsilon, double cfl,
                               int stride) {
    if (epsilon < 0.0) throw ConfigError("transport: epsilon must be >= 0");
    if (stride < 1) throw ConfigError("transport: checkpoint stride must be >= 1");
    const int nt = v.nt();
    // reject up front, naming the first offending step
    for (int n = 0; n < nt; ++n) check_cfl(v.snapshots[n], v.snapshots[n + 1], v.dt, cfl, n);
    ScalarTrajectory traj;
    traj.dt = v.dt;
    traj.epsilon = epsilon;
    traj.nt = nt;
    traj.stride = stride;
    traj.snapshots.reserve(static_cast<std::size_t>(nt / stride) + 1);
    traj.snapshots.push_back(theta0);
    ScalarField cur = theta0;
    for (int n = 0; n < nt; ++n) {
        cur = detail::step(cur, v.snapshots[n], v.snapshots[n + 1], epsilon, v.dt);
        check_finite(cur, n + 1, "scalar");
        if ((n + 1) % stride == 0) traj.snapshots.push_back(cur);
    }
    traj.terminal = cur;
    return traj;
}

ScalarTrajectory solve_tangent(const VelocityTrajectory& w, const ScalarTrajectory& base,
                               const VelocityTrajectory& v) {
    using namespace detail;
    if (w.nt() != v.nt() || base.nt != v.nt()) throw ConfigError("solve_tangent: trajectory mismatch");
    if (base.stride != 1) throw ConfigError("solve_tangent: base trajectory must store every step");
    const double dt = v.dt;
    const Grid& g = base.snapshots.front().grid;
    ScalarTrajectory z;
    z.dt = dt;
    z.epsilon = base.epsilon;
    z.nt = base.nt;
    z.snapshots.push_back(ScalarField(g));
    for (int n = 0; n < v.nt(); ++n) {
        const VectorField& va = v.snapshots[n];
        const VectorField& vb = v.snapshots[n + 1];
        const VectorField vc = average(va, vb);
        const VectorField& wa = w.snapshots[n];
        const VectorField& wb = w.snapshots[n + 1];
        const VectorField wc = average(wa, wb);
        const ScalarField& th = base.at(n);
        const ScalarField& zn = z.snapshots.back();

        ScalarField t1 = th;
        axpy(dt, advect(th, va), t1);
        ScalarField t2 = t1;
        axpy(dt, advect(t1, vb), t2);
        for (std::size_t k = 0; k < t2.values.size(); ++k) t2.values[k] = 0.75 * th.values[k] + 0.25 * t2.values[k];

        ScalarField z1 = zn;
        axpy(dt, advect(zn, va), z1);
        axpy(dt, advect_velocity_derivative(th, va, wa), z1);
        ScalarField z2 = z1;
        axpy(dt, advect(z1, vb), z2);
        axpy(dt, advect_velocity_derivative(t1, vb, wb), z2);
        for (std::size_t k = 0; k < z2.values.size(); ++k) z2.values[k] = 0.75 * zn.values[k] + 0.25 * z2.values[k];
        ScalarField z3 = z2;
        axpy(dt, advect(z2, vc), z3);
        axpy(dt, advect_velocity_derivative(t2, vc, wc), z3);
        for (std::size_t k = 0; k < z3.values.size(); ++k)
            z3.values[k] = zn.values[k] / 3.0 + 2.0 / 3.0 * z3.values[k];
        z.snapshots.push_back(diffuse(z3, base.epsilon, dt));
    }
    z.terminal = z.snapshots.back();
    return z;
}

ScalarTrajectory solve_linearized(const ControlTrajectory& h, const ScalarTrajectory& base,
                                  const VelocityTrajectory& v, const StokesConfig& cfg) {
    return solve_tangent(apply_L(h, cfg), base, v);
}

std::vector<TransportDiagnostics> diagnostics(const ScalarTrajectory& traj) {
    std::vector<TransportDiagnostics> out;
    const double inf = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= traj.nt; ++n) {
        if (n != traj.nt && !traj.stored(n)) continue;
        const ScalarField& f = traj.at(n);
        out.push_back({n * traj.dt, mass(f), lp_norm(f, 1.0), lp_norm(f, 2.0), lp_norm(f, inf), mix_norm(f)});
    }
    return out;
}

}  // namespace mixctl
